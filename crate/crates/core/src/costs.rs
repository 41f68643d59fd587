//! CNOT cost model.
//!
//! All counts are upper bounds taken from closed forms; where several forms
//! apply, the smallest is used. Single-qubit gates are free.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::gates::{Gate, StructuredCircuit};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CostError {
    #[error("{k} controls do not fit in {n_total} qubits")]
    TooManyControls { k: usize, n_total: usize },
    #[error("invalid ancilla regime `{0}` (expected none, dirty:K or clean:K with K >= 1)")]
    BadRegime(String),
    #[error("permutation gates need at least one qubit")]
    EmptyPermutation,
}

/// Ancillas available on top of the qubits a circuit addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "count", rename_all = "lowercase")]
pub enum AncillaRegime {
    None,
    Dirty(usize),
    Clean(usize),
}

impl AncillaRegime {
    pub fn dirty_count(&self) -> usize {
        match self {
            AncillaRegime::Dirty(k) => *k,
            _ => 0,
        }
    }

    pub fn clean_count(&self) -> usize {
        match self {
            AncillaRegime::Clean(k) => *k,
            _ => 0,
        }
    }

    pub fn count(&self) -> usize {
        self.dirty_count() + self.clean_count()
    }
}

impl fmt::Display for AncillaRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AncillaRegime::None => write!(f, "none"),
            AncillaRegime::Dirty(k) => write!(f, "dirty:{k}"),
            AncillaRegime::Clean(k) => write!(f, "clean:{k}"),
        }
    }
}

impl FromStr for AncillaRegime {
    type Err = CostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CostError::BadRegime(s.to_string());
        if s == "none" {
            return Ok(AncillaRegime::None);
        }
        let (kind, count) = s.split_once(':').ok_or_else(bad)?;
        let count: usize = count.parse().map_err(|_| bad())?;
        if count == 0 {
            return Err(bad());
        }
        match kind {
            "dirty" => Ok(AncillaRegime::Dirty(count)),
            "clean" => Ok(AncillaRegime::Clean(count)),
            _ => Err(bad()),
        }
    }
}

/// Cost-model options.
///
/// `split_mcx` additionally allows the `8k - 6` count for a `C_k(X)` with
/// `k <= ceil(N/2)` in a register of `N >= 5` qubits, obtained by splitting
/// it into smaller multi-controlled gates that borrow the idle qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostModel {
    pub regime: AncillaRegime,
    pub split_mcx: bool,
}

impl CostModel {
    pub fn new(regime: AncillaRegime) -> Self {
        CostModel {
            regime,
            split_mcx: false,
        }
    }

    pub fn with_split_mcx(mut self) -> Self {
        self.split_mcx = true;
        self
    }

    /// Cheapest `C_k(X)` in a register of `n_total` qubits, with its rule name.
    pub fn mcx_detail(&self, k: usize, n_total: usize) -> Result<(u64, &'static str), CostError> {
        if k + 1 > n_total {
            return Err(CostError::TooManyControls { k, n_total });
        }
        match k {
            0 => return Ok((0, "not")),
            1 => return Ok((1, "cnot")),
            _ => {}
        }
        let k64 = k as u64;
        let half = k.div_ceil(2).saturating_sub(1);
        let dirty = (n_total - k - 1) + self.regime.count();
        let clean = self.regime.clean_count();
        let register = n_total + self.regime.count();
        let mut best = {
            let (c, name) = self.mcu_detail(k);
            (c, if name == "no_ancilla" { "via_mcu" } else { name })
        };
        let mut offer = |c: u64, name: &'static str| {
            if c < best.0 {
                best = (c, name);
            }
        };
        if k == 2 {
            offer(6, "toffoli");
        }
        if dirty >= 1 {
            offer(16 * k64 - 8, "one_dirty");
        }
        if k >= 5 && dirty >= half {
            offer(8 * k64 - 12, "half_dirty");
        }
        if clean >= half {
            offer(6 * k64 - 6, "half_clean");
        }
        if self.split_mcx && register >= 5 && k <= register.div_ceil(2) {
            offer(8 * k64 - 6, "split");
        }
        Ok(best)
    }

    pub fn mcx(&self, k: usize, n_total: usize) -> Result<u64, CostError> {
        self.mcx_detail(k, n_total).map(|(c, _)| c)
    }

    /// Cheapest `C_k(U)` with its rule name.
    pub fn mcu_detail(&self, k: usize) -> (u64, &'static str) {
        let k64 = k as u64;
        match k {
            0 => (0, "single_qubit"),
            1 => (2, "controlled_u"),
            _ => {
                let plain = 16 * k64 * k64 - 28 * k64 - 2;
                if self.regime.clean_count() >= k - 1 {
                    let c = 6 * k64 - 4;
                    if c < plain {
                        return (c, "clean");
                    }
                }
                (plain, "no_ancilla")
            }
        }
    }

    pub fn mcu(&self, k: usize) -> u64 {
        self.mcu_detail(k).0
    }

    /// Permutation gate on `n` qubits inside a register of `n_total` qubits;
    /// idle register qubits serve as dirty ancillas.
    pub fn permutation_detail(&self, n: usize, n_total: usize) -> Result<(u64, &'static str), CostError> {
        if n == 0 {
            return Err(CostError::EmptyPermutation);
        }
        if n == 1 {
            return Ok((0, "not"));
        }
        let n64 = n as i64;
        let pow = 1i64 << n;
        let mut best = (unitary_count(n), "unitary");
        if n >= 3 {
            let c = (27 * n64 - 62) * pow + 44 * n64 * n64 - 96 * n64 - 23;
            if (c as u64) < best.0 {
                best = (c as u64, "even_odd");
            }
        }
        let dirty = n_total.saturating_sub(n) + self.regime.count();
        if dirty >= 1 {
            let c = ((18 * n64 - 26) * (pow - 1)) as u64;
            if c < best.0 {
                best = (c, "householder");
            }
        }
        Ok(best)
    }
}

/// Cost of a `k`-controlled NOT in a register of `n_total` qubits.
pub fn cost_mcx(k: usize, n_total: usize, regime: AncillaRegime) -> Result<u64, CostError> {
    CostModel::new(regime).mcx(k, n_total)
}

/// Cost of a `k`-controlled single-qubit unitary.
pub fn cost_mcu(k: usize, regime: AncillaRegime) -> u64 {
    CostModel::new(regime).mcu(k)
}

/// Dense state preparation on `n` qubits: `ceil(23/24 2^n - 2^{n/2+1} + 5/3)`.
pub fn cost_dense_sp(n: usize) -> u64 {
    if n == 0 {
        return 0;
    }
    if n % 2 == 0 {
        // exact: (23 * 2^n - 48 * 2^{n/2} + 40) / 24
        let num = 23i128 * (1i128 << n) - 48 * (1i128 << (n / 2)) + 40;
        return ((num.max(0) + 23) / 24) as u64;
    }
    let x = 23.0 / 24.0 * (2f64).powi(n as i32) - (2f64).powf(n as f64 / 2.0 + 1.0) + 5.0 / 3.0;
    (x - 1e-9).ceil().max(0.0) as u64
}

/// Diagonal gate on `m` qubits: `2^m - 2`.
pub fn cost_diagonal(m: usize) -> u64 {
    (1u64 << m).saturating_sub(2)
}

/// Generic unitary on `n >= 2` qubits: `ceil(23/48 4^n - 3/2 2^n + 4/3)`.
pub fn unitary_count(n: usize) -> u64 {
    let num = 23i128 * (1i128 << (2 * n)) - 72 * (1i128 << n) + 64;
    ((num.max(0) + 47) / 48) as u64
}

/// Permutation gate on `n` qubits with nothing idle besides the regime.
pub fn cost_permutation(n: usize, regime: AncillaRegime) -> Result<u64, CostError> {
    CostModel::new(regime)
        .permutation_detail(n, n)
        .map(|(c, _)| c)
}

/// Pivoting bounds for a state with `nnz` nonzeros on `n` qubits, `s = ceil(log2 nnz)`,
/// given `a` dirty ancillas (clean ones count as dirty too).
pub fn pivot_bound(n: usize, s: usize, nnz: usize, regime: AncillaRegime) -> Option<u64> {
    let (n64, s64, z) = (n as i64, s as i64, nnz as i64);
    let a = regime.count();
    let mut best: Option<i64> = None;
    let mut offer = |c: i64| best = Some(best.map_or(c, |b: i64| b.min(c)));
    if n + a >= s + 1 {
        offer((n64 + 16 * s64 * s64 - 28 * s64 - 3) * z);
        offer(27 * n64 * (1 << n));
    }
    if n + a >= s + 2 {
        offer((n64 + 16 * s64 - 9) * z);
    }
    if s >= 5 && n + a >= s + s.div_ceil(2) {
        offer((n64 + 8 * s64 - 13) * z);
    }
    if s >= 2 && regime.clean_count() >= s.div_ceil(2) - 1 {
        offer((n64 + 6 * s64 - 7) * z);
    }
    best.map(|b| b.max(0) as u64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostItem {
    pub index: usize,
    pub kind: String,
    pub formula: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostReport {
    pub total: u64,
    pub breakdown: Vec<CostItem>,
}

impl CostReport {
    /// Totals per gate kind, in first-seen order.
    pub fn by_kind(&self) -> Vec<(String, u64)> {
        let mut out: Vec<(String, u64)> = Vec::new();
        for item in &self.breakdown {
            match out.iter_mut().find(|(k, _)| *k == item.kind) {
                Some((_, c)) => *c += item.count,
                None => out.push((item.kind.clone(), item.count)),
            }
        }
        out
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        for (kind, count) in self.by_kind() {
            s.push_str(&format!("{kind:<12} {count:>10}\n"));
        }
        s.push_str(&format!("{:<12} {:>10}\n", "total", self.total));
        s
    }
}

fn is_standard_phase(phi: f64) -> bool {
    (crate::numerics::cis(phi) + crate::numerics::ONE).norm() < 1e-12
}

/// Unitary count with a merged pair of dense state preparations on `q` qubits
/// (`SP_w` followed by `SP_v^dagger`): the final local unitaries of one and
/// the initial ones of the other combine, saving the two half-register unitaries.
pub fn cost_merged_sp_pair(q: usize) -> u64 {
    let sp = cost_dense_sp(q);
    if q < 4 {
        return 2 * sp;
    }
    let saved = unitary_count(q / 2) + unitary_count(q.div_ceil(2));
    (2 * sp).saturating_sub(saved).max(sp)
}

/// Audits a circuit with the default (table) cost model.
pub fn audit_circuit(c: &StructuredCircuit, regime: AncillaRegime) -> Result<CostReport, CostError> {
    audit_with(c, &CostModel::new(regime))
}

pub fn audit_with(c: &StructuredCircuit, model: &CostModel) -> Result<CostReport, CostError> {
    let n_total = c.total_qubits();
    let mut breakdown = Vec::with_capacity(c.gates.len());
    let mut skip_next = false;
    for (index, g) in c.gates.iter().enumerate() {
        if skip_next {
            skip_next = false;
            continue;
        }
        let q = g.qubits().len();
        let (count, formula): (u64, String) = match g {
            Gate::Cnot { .. } => (1, "cnot".into()),
            Gate::Single { .. } => (0, "single_qubit".into()),
            Gate::Mcx {
                controls,
                relative_phase: true,
                ..
            } if controls.len() == 2 => (3, "toffoli_up_to_diagonal".into()),
            Gate::Mcx { controls, .. } => {
                let (c, name) = model.mcx_detail(controls.len(), n_total)?;
                (c, format!("mcx:{name}"))
            }
            Gate::Mcu { controls, .. } => {
                let (c, name) = model.mcu_detail(controls.len());
                (c, format!("mcu:{name}"))
            }
            Gate::Diagonal { .. } => (cost_diagonal(q), "diagonal".into()),
            Gate::Permutation { .. } => {
                let (c, name) = model.permutation_detail(q, n_total)?;
                (c, format!("permutation:{name}"))
            }
            Gate::Decrement { .. } => {
                let mut total = 0;
                for k in 0..q {
                    total += model.mcx(k, n_total)?;
                }
                (total, "decrement_ladder".into())
            }
            Gate::SpBlock {
                qubits, inverted, ..
            } => {
                let merged = !inverted
                    && q >= 4
                    && matches!(c.gates.get(index + 1),
                        Some(Gate::SpBlock { qubits: q2, inverted: true, .. }) if q2 == qubits);
                if merged {
                    skip_next = true;
                    (cost_merged_sp_pair(q), "sp_pair_merged".into())
                } else {
                    (cost_dense_sp(q), "dense_sp".into())
                }
            }
            Gate::H0Phase { phi, .. } => {
                if is_standard_phase(*phi) {
                    let (c, name) = model.mcx_detail(q - 1, n_total)?;
                    (c, format!("h0:mcx:{name}"))
                } else {
                    let (c, name) = model.mcu_detail(q - 1);
                    (c, format!("h0_phase:mcu:{name}"))
                }
            }
        };
        breakdown.push(CostItem {
            index,
            kind: g.kind().to_string(),
            formula,
            count,
        });
    }
    Ok(CostReport {
        total: breakdown.iter().map(|i| i.count).sum(),
        breakdown,
    })
}

/// Closed-form bounds for the decompositions.
pub mod bounds {
    /// Sparse state preparation without ancillas (one dirty when `s = n - 1`).
    pub fn ssp(n: usize, s: usize, nnz: usize) -> f64 {
        let pivot = (n as f64 + 16.0 * s as f64 - 9.0) * nnz as f64;
        pivot.max(0.0) + (23.0 / 24.0 * (1u64 << s) as f64).ceil()
    }

    /// Sparse state preparation with `ceil(s/2 - 1)` clean ancillas.
    pub fn ssp_clean(n: usize, s: usize, nnz: usize) -> f64 {
        (n as f64 + 6.0 * s as f64 - 7.0) * nnz as f64 + 23.0 / 24.0 * (1u64 << s) as f64
    }

    /// Benchmark reference line `(n + 6s - 7 + 23/24) 2^s`.
    pub fn ssp_reference(n: usize, s: usize) -> f64 {
        (n as f64 + 6.0 * s as f64 - 7.0 + 23.0 / 24.0) * (1u64 << s) as f64
    }

    /// Basic sparse isometry method, one dirty ancilla.
    pub fn sparse_iso_dirty(n: usize, m: usize, elim: usize) -> f64 {
        (17.0 * n as f64 - 5.0) * elim as f64
            + (51.0 * n as f64 + 34.0 * m as f64 - 44.0) * (1u64 << m) as f64
    }

    /// Basic sparse isometry method, `ceil((n-3)/2)` clean ancillas.
    pub fn sparse_iso_clean(n: usize, m: usize, elim: usize) -> f64 {
        (7.0 * n as f64 - 3.0) * elim as f64
            + (21.0 * n as f64 + 24.0 * m as f64 - 38.0) * (1u64 << m) as f64
    }

    /// No-fill-in method, one clean and one dirty ancilla.
    pub fn no_fill_in(n: usize, m: usize, nnz: usize) -> f64 {
        (17.0 * n as f64 + 12.0) * nnz as f64
            + (34.0 * n as f64 + 34.0 * m as f64 - 5.0) * (1u64 << m) as f64
    }

    /// No-fill-in method, `ceil(n/2)` clean ancillas.
    pub fn no_fill_in_clean(n: usize, m: usize, nnz: usize) -> f64 {
        (7.0 * n as f64 + 4.0) * nnz as f64
            + (14.0 * n as f64 + 24.0 * m as f64 - 21.0) * (1u64 << m) as f64
    }

    /// Reflection up to a diagonal and a permutation, one dirty ancilla.
    pub fn householder_up_to(n: usize, s: usize, nnz: usize) -> f64 {
        (n as f64 + 16.0 * s as f64 - 5.0) * nnz as f64 + 16.0 * n as f64
    }

    /// Permuted diagonal isometry, no ancilla (one dirty when `m = n - 1`).
    pub fn perm_diag(n: usize, m: usize) -> f64 {
        (n as f64 + 34.0 * m as f64 - 34.0) * (1u64 << m) as f64
    }

    /// Permutation via reflections, one dirty ancilla.
    pub fn perm_householder(n: usize) -> f64 {
        (18.0 * n as f64 - 26.0) * ((1u64 << n) - 1) as f64
    }

    /// Dense isometry from `m` to `n` qubits with one dirty ancilla.
    pub fn dense_iso(m: usize, n: usize) -> f64 {
        let (mf, nf) = (m as f64, n as f64);
        let p = |e: f64| 2f64.powf(e);
        if n % 2 == 0 {
            23.0 / 24.0 * (p(mf + nf) + p(nf)) + 23.0 / 12.0 * p(mf + nf / 2.0)
                - p(mf + nf / 4.0 + 2.0)
                + (16.0 * nf - 23.0) * p(mf)
                - 2.0 / 3.0
        } else {
            115.0 / 96.0 * (p(mf + nf) + p(nf)) + 23.0 / 12.0 * p(mf + (nf - 1.0) / 2.0)
                - p(mf + (nf - 1.0) / 4.0 + 2.0)
                + (16.0 * nf - 23.0) * p(mf)
                - 2.0 / 3.0
        }
    }

    /// Dense unitary by recursive halving, one dirty ancilla.
    pub fn dense_unitary(n: usize) -> f64 {
        (0..n)
            .map(|k| {
                dense_iso(n - k - 1, n - k)
                    + k as f64 * 2f64.powi((n - k + 3) as i32)
                    + 2f64.powi(n as i32 - 1) * (1.0 - 2f64.powi(-(k as i32)))
            })
            .sum()
    }
}
