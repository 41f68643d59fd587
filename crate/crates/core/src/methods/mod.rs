//! End-to-end decompositions of isometries into structured circuits.
//!
//! Every method works on a copy of the input (the working matrix) and
//! collects forward gates `G` with `G W = I_{n,m}`; the returned circuit is
//! `G^dagger`. Permutations and diagonals produced by reductions that are only
//! exact up to such factors are applied to the working matrix as classical
//! data, so later steps see the true intermediate matrix.

mod dense;
mod permutation;
mod sparse;
pub mod symbolic;

pub use dense::{dense_householder_iso, dense_householder_unitary};
pub use permutation::{controlled_u_via_householder, perm_via_householder};
pub use sparse::{fixed_envelope_iso, no_fill_in_iso, sparse_householder_iso};

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::costs::{audit_circuit, AncillaRegime, CostError, CostReport};
use crate::gates::{AncillaKind, Gate, GateError, StructuredCircuit};
use crate::householder::{reduce_column, HouseholderError};
use crate::numerics::{
    ceil_log2, Amplitude, NumericsError, SparseIsometry, SparseState, ONE, ZERO,
};
use crate::pivoting::{pivot_plan, pivot_state, PivotError, QubitSplitting, SspOptions};

/// Tolerance for accepting an input as an isometry.
pub const ISOMETRY_TOL: f64 = 1e-8;
/// Entries whose value moves by more than this count as changed in traces.
const CHANGE_TOL: f64 = 1e-12;
/// Phases this close to 1 are not emitted.
const PHASE_TOL: f64 = 1e-13;

#[derive(Debug, Error)]
pub enum MethodError {
    #[error("input is not an isometry: {0}")]
    NotIsometry(NumericsError),
    #[error("input is not a permuted diagonal isometry: {0}")]
    NotPermutedDiagonal(String),
    #[error("invalid elimination strategy: {0}")]
    Strategy(NumericsError),
    #[error("method needs at least {needed} qubits, got {got}")]
    TooFewQubits { needed: u32, got: u32 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Householder(#[from] HouseholderError),
    #[error(transparent)]
    Pivot(#[from] PivotError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Gate(#[from] GateError),
}

/// One column reduction. Cells are `(row, col)` of the input matrix; for the
/// no-fill-in method rows at or above `2^n` belong to the zero block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepInfo {
    pub step: usize,
    pub column: usize,
    pub target_row: usize,
    pub column_nnz: usize,
    /// Register size of the dense preparations of this step.
    pub s: usize,
    pub eliminated: Vec<(usize, usize)>,
    pub changed: Vec<(usize, usize)>,
    pub fill_in: Vec<(usize, usize)>,
    /// Changed entries outside the fill-in predicate (always 0 for a correct run).
    pub confinement_violations: usize,
    /// Whether the Householder vector lies in the rows the method prepares.
    pub support_confined: bool,
    /// Nonzeros of the working matrix after the step.
    pub work_nnz: usize,
    /// Columns of earlier steps that are no longer a single basis vector.
    pub disturbed_columns: usize,
}

#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub circuit: StructuredCircuit,
    pub audit: CostReport,
    pub trace: Vec<StepInfo>,
    /// Column phases removed by the final diagonal.
    pub residual_phases: Vec<Amplitude>,
    /// Row of each column just before the final permutation.
    pub residual_permutation: Vec<usize>,
}

impl DecompositionResult {
    /// Total elimination count `sum (nnz(w_i) - 1)` over the recorded steps.
    pub fn eliminations(&self) -> usize {
        self.trace.iter().map(|s| s.column_nnz.saturating_sub(1)).sum()
    }

    pub fn confinement_violations(&self) -> usize {
        self.trace.iter().map(|s| s.confinement_violations).sum()
    }
}

/// A standard reflection implemented up to a monomial residual:
/// the gates act as `R H_u`, where `R` is given by `residual`.
#[derive(Debug, Clone)]
pub struct UpToReflection {
    pub gates: Vec<Gate>,
    /// Monomial gates forming `R` (already included at the front of `gates`
    /// when nonempty there).
    pub residual: Vec<Gate>,
    pub s: usize,
    pub register: Vec<usize>,
}

/// `H_u = I - 2|u><u|` up to a diagonal and permutation: pivot `u` into block
/// 0, then conjugate the all-qubit `H_0` by a dense preparation of the pivoted
/// vector on the register qubits.
pub fn householder_up_to(u: &SparseState, opts: &SspOptions) -> Result<UpToReflection, MethodError> {
    let n = u.n as usize;
    let support: Vec<usize> = u.support().collect();
    match support.len() {
        0 => Err(PivotError::ZeroVector.into()),
        1 => {
            // H_u is itself diagonal
            let flips: Vec<Gate> = (0..n)
                .filter(|&q| (support[0] >> (n - 1 - q)) & 1 == 1)
                .map(Gate::x)
                .collect();
            let mut residual = flips.clone();
            residual.push(Gate::H0Phase {
                qubits: (0..n).collect(),
                phi: PI,
            });
            residual.extend(flips);
            Ok(UpToReflection {
                gates: vec![],
                residual,
                s: 0,
                register: vec![],
            })
        }
        _ => {
            let (plan, forward, reduced) = pivot_state(u, opts)?;
            let register = plan.splitting.register_qubits.clone();
            let mut gates = forward.clone();
            gates.extend(reflection_core(&register, reduced, n));
            Ok(UpToReflection {
                gates,
                residual: forward,
                s: register.len(),
                register,
            })
        }
    }
}

/// `SP^dagger, H_0, SP` for a state `reduced` living on `register` (block 0).
fn reflection_core(register: &[usize], reduced: SparseState, total: usize) -> Vec<Gate> {
    vec![
        Gate::SpBlock {
            qubits: register.to_vec(),
            state: reduced.clone(),
            inverted: true,
        },
        Gate::H0Phase {
            qubits: (0..total).collect(),
            phi: PI,
        },
        Gate::SpBlock {
            qubits: register.to_vec(),
            state: reduced,
            inverted: false,
        },
    ]
}

/// Working state shared by the methods.
pub(crate) struct Reducer {
    pub work: SparseIsometry,
    pub forward: Vec<Gate>,
    /// Current row of each input row.
    pos: Vec<usize>,
    /// Input row of each current row.
    orig: Vec<usize>,
    pub trace: Vec<StepInfo>,
    /// Current target row of every finished column.
    done: Vec<(usize, usize)>,
}

impl Reducer {
    pub fn new(work: SparseIsometry) -> Self {
        let rows = work.n_rows();
        Self {
            work,
            forward: Vec::new(),
            pos: (0..rows).collect(),
            orig: (0..rows).collect(),
            trace: Vec::new(),
            done: Vec::new(),
        }
    }

    fn total(&self) -> usize {
        self.work.n() as usize
    }

    pub fn current_row(&self, input_row: usize) -> usize {
        self.pos[input_row]
    }

    /// Applies monomial gates to the working matrix without emitting them.
    pub fn apply_classical(&mut self, gates: &[Gate]) {
        let total = self.total();
        for g in gates {
            let img = |x: usize| g.basis_image(total, x).expect("monomial gate");
            self.work.map_rows(img);
            for p in self.pos.iter_mut() {
                *p = img(*p).0;
            }
            for d in self.done.iter_mut() {
                d.1 = img(d.1).0;
            }
        }
        for (i, &p) in self.pos.iter().enumerate() {
            self.orig[p] = i;
        }
    }

    /// Emits monomial gates and applies them.
    pub fn emit_monomial(&mut self, gates: Vec<Gate>) {
        self.apply_classical(&gates);
        self.forward.extend(gates);
    }

    /// Whether column `j` is already a multiple of `e_row`.
    pub fn is_reduced(&self, j: usize, row: usize) -> bool {
        let c = self.work.col(j);
        c.len() == 1 && c.contains_key(&row)
    }

    /// Numerically reduces column `j` onto current row `row` and records the step.
    /// `gates` are emitted first; `residual` is the monomial part applied after
    /// the reflection.
    pub fn reflect(
        &mut self,
        j: usize,
        row: usize,
        s: usize,
        support_confined: bool,
        gates: Vec<Gate>,
        residual: &[Gate],
    ) -> Result<(), MethodError> {
        let before = self.work.clone();
        let rec = reduce_column(&mut self.work, j, row)?;
        let to_input = |(r, c): (usize, usize)| (self.orig[r], c);
        let mut changed = Vec::new();
        let mut fill_in = Vec::new();
        let mut violations = 0;
        let cells: std::collections::BTreeSet<(usize, usize)> = before
            .entries()
            .chain(self.work.entries())
            .map(|(r, c, _)| (r, c))
            .filter(|&(r, c)| r != row && c != j)
            .collect();
        for (r, c) in cells {
            let (old, new) = (before.get(r, c), self.work.get(r, c));
            if (old - new).norm() > CHANGE_TOL {
                changed.push(to_input((r, c)));
                if old == ZERO {
                    fill_in.push(to_input((r, c)));
                }
                if !crate::householder::fill_in_predicate(&before, row, j, r, c) {
                    violations += 1;
                }
            }
        }
        let eliminated = rec.eliminated.iter().map(|&r| to_input((r, j))).collect();
        let step = self.trace.len();
        let target_row = self.orig[row];
        self.forward.extend(gates);
        self.apply_classical(residual);
        self.done.push((j, self.pos[target_row]));
        let disturbed = self
            .done
            .iter()
            .filter(|&&(c, r)| {
                let col = self.work.col(c);
                col.len() != 1 || !col.contains_key(&r)
            })
            .count();
        self.trace.push(StepInfo {
            step,
            column: j,
            target_row,
            column_nnz: rec.column_nnz,
            s,
            eliminated,
            changed,
            fill_in,
            confinement_violations: violations,
            support_confined,
            work_nnz: self.work.nnz(),
            disturbed_columns: disturbed,
        });
        Ok(())
    }

    /// Marks a column that needs no reflection as finished.
    pub fn skip(&mut self, j: usize, row: usize) {
        self.done.push((j, row));
    }

    /// Reduces the permuted diagonal working matrix to `I_{n,m}` and returns the
    /// residual `(phases, rows before the final permutation)`.
    pub fn finish_perm_diag(&mut self, opts: &SspOptions) -> Result<(Vec<Amplitude>, Vec<usize>), MethodError> {
        let gates = perm_diag_pivot(&self.work, opts)?;
        self.emit_monomial(gates);
        self.finish_top_block()
    }

    /// For a working matrix `I_{n,m} Pi_m Delta_m`: emits the `m`-qubit
    /// permutation and diagonal.
    pub fn finish_top_block(&mut self) -> Result<(Vec<Amplitude>, Vec<usize>), MethodError> {
        let (n, m) = (self.total(), self.work.m() as usize);
        let cols = self.work.n_cols();
        let (rows, phases) = monomial_columns(&self.work)?;
        if rows.iter().any(|&r| r >= cols) {
            return Err(MethodError::NotPermutedDiagonal("entries outside the top block".into()));
        }
        let qubits: Vec<usize> = (n - m..n).collect();
        if m > 0 && rows.iter().enumerate().any(|(j, &r)| r != j) {
            let mut map = vec![0; cols];
            for (j, &r) in rows.iter().enumerate() {
                map[r] = j;
            }
            self.emit_monomial(vec![Gate::Permutation {
                qubits: qubits.clone(),
                map,
            }]);
        }
        if phases.iter().any(|p| (p - ONE).norm() > PHASE_TOL) {
            let g = if m == 0 {
                let p = phases[0].conj();
                Gate::Single {
                    target: 0,
                    matrix: [[p, ZERO], [ZERO, p]],
                }
            } else {
                Gate::Diagonal {
                    qubits,
                    phases: phases.iter().map(|p| p.conj()).collect(),
                }
            };
            self.emit_monomial(vec![g]);
        }
        Ok((phases, rows))
    }

    /// Circuit `G^dagger` on the working frame.
    pub fn circuit(&self) -> StructuredCircuit {
        let mut c = StructuredCircuit::new(self.total());
        c.extend(self.forward.iter().rev().map(Gate::dagger));
        c
    }
}

/// Row and phase of every column of a monomial isometry.
fn monomial_columns(w: &SparseIsometry) -> Result<(Vec<usize>, Vec<Amplitude>), MethodError> {
    let mut rows = Vec::with_capacity(w.n_cols());
    let mut phases = Vec::with_capacity(w.n_cols());
    for j in 0..w.n_cols() {
        let col = w.col(j);
        let (&r, &a) = col
            .iter()
            .next()
            .filter(|_| col.len() == 1)
            .ok_or_else(|| MethodError::NotPermutedDiagonal(format!("column {j} has {} nonzeros", col.len())))?;
        if (a.norm() - 1.0).abs() > ISOMETRY_TOL {
            return Err(MethodError::NotPermutedDiagonal(format!("column {j} has modulus {}", a.norm())));
        }
        rows.push(r);
        phases.push(a / a.norm());
    }
    Ok((rows, phases))
}

/// Pivot gates moving the rows of a permuted diagonal isometry into the top
/// `2^m` rows (register = the last `m` qubits).
fn perm_diag_pivot(w: &SparseIsometry, _opts: &SspOptions) -> Result<Vec<Gate>, MethodError> {
    let (rows, _) = monomial_columns(w)?;
    let (n, m) = (w.n() as usize, w.m() as usize);
    let split = QubitSplitting::trailing(n, m);
    let mut counts = std::collections::BTreeMap::new();
    for &r in &rows {
        *counts.entry(split.block_of(r)).or_insert(0usize) += 1;
    }
    let block = counts
        .into_iter()
        .fold((0, 0), |best, (b, c)| if c > best.0 { (c, b) } else { best })
        .1;
    Ok(pivot_plan(&rows, &split, block)?.gates_to_zero_block())
}

/// Forward gates `G` with `G W = I_{n,m}` for `W = Pi_n I_{n,m} Delta_m`.
pub fn perm_diag_reduce(w: &SparseIsometry, opts: &SspOptions) -> Result<Vec<Gate>, MethodError> {
    let mut r = Reducer::new(w.clone());
    r.finish_perm_diag(opts)?;
    Ok(r.forward)
}

/// Circuit implementing a permuted diagonal isometry.
pub fn perm_diag_circuit(
    w: &SparseIsometry,
    regime: AncillaRegime,
    opts: &SspOptions,
) -> Result<DecompositionResult, MethodError> {
    let mut r = Reducer::new(w.clone());
    let (phases, perm) = r.finish_perm_diag(opts)?;
    finish(r, regime, phases, perm, vec![])
}

pub(crate) fn finish(
    r: Reducer,
    regime: AncillaRegime,
    residual_phases: Vec<Amplitude>,
    residual_permutation: Vec<usize>,
    ancillas: Vec<AncillaKind>,
) -> Result<DecompositionResult, MethodError> {
    let mut circuit = r.circuit();
    if !ancillas.is_empty() {
        let n = circuit.n - ancillas.len();
        // the working frame has the ancillas on top; circuits keep them last
        let a = ancillas.len();
        let relabel = |q: usize| if q < a { n + q } else { q - a };
        let gates = circuit.gates.iter().map(|g| g.relabel(relabel)).collect();
        circuit = StructuredCircuit::with_ancillas(n, ancillas);
        circuit.gates = gates;
    }
    circuit.validate()?;
    let audit = audit_circuit(&circuit, regime)?;
    Ok(DecompositionResult {
        circuit,
        audit,
        trace: r.trace,
        residual_phases,
        residual_permutation,
    })
}

pub(crate) fn check_isometry(w: &SparseIsometry) -> Result<(), MethodError> {
    w.validate_isometry(ISOMETRY_TOL).map_err(MethodError::NotIsometry)
}

/// Register size for a Householder vector with `nnz` nonzeros.
pub(crate) fn register_size(nnz: usize) -> usize {
    ceil_log2(nnz) as usize
}
