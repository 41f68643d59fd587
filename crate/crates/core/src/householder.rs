//! Standard and generalized Householder reflections between pairs of states,
//! and the in-place column reduction of a sparse isometry.
//!
//! A generalized reflection of phase `phi` about a unit vector `u` is
//! `I + (e^{i phi} - 1)|u><u|`; the standard reflection is the case
//! `phi = pi`. Reducing column `j` of an isometry `V` to row `i` with the
//! standard reflection mapping `V|j>` to `e^{i theta}|i>` changes entry
//! `(s, t)` (with `s != i`, `t != j`) by
//! `e^{-i theta} V[s,j] V[i,t] / (1 + |V[i,j]|)`, so an entry can only change
//! when both `V[i,t]` and `V[s,j]` are nonzero.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::numerics::{
    arg0, cis, Amplitude, DenseMatrix, NumericsError, SparseIsometry, SparseState, ONE, ZERO,
    ZERO_TOL,
};

/// Threshold on `|z|` below which a generalized reflection is replaced by the identity.
pub const DEGENERATE_TOL: f64 = 1e-8;

const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HouseholderError {
    #[error("input state has norm {0}, expected 1")]
    NonUnit(f64),
    #[error("states live on different numbers of qubits ({0} vs {1})")]
    QubitMismatch(u32, u32),
    #[error("column {0} is zero")]
    ZeroColumn(usize),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// A reflection `I + (e^{i phi} - 1)|u><u|`.
#[derive(Debug, Clone, PartialEq)]
pub struct HouseholderSpec {
    pub u: SparseState,
    pub phi: f64,
    /// Phase of the image: the reflection maps `v` to `e^{i theta} w`.
    pub theta: f64,
    pub standard: bool,
    /// `1 - e^{i theta} <v|w>`, kept for diagnostics.
    pub z: Amplitude,
}

impl HouseholderSpec {
    fn coeff(&self) -> Amplitude {
        cis(self.phi) - ONE
    }

    pub fn apply(&self, x: &SparseState) -> SparseState {
        let proj = self.u.inner(x) * self.coeff();
        let mut out = x.clone();
        for (&k, &uk) in &self.u.entries {
            let e = out.entries.entry(k).or_insert(ZERO);
            *e += proj * uk;
        }
        out.entries.retain(|_, a| a.norm() > ZERO_TOL);
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let dim = 1usize << self.u.n;
        let mut h = DenseMatrix::identity(dim);
        let c = self.coeff();
        for (&a, &ua) in &self.u.entries {
            for (&b, &ub) in &self.u.entries {
                h[(a, b)] += c * ua * ub.conj();
            }
        }
        h
    }
}

/// Result of [`generalized_pair_reflection`].
#[derive(Debug, Clone, PartialEq)]
pub enum GeneralizedReflection {
    /// `v` and `w` coincide up to `residual = ||v - w||`; no gate is needed.
    Identity { residual: f64 },
    Reflection(HouseholderSpec),
}

fn check_pair(v: &SparseState, w: &SparseState) -> Result<(), HouseholderError> {
    if v.n != w.n {
        return Err(HouseholderError::QubitMismatch(v.n, w.n));
    }
    for s in [v, w] {
        let nrm = s.norm();
        if (nrm - 1.0).abs() > UNIT_TOL {
            return Err(HouseholderError::NonUnit(nrm));
        }
    }
    Ok(())
}

/// `(v - scale * w) / ||v - scale * w||`, or `None` when the difference vanishes.
fn normalized_difference(v: &SparseState, w: &SparseState, scale: Amplitude) -> Option<SparseState> {
    let mut diff = v.clone();
    for (&k, &wk) in &w.entries {
        *diff.entries.entry(k).or_insert(ZERO) -= scale * wk;
    }
    diff.entries.retain(|_, a| a.norm() > ZERO_TOL);
    let nrm = diff.norm();
    if nrm <= ZERO_TOL {
        return None;
    }
    diff.entries.values_mut().for_each(|a| *a /= nrm);
    Some(diff)
}

/// Standard reflection `H_u` with `H_u v = e^{i theta} w`.
///
/// `theta = pi - arg(<v|w>)`, or 0 when the states are orthogonal, which keeps
/// `z = 1 + |<v|w>|` away from zero.
pub fn standard_pair_reflection(
    v: &SparseState,
    w: &SparseState,
) -> Result<HouseholderSpec, HouseholderError> {
    check_pair(v, w)?;
    let ip = v.inner(w);
    let theta = if ip.norm() <= ZERO_TOL {
        0.0
    } else {
        PI - ip.arg()
    };
    let z = ONE - cis(theta) * ip;
    let u = normalized_difference(v, w, cis(theta))
        .expect("z >= 1 keeps the difference away from zero");
    Ok(HouseholderSpec {
        u,
        phi: PI,
        theta,
        standard: true,
        z,
    })
}

/// Generalized reflection with `H v = w` exactly (`theta = 0`).
///
/// When `|1 - <v|w>|` falls below [`DEGENERATE_TOL`] the rotation is dropped
/// and the residual `||v - w||` is reported instead.
pub fn generalized_pair_reflection(
    v: &SparseState,
    w: &SparseState,
) -> Result<GeneralizedReflection, HouseholderError> {
    check_pair(v, w)?;
    let z = ONE - v.inner(w);
    let residual = {
        let mut d = v.clone();
        for (&k, &wk) in &w.entries {
            *d.entries.entry(k).or_insert(ZERO) -= wk;
        }
        d.norm()
    };
    if z.norm() <= DEGENERATE_TOL {
        return Ok(GeneralizedReflection::Identity { residual });
    }
    let Some(u) = normalized_difference(v, w, ONE) else {
        return Ok(GeneralizedReflection::Identity { residual });
    };
    // e^{i phi} = -z / conj(z); recomputing z from u avoids the cancellation in 1 - <v|w>.
    let z_stable = u.inner(v) * residual;
    let mut phi = PI + 2.0 * arg0(z_stable.conj());
    phi = wrap_phase(phi);
    Ok(GeneralizedReflection::Reflection(HouseholderSpec {
        u,
        phi,
        theta: 0.0,
        standard: false,
        z,
    }))
}

/// Maps `phi` into `(-pi, pi]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    p
}

/// Standard reflection sending `w` to `e^{i theta}|target>` with
/// `theta = pi + arg(<target|w>)`.
pub fn reflection_to_basis(w: &SparseState, target: usize) -> Result<HouseholderSpec, HouseholderError> {
    let nrm = w.norm();
    if (nrm - 1.0).abs() > UNIT_TOL {
        return Err(HouseholderError::NonUnit(nrm));
    }
    let a = w.get(target);
    let theta = PI + arg0(a);
    let z = Complex64::new(1.0 + a.norm(), 0.0);
    let u = normalized_difference(w, &SparseState::basis(w.n, target), cis(theta))
        .expect("1 + |a| >= 1 keeps the difference away from zero");
    Ok(HouseholderSpec {
        u,
        phi: PI,
        theta,
        standard: true,
        z,
    })
}

/// Bookkeeping of one column reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionRecord {
    pub target_row: usize,
    pub source_col: usize,
    pub theta: f64,
    /// Entries `(s, t)` with `s != i`, `t != j` whose value was recomputed.
    pub modified: Vec<(usize, usize)>,
    /// Subset of `modified` that was zero before the reduction.
    pub fill_in: Vec<(usize, usize)>,
    /// Rows of column `j` that were zeroed.
    pub eliminated: Vec<usize>,
    /// Columns of row `i` zeroed by orthogonality.
    pub orthogonal: Vec<usize>,
    /// Nonzeros of the reduced column before the reduction.
    pub column_nnz: usize,
}

/// Applies the standard reflection reducing column `j` to `e^{i theta}|i>` in place.
pub fn reduce_column(
    w: &mut SparseIsometry,
    j: usize,
    i: usize,
) -> Result<ReductionRecord, HouseholderError> {
    if i >= w.n_rows() || j >= w.n_cols() {
        return Err(NumericsError::IndexOutOfRange {
            row: i,
            col: j,
            rows: w.n_rows(),
            cols: w.n_cols(),
        }
        .into());
    }
    let column: Vec<(usize, Amplitude)> = w.col(j).iter().map(|(&s, &a)| (s, a)).collect();
    if column.is_empty() {
        return Err(HouseholderError::ZeroColumn(j));
    }
    let pivot = w.get(i, j);
    let theta = PI + arg0(pivot);
    let scale = cis(-theta) / (1.0 + pivot.norm());
    let row: Vec<(usize, Amplitude)> = w
        .row(i)
        .iter()
        .filter(|(&t, _)| t != j)
        .map(|(&t, &a)| (t, a))
        .collect();

    let mut modified = Vec::new();
    let mut fill_in = Vec::new();
    for &(s, v_sj) in column.iter().filter(|(s, _)| *s != i) {
        for &(t, v_it) in &row {
            let old = w.get(s, t);
            if old.norm() <= ZERO_TOL {
                fill_in.push((s, t));
            }
            w.set(s, t, old + scale * v_sj * v_it)?;
            modified.push((s, t));
        }
    }
    let mut eliminated = Vec::new();
    for &(s, _) in &column {
        if s != i {
            w.set(s, j, ZERO)?;
            eliminated.push(s);
        }
    }
    let mut orthogonal = Vec::new();
    for &(t, _) in &row {
        w.set(i, t, ZERO)?;
        orthogonal.push(t);
    }
    w.set(i, j, cis(theta))?;
    Ok(ReductionRecord {
        target_row: i,
        source_col: j,
        theta,
        modified,
        fill_in,
        eliminated,
        orthogonal,
        column_nnz: column.len(),
    })
}

/// True iff reducing column `j` to row `i` may change entry `(s, t)`.
pub fn fill_in_predicate(w: &SparseIsometry, i: usize, j: usize, s: usize, t: usize) -> bool {
    w.is_nonzero(i, t) && w.is_nonzero(s, j)
}
