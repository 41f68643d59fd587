//! Sparse Householder decompositions: elimination strategies, the fixed
//! envelope variant and the no-fill-in variant with a clean ancilla.

use super::{
    check_isometry, finish, householder_up_to, reflection_core, register_size, DecompositionResult,
    MethodError, Reducer,
};
use crate::costs::AncillaRegime;
use crate::gates::{AncillaKind, Gate};
use crate::householder::reflection_to_basis;
use crate::numerics::{SparseIsometry, SparseState};
use crate::ordering::{envelope, EliminationStrategy};
use crate::pivoting::SspOptions;

/// Reduces column `j` onto current row `row` with a pivoted reflection.
fn pivoted_step(r: &mut Reducer, j: usize, row: usize, opts: &SspOptions) -> Result<(), MethodError> {
    if r.is_reduced(j, row) {
        r.skip(j, row);
        return Ok(());
    }
    let w = r.work.column_state(j);
    let spec = reflection_to_basis(&w, row)?;
    let up = householder_up_to(&spec.u, opts)?;
    let s = up.s;
    r.reflect(j, row, s, true, up.gates, &up.residual)
}

/// Sparse Householder decomposition under an elimination strategy: step `k`
/// reduces the column with `sigma[j] = k` onto the current image of the row
/// with `rho[i] = k`. Ends with the permuted diagonal reduction.
pub fn sparse_householder_iso(
    w: &SparseIsometry,
    strategy: &EliminationStrategy,
    regime: AncillaRegime,
    opts: &SspOptions,
) -> Result<DecompositionResult, MethodError> {
    check_isometry(w)?;
    strategy
        .validate(w.n_rows(), w.n_cols())
        .map_err(MethodError::Strategy)?;
    let mut r = Reducer::new(w.clone());
    for (j, i) in strategy.steps() {
        let row = r.current_row(i);
        pivoted_step(&mut r, j, row, opts)?;
    }
    let (phases, perm) = r.finish_perm_diag(opts)?;
    finish(r, regime, phases, perm, vec![])
}

/// Fixed-envelope decomposition: after the row permutation, each column is
/// reduced onto row 0 by a reflection whose vector lies in the top
/// `2^{s(k)}` rows (no pivoting), followed by a decrement of the whole register.
pub fn fixed_envelope_iso(
    w: &SparseIsometry,
    strategy: &EliminationStrategy,
    regime: AncillaRegime,
    _opts: &SspOptions,
) -> Result<DecompositionResult, MethodError> {
    check_isometry(w)?;
    strategy
        .validate(w.n_rows(), w.n_cols())
        .map_err(MethodError::Strategy)?;
    let (n, m) = (w.n() as usize, w.m() as usize);
    let env = envelope(&w.apply_permutations(&strategy.rho, &strategy.sigma)?);
    let mut r = Reducer::new(w.clone());
    if strategy.rho.iter().enumerate().any(|(i, &p)| i != p) {
        r.emit_monomial(vec![Gate::Permutation {
            qubits: (0..n).collect(),
            map: strategy.rho.clone(),
        }]);
    }
    let dec = Gate::Decrement {
        qubits: (0..n).collect(),
        inverse: false,
    };
    for (k, (j, _)) in strategy.steps().into_iter().enumerate() {
        let s = register_size(1 + env.env[k] - k);
        if r.is_reduced(j, 0) {
            r.skip(j, 0);
        } else {
            let spec = reflection_to_basis(&r.work.column_state(j), 0)?;
            let confined = spec.u.support().all(|x| x < 1usize << s);
            // a vector outside the envelope is still prepared exactly, on
            // enough trailing qubits
            let s_used = if confined {
                s
            } else {
                register_size(spec.u.support().max().expect("nonzero") + 1)
            };
            let mut local = SparseState::new(s_used as u32);
            local.entries = spec.u.entries.clone();
            let register: Vec<usize> = (n - s_used..n).collect();
            let gates = reflection_core(&register, local, n);
            r.reflect(j, 0, s, confined, gates, &[])?;
        }
        r.emit_monomial(vec![dec.clone()]);
    }
    if n > m {
        r.emit_monomial((0..n - m).map(Gate::x).collect());
    }
    let (phases, perm) = r.finish_top_block()?;
    finish(r, regime, phases, perm, vec![])
}

/// No-fill-in decomposition: the input is embedded as the top half of an
/// isometry on `n + 1` qubits, and column `i` is reduced onto the zero row
/// `2^n + i`, which leaves every other column untouched. The extra top qubit
/// becomes a clean ancilla of the returned circuit (qubit `n`).
pub fn no_fill_in_iso(
    w: &SparseIsometry,
    regime: AncillaRegime,
    opts: &SspOptions,
) -> Result<DecompositionResult, MethodError> {
    check_isometry(w)?;
    let big = w.embed_top();
    let half = w.n_rows();
    let mut r = Reducer::new(big);
    for j in 0..w.n_cols() {
        let row = r.current_row(half + j);
        pivoted_step(&mut r, j, row, opts)?;
    }
    let (phases, perm) = r.finish_perm_diag(opts)?;
    finish(r, regime, phases, perm, vec![AncillaKind::Clean])
}
