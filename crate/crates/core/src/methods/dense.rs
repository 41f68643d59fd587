//! Dense Householder decompositions.

use std::f64::consts::PI;

use super::{check_isometry, finish, DecompositionResult, MethodError, Reducer};
use crate::costs::AncillaRegime;
use crate::gates::Gate;
use crate::householder::reflection_to_basis;
use crate::numerics::{DenseMatrix, SparseIsometry, SparseState};

/// Reduces column `c` onto row `c` with a reflection whose vector lives on the
/// qubits `first..n` inside the subspace where qubits `0..first` are all 1.
fn reduce_in_subspace(r: &mut Reducer, n: usize, first: usize, c: usize) -> Result<(), MethodError> {
    let base = (1usize << n) - (1usize << (n - first));
    let w = r.work.column_state(c);
    let spec = reflection_to_basis(&w, c)?;
    let mut local = SparseState::new((n - first) as u32);
    for (&k, &a) in &spec.u.entries {
        debug_assert!(k >= base);
        local.entries.insert(k - base, a);
    }
    let qubits: Vec<usize> = (first..n).collect();
    let gates = vec![
        Gate::SpBlock {
            qubits: qubits.clone(),
            state: local.clone(),
            inverted: true,
        },
        Gate::H0Phase {
            qubits: (0..n).collect(),
            phi: PI,
        },
        Gate::SpBlock {
            qubits,
            state: local,
            inverted: false,
        },
    ];
    r.reflect(c, c, n - first, true, gates, &[])
}

/// Column-by-column reduction of a dense isometry with standard reflections
/// on all `n` qubits, finished by a diagonal on the last `m` qubits.
pub fn dense_householder_iso(v: &DenseMatrix, regime: AncillaRegime) -> Result<DecompositionResult, MethodError> {
    let w = SparseIsometry::from_dense(v)?;
    check_isometry(&w)?;
    let n = w.n() as usize;
    let mut r = Reducer::new(w);
    for c in 0..r.work.n_cols() {
        if r.is_reduced(c, c) {
            r.skip(c, c);
            continue;
        }
        reduce_in_subspace(&mut r, n, 0, c)?;
    }
    let (phases, perm) = r.finish_top_block()?;
    finish(r, regime, phases, perm, vec![])
}

/// Unitary decomposition by recursive halving: level `k` reduces the next
/// `2^{n-k-1}` columns inside the subspace where the first `k` qubits are 1,
/// so only the `H_0` gates see those qubits (through X conjugation). A final
/// `n`-qubit diagonal removes the remaining phases.
pub fn dense_householder_unitary(u: &DenseMatrix, regime: AncillaRegime) -> Result<DecompositionResult, MethodError> {
    let w = SparseIsometry::from_dense(u)?;
    check_isometry(&w)?;
    let (n, m) = (w.n() as usize, w.m() as usize);
    if n != m || n == 0 {
        return Err(MethodError::TooFewQubits {
            needed: 1,
            got: m as u32,
        });
    }
    let mut r = Reducer::new(w);
    let dim = 1usize << n;
    for k in 0..n {
        let base = dim - (dim >> k);
        let cols: Vec<usize> = (base..base + (dim >> (k + 1))).collect();
        let pending: Vec<usize> = cols.iter().copied().filter(|&c| !r.is_reduced(c, c)).collect();
        for &c in cols.iter().filter(|c| !pending.contains(c)) {
            r.skip(c, c);
        }
        if pending.is_empty() {
            continue;
        }
        let flips: Vec<Gate> = (0..k).map(Gate::x).collect();
        r.forward.extend(flips.iter().cloned());
        for c in pending {
            reduce_in_subspace(&mut r, n, k, c)?;
        }
        r.forward.extend(flips);
    }
    let (phases, perm) = r.finish_top_block()?;
    finish(r, regime, phases, perm, vec![])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::bounds;
    use crate::gates::{equivalent, EquivalenceMode};
    use crate::random::{random_isometry, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check(c: &DecompositionResult, target: &DenseMatrix) {
        let e = equivalent(&c.circuit, target, &EquivalenceMode::Exact, 1e-9).unwrap();
        assert!(e.ok, "residual {}", e.residual);
        assert_eq!(c.confinement_violations(), 0);
        assert!(c.trace.iter().all(|s| s.disturbed_columns == 0));
    }

    #[test]
    fn identity_needs_no_reflections() {
        let v = DenseMatrix::identity_isometry(4, 2);
        let r = dense_householder_iso(&v, AncillaRegime::Dirty(1)).unwrap();
        assert!(r.circuit.is_empty());
        check(&r, &v);
        let u = DenseMatrix::identity(8);
        assert!(dense_householder_unitary(&u, AncillaRegime::Dirty(1)).unwrap().circuit.is_empty());
    }

    #[test]
    fn random_isometries_are_reproduced() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for (n, m) in [(3, 2), (3, 0), (4, 1), (2, 2)] {
            let v = random_isometry(n, m, &mut rng);
            check(&dense_householder_iso(&v, AncillaRegime::Dirty(1)).unwrap(), &v);
        }
    }

    #[test]
    fn dense_iso_meets_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for (m, n) in [(2, 5), (1, 5), (3, 6), (2, 6)] {
            let v = random_isometry(n, m, &mut rng);
            let r = dense_householder_iso(&v, AncillaRegime::Dirty(1)).unwrap();
            check(&r, &v);
            let bound = bounds::dense_iso(m as usize, n as usize).ceil();
            assert!(r.audit.total as f64 <= bound, "m={m} n={n}: {} > {bound}", r.audit.total);
        }
    }

    #[test]
    fn random_unitaries_are_reproduced() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for n in [1, 2, 3, 5] {
            let u = random_unitary(n, &mut rng);
            let r = dense_householder_unitary(&u, AncillaRegime::Dirty(1)).unwrap();
            check(&r, &u);
            if n == 5 {
                let bound = bounds::dense_unitary(5);
                assert!(r.audit.total as f64 <= bound, "{} > {bound}", r.audit.total);
            }
        }
    }
}
