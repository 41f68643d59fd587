//! Seeded generators for test and benchmark inputs.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::numerics::{norm, Amplitude, DenseMatrix, SparseIsometry, SparseState};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Amplitude {
    Amplitude::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Uniform sample from the unit disc of the complex plane, kept away from 0.
pub fn unit_disc<R: Rng + ?Sized>(rng: &mut R) -> Amplitude {
    loop {
        let r = rng.random::<f64>().sqrt();
        if r > 1e-6 {
            return Amplitude::from_polar(r, rng.random_range(0.0..2.0 * PI));
        }
    }
}

/// Haar-random dense state on `n` qubits.
pub fn random_state<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Vec<Amplitude> {
    let mut v: Vec<Amplitude> = (0..1usize << n).map(|_| gaussian(rng)).collect();
    let nrm = norm(&v);
    v.iter_mut().for_each(|a| *a /= nrm);
    v
}

/// State with `nnz` nonzeros at uniformly random positions.
pub fn random_sparse_state<R: Rng + ?Sized>(n: u32, nnz: usize, rng: &mut R) -> SparseState {
    let dim = 1usize << n;
    assert!(nnz >= 1 && nnz <= dim, "nnz must lie in 1..=2^n");
    let mut s = SparseState::new(n);
    for k in rand::seq::index::sample(rng, dim, nnz) {
        s.entries.insert(k, unit_disc(rng));
    }
    let nrm = s.norm();
    s.entries.values_mut().for_each(|a| *a /= nrm);
    s
}

/// Haar-like dense isometry from `m` to `n` qubits (Gram-Schmidt on Gaussian columns).
pub fn random_isometry<R: Rng + ?Sized>(n: u32, m: u32, rng: &mut R) -> DenseMatrix {
    assert!(m <= n);
    let dim = 1usize << n;
    let mut cols: Vec<Vec<Amplitude>> = Vec::new();
    while cols.len() < 1usize << m {
        let mut v: Vec<Amplitude> = (0..dim).map(|_| gaussian(rng)).collect();
        for _ in 0..2 {
            for c in &cols {
                let ip = crate::numerics::inner(c, &v);
                v.iter_mut().zip(c).for_each(|(x, y)| *x -= ip * y);
            }
        }
        let nrm = norm(&v);
        if nrm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= nrm);
            cols.push(v);
        }
    }
    DenseMatrix::from_columns(&cols).expect("power-of-two shape")
}

pub fn random_unitary<R: Rng + ?Sized>(n: u32, rng: &mut R) -> DenseMatrix {
    random_isometry(n, n, rng)
}

/// Sparse isometry obtained from `I_{n,m}` by `rotations` random two-row
/// rotations followed by random row and column shuffles.
pub fn random_sparse_isometry<R: Rng + ?Sized>(
    n: u32,
    m: u32,
    rotations: usize,
    rng: &mut R,
) -> SparseIsometry {
    let rows = 1usize << n;
    let mut w = SparseIsometry::identity(n, m);
    for _ in 0..rotations {
        let i = rng.random_range(0..rows);
        let mut k = rng.random_range(0..rows - 1);
        if k >= i {
            k += 1;
        }
        let t = rng.random_range(0.2..PI / 2.0 - 0.2);
        let c = t.cos();
        let s = Amplitude::from_polar(t.sin(), rng.random_range(0.0..2.0 * PI));
        let cols: std::collections::BTreeSet<usize> =
            w.row(i).keys().chain(w.row(k).keys()).copied().collect();
        for j in cols {
            let (a, b) = (w.get(i, j), w.get(k, j));
            w.set(i, j, c * a - s.conj() * b).expect("in range");
            w.set(k, j, s * a + c * b).expect("in range");
        }
    }
    let mut rho: Vec<usize> = (0..rows).collect();
    rho.shuffle(rng);
    let mut sigma: Vec<usize> = (0..1usize << m).collect();
    sigma.shuffle(rng);
    w.apply_permutations(&rho, &sigma).expect("bijections")
}

/// `Pi I_{n,m} Delta`: one unit-modulus entry per column in distinct random rows.
pub fn random_permuted_diagonal<R: Rng + ?Sized>(n: u32, m: u32, rng: &mut R) -> SparseIsometry {
    let mut w = SparseIsometry::new(n, m);
    let rows = rand::seq::index::sample(rng, 1usize << n, 1usize << m);
    for (j, i) in rows.into_iter().enumerate() {
        w.set(i, j, Amplitude::from_polar(1.0, rng.random_range(-PI..PI)))
            .expect("in range");
    }
    w
}

/// Dense vector with the given support and random values, normalized.
pub fn state_on_support<R: Rng + ?Sized>(n: u32, support: &[usize], rng: &mut R) -> SparseState {
    assert!(!support.is_empty(), "support must be nonempty");
    let mut s = SparseState::new(n);
    for &k in support {
        s.entries.insert(k, unit_disc(rng));
    }
    let nrm = s.norm();
    s.entries.values_mut().for_each(|a| *a /= nrm);
    s
}
