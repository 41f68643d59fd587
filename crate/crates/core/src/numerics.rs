//! Complex vectors and matrices used throughout the synthesis pipeline.
//!
//! Two representations are provided: [`DenseMatrix`], a row-major complex
//! matrix used for verification and small instances, and [`SparseIsometry`],
//! a dual-indexed sparse matrix (one ordered map per row and one per column)
//! that the Householder reductions operate on in place.
//!
//! Basis indices are interpreted as bitstrings `b_1 b_2 ... b_n` with `b_1`
//! the most significant bit, so qubit `q` of an `n`-qubit register is bit
//! `n - 1 - q` of the index.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

/// A complex probability amplitude.
pub type Amplitude = Complex64;

/// Magnitude at or below which an amplitude is treated as zero.
pub const ZERO_TOL: f64 = 1e-12;

pub const ZERO: Amplitude = Complex64::new(0.0, 0.0);
pub const ONE: Amplitude = Complex64::new(1.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("matrix has fewer rows ({rows}) than columns ({cols})")]
    RowsLessThanCols { rows: usize, cols: usize },
    #[error("index ({row}, {col}) out of range for a {rows}x{cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("permutation of length {len} is not a bijection on {expected} indices")]
    NotBijection { len: usize, expected: usize },
    #[error("not an isometry: |(M^dag M - I)[{row}, {col}]| = {deviation:e}")]
    NotIsometry {
        row: usize,
        col: usize,
        deviation: f64,
    },
    #[error("non-finite amplitude at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("vector length {0} does not match the expected dimension {1}")]
    LengthMismatch(usize, usize),
}

/// Phase of `z`, with `arg(0) = 0`.
pub fn arg0(z: Amplitude) -> f64 {
    if z.norm() <= ZERO_TOL {
        0.0
    } else {
        z.arg()
    }
}

/// Unit-modulus complex number `e^{i phi}`.
pub fn cis(phi: f64) -> Amplitude {
    Complex64::from_polar(1.0, phi)
}

pub fn log2_exact(dim: usize) -> Result<u32, NumericsError> {
    if dim.is_power_of_two() {
        Ok(dim.trailing_zeros())
    } else {
        Err(NumericsError::NotPowerOfTwo(dim))
    }
}

/// `ceil(log2(x))` for `x >= 1`, and 0 for `x <= 1`.
pub fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

/// Checks that `perm` is a bijection on `0..len`.
pub fn check_bijection(perm: &[usize], len: usize) -> Result<(), NumericsError> {
    let err = NumericsError::NotBijection {
        len: perm.len(),
        expected: len,
    };
    if perm.len() != len {
        return Err(err);
    }
    let mut seen = vec![false; len];
    for &p in perm {
        if p >= len || seen[p] {
            return Err(err);
        }
        seen[p] = true;
    }
    Ok(())
}

pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

pub fn norm(v: &[Amplitude]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// `<a|b>`, conjugate-linear in the first argument.
pub fn inner(a: &[Amplitude], b: &[Amplitude]) -> Amplitude {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Amplitude>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// `I_{n,m}`: the first `2^m` columns of the `n`-qubit identity.
    pub fn identity_isometry(n: u32, m: u32) -> Self {
        let mut out = Self::zeros(1 << n, 1 << m);
        for i in 0..(1usize << m) {
            out[(i, i)] = ONE;
        }
        out
    }

    pub fn from_rows(rows: Vec<Vec<Amplitude>>) -> Result<Self, NumericsError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(NumericsError::LengthMismatch(row.len(), c));
            }
            data.extend(row);
        }
        Ok(Self {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn from_columns(cols: &[Vec<Amplitude>]) -> Result<Self, NumericsError> {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        let mut out = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            if col.len() != r {
                return Err(NumericsError::LengthMismatch(col.len(), r));
            }
            for (i, &a) in col.iter().enumerate() {
                out[(i, j)] = a;
            }
        }
        Ok(out)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> Vec<Amplitude> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> &[Amplitude] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Output and input qubit counts `(n, m)`.
    pub fn qubits(&self) -> Result<(u32, u32), NumericsError> {
        Ok((log2_exact(self.rows)?, log2_exact(self.cols)?))
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Amplitude]) -> Vec<Amplitude> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Frobenius norm of `self - other`.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Checks `max |(M^dag M - I)_{jk}| <= tol` and reports the worst entry.
    pub fn validate_isometry(&self, tol: f64) -> Result<(), NumericsError> {
        log2_exact(self.rows)?;
        log2_exact(self.cols)?;
        if self.rows < self.cols {
            return Err(NumericsError::RowsLessThanCols {
                rows: self.rows,
                cols: self.cols,
            });
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if !a.re.is_finite() || !a.im.is_finite() {
                    return Err(NumericsError::NonFinite { row: i, col: j });
                }
            }
        }
        let gram = self.adjoint().matmul(self);
        worst_gram_deviation(self.cols, |j, k| gram[(j, k)], tol)
    }
}

fn worst_gram_deviation(
    dim: usize,
    gram: impl Fn(usize, usize) -> Amplitude,
    tol: f64,
) -> Result<(), NumericsError> {
    let mut worst = (0, 0, 0.0f64);
    for j in 0..dim {
        for k in 0..dim {
            let target = if j == k { ONE } else { ZERO };
            let dev = (gram(j, k) - target).norm();
            if dev > worst.2 {
                worst = (j, k, dev);
            }
        }
    }
    if worst.2 > tol {
        Err(NumericsError::NotIsometry {
            row: worst.0,
            col: worst.1,
            deviation: worst.2,
        })
    } else {
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = Amplitude;
    fn index(&self, (i, j): (usize, usize)) -> &Amplitude {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Amplitude {
        &mut self.data[i * self.cols + j]
    }
}

/// Sparse state on `n` qubits: ordered map from basis index to amplitude.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseState {
    pub n: u32,
    pub entries: BTreeMap<usize, Amplitude>,
}

impl SparseState {
    pub fn new(n: u32) -> Self {
        Self {
            n,
            entries: BTreeMap::new(),
        }
    }

    pub fn basis(n: u32, index: usize) -> Self {
        let mut s = Self::new(n);
        s.entries.insert(index, ONE);
        s
    }

    pub fn from_dense(v: &[Amplitude]) -> Result<Self, NumericsError> {
        let n = log2_exact(v.len())?;
        Ok(Self {
            n,
            entries: v
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm() > ZERO_TOL)
                .map(|(i, &a)| (i, a))
                .collect(),
        })
    }

    pub fn to_dense(&self) -> Vec<Amplitude> {
        let mut out = vec![ZERO; 1 << self.n];
        for (&i, &a) in &self.entries {
            out[i] = a;
        }
        out
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn norm(&self) -> f64 {
        self.entries.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn get(&self, i: usize) -> Amplitude {
        self.entries.get(&i).copied().unwrap_or(ZERO)
    }

    pub fn inner(&self, other: &Self) -> Amplitude {
        self.entries
            .iter()
            .filter_map(|(i, a)| other.entries.get(i).map(|b| a.conj() * b))
            .sum()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }
}

/// Dual-indexed sparse `2^n x 2^m` complex matrix.
///
/// Every nonzero is stored twice, once in the ordered map of its row and once
/// in the ordered map of its column; both views always describe the same
/// entry set. Entries with magnitude at or below [`ZERO_TOL`] are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseIsometry {
    n: u32,
    m: u32,
    rows: Vec<BTreeMap<usize, Amplitude>>,
    cols: Vec<BTreeMap<usize, Amplitude>>,
    nnz: usize,
}

impl SparseIsometry {
    pub fn new(n: u32, m: u32) -> Self {
        Self {
            n,
            m,
            rows: vec![BTreeMap::new(); 1 << n],
            cols: vec![BTreeMap::new(); 1 << m],
            nnz: 0,
        }
    }

    pub fn identity(n: u32, m: u32) -> Self {
        let mut w = Self::new(n, m);
        for i in 0..(1usize << m) {
            w.set(i, i, ONE).expect("in range");
        }
        w
    }

    pub fn from_dense(d: &DenseMatrix) -> Result<Self, NumericsError> {
        let (n, m) = d.qubits()?;
        let mut w = Self::new(n, m);
        for i in 0..d.rows() {
            for j in 0..d.cols() {
                w.set(i, j, d[(i, j)])?;
            }
        }
        Ok(w)
    }

    pub fn from_entries(
        n: u32,
        m: u32,
        entries: impl IntoIterator<Item = (usize, usize, Amplitude)>,
    ) -> Result<Self, NumericsError> {
        let mut w = Self::new(n, m);
        for (i, j, a) in entries {
            w.set(i, j, a)?;
        }
        Ok(w)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows(), self.n_cols());
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, &a) in row {
                d[(i, j)] = a;
            }
        }
        d
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn get(&self, i: usize, j: usize) -> Amplitude {
        self.rows
            .get(i)
            .and_then(|r| r.get(&j))
            .copied()
            .unwrap_or(ZERO)
    }

    pub fn is_nonzero(&self, i: usize, j: usize) -> bool {
        self.rows.get(i).is_some_and(|r| r.contains_key(&j))
    }

    /// Creates, modifies or deletes entry `(i, j)` in both indexes.
    pub fn set(&mut self, i: usize, j: usize, a: Amplitude) -> Result<(), NumericsError> {
        if i >= self.n_rows() || j >= self.n_cols() {
            return Err(NumericsError::IndexOutOfRange {
                row: i,
                col: j,
                rows: self.n_rows(),
                cols: self.n_cols(),
            });
        }
        if !a.re.is_finite() || !a.im.is_finite() {
            return Err(NumericsError::NonFinite { row: i, col: j });
        }
        if a.norm() <= ZERO_TOL {
            if self.rows[i].remove(&j).is_some() {
                self.cols[j].remove(&i);
                self.nnz -= 1;
            }
        } else {
            if self.rows[i].insert(j, a).is_none() {
                self.nnz += 1;
            }
            self.cols[j].insert(i, a);
        }
        Ok(())
    }

    pub fn row(&self, i: usize) -> &BTreeMap<usize, Amplitude> {
        &self.rows[i]
    }

    pub fn col(&self, j: usize) -> &BTreeMap<usize, Amplitude> {
        &self.cols[j]
    }

    pub fn column_state(&self, j: usize) -> SparseState {
        SparseState {
            n: self.n,
            entries: self.cols[j].clone(),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, Amplitude)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |(&j, &a)| (i, j, a)))
    }

    /// Verifies that the row and column indexes describe the same entries.
    pub fn check_consistency(&self) -> bool {
        let mut rebuilt = vec![BTreeMap::new(); self.n_cols()];
        let mut count = 0;
        for (i, j, a) in self.entries() {
            if a.norm() <= ZERO_TOL {
                return false;
            }
            rebuilt[j].insert(i, a);
            count += 1;
        }
        count == self.nnz && rebuilt == self.cols
    }

    pub fn validate_isometry(&self, tol: f64) -> Result<(), NumericsError> {
        if self.n < self.m {
            return Err(NumericsError::RowsLessThanCols {
                rows: self.n_rows(),
                cols: self.n_cols(),
            });
        }
        let dim = self.n_cols();
        let mut gram = vec![ZERO; dim * dim];
        for row in &self.rows {
            for (&j, a) in row {
                for (&k, b) in row {
                    gram[j * dim + k] += a.conj() * b;
                }
            }
        }
        worst_gram_deviation(dim, |j, k| gram[j * dim + k], tol)
    }

    /// Returns the matrix whose entry `(rho[i], sigma[j])` is entry `(i, j)` of `self`.
    pub fn apply_permutations(&self, rho: &[usize], sigma: &[usize]) -> Result<Self, NumericsError> {
        check_bijection(rho, self.n_rows())?;
        check_bijection(sigma, self.n_cols())?;
        let mut out = Self::new(self.n, self.m);
        for (i, j, a) in self.entries() {
            out.set(rho[i], sigma[j], a)?;
        }
        Ok(out)
    }

    /// Applies a monomial row map `i -> (f(i).0, f(i).1 * entry)`; `f` must be a bijection.
    pub fn map_rows(&mut self, f: impl Fn(usize) -> (usize, Amplitude)) {
        let mut out = Self::new(self.n, self.m);
        for (i, j, a) in self.entries() {
            let (r, phase) = f(i);
            out.set(r, j, phase * a).expect("row map stays in range");
        }
        *self = out;
    }

    /// Embeds the matrix as the top block of a matrix on `n + 1` qubits.
    pub fn embed_top(&self) -> Self {
        let mut out = Self::new(self.n + 1, self.m);
        for (i, j, a) in self.entries() {
            out.set(i, j, a).expect("in range");
        }
        out
    }

    /// Boolean nonzero pattern, row by row.
    pub fn pattern(&self) -> Vec<Vec<usize>> {
        self.rows.iter().map(|r| r.keys().copied().collect()).collect()
    }
}
