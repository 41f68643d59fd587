//! Envelopes, elimination strategies and pattern-level elimination.
//!
//! Permutations are forward maps: `rho[i]` is the new position of row `i`, as
//! in [`SparseIsometry::apply_permutations`]. Under a strategy `(rho, sigma)`
//! step `k` reduces the column with `sigma[j] = k` to the row with
//! `rho[i] = k`, which is the identity-order reduction of `Pi_rho W Pi_sigma`.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::numerics::{check_bijection, invert_permutation, NumericsError, SparseIsometry};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EliminationStrategy {
    pub rho: Vec<usize>,
    pub sigma: Vec<usize>,
}

impl EliminationStrategy {
    pub fn identity(rows: usize, cols: usize) -> Self {
        Self {
            rho: (0..rows).collect(),
            sigma: (0..cols).collect(),
        }
    }

    pub fn validate(&self, rows: usize, cols: usize) -> Result<(), NumericsError> {
        check_bijection(&self.rho, rows)?;
        check_bijection(&self.sigma, cols)
    }

    /// `(column, row)` of the original matrix handled at each step.
    pub fn steps(&self) -> Vec<(usize, usize)> {
        let rinv = invert_permutation(&self.rho);
        let cinv = invert_permutation(&self.sigma);
        (0..self.sigma.len()).map(|k| (cinv[k], rinv[k])).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvelopeProfile {
    pub env: Vec<usize>,
    pub ed: i64,
}

/// Boolean sparsity pattern with row and column indices kept in sync.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternMatrix {
    rows: Vec<BTreeSet<usize>>,
    cols: Vec<BTreeSet<usize>>,
}

/// Cell sets touched by one pattern-level reduction, as `(row, col)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StepTrace {
    pub column: usize,
    pub target_row: usize,
    pub column_nnz: usize,
    /// Nonzeros of the reduced column other than the target.
    pub eliminated: Vec<(usize, usize)>,
    /// Nonzeros of the target row in other columns, removed by orthogonality.
    pub orthogonal: Vec<(usize, usize)>,
    /// Entries allowed to change by the fill-in predicate.
    pub changed: Vec<(usize, usize)>,
    /// Entries of `changed` that were zero.
    pub fill_in: Vec<(usize, usize)>,
}

impl PatternMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            rows: vec![BTreeSet::new(); n_rows],
            cols: vec![BTreeSet::new(); n_cols],
        }
    }

    pub fn from_isometry(w: &SparseIsometry) -> Self {
        let mut p = Self::zeros(w.n_rows(), w.n_cols());
        for (i, j, _) in w.entries() {
            p.insert(i, j);
        }
        p
    }

    /// Parses rows written as strings of `0` and nonzero markers, e.g. `"0110"`.
    pub fn from_strings(rows: &[&str]) -> Self {
        let n_cols = rows.first().map_or(0, |r| r.chars().count());
        let mut p = Self::zeros(rows.len(), n_cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.chars().count(), n_cols, "ragged pattern");
            for (j, ch) in r.chars().enumerate() {
                if ch != '0' {
                    p.insert(i, j);
                }
            }
        }
        p
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(BTreeSet::len).sum()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.rows[i].contains(&j)
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        self.rows[i].insert(j);
        self.cols[j].insert(i);
    }

    pub fn remove(&mut self, i: usize, j: usize) {
        self.rows[i].remove(&j);
        self.cols[j].remove(&i);
    }

    pub fn row(&self, i: usize) -> &BTreeSet<usize> {
        &self.rows[i]
    }

    pub fn col(&self, j: usize) -> &BTreeSet<usize> {
        &self.cols[j]
    }

    /// Pattern with entry `(i, j)` moved to `(rho[i], sigma[j])`.
    pub fn permuted(&self, rho: &[usize], sigma: &[usize]) -> Self {
        let mut p = Self::zeros(self.n_rows(), self.n_cols());
        for (i, r) in self.rows.iter().enumerate() {
            for &j in r {
                p.insert(rho[i], sigma[j]);
            }
        }
        p
    }

    /// Moves row `i` to `f(i)`; `f` must be a bijection.
    pub fn map_rows(&mut self, f: impl Fn(usize) -> usize) {
        let old = std::mem::take(&mut self.rows);
        let mut p = Self::zeros(old.len(), self.n_cols());
        for (i, r) in old.iter().enumerate() {
            for &j in r {
                p.insert(f(i), j);
            }
        }
        *self = p;
    }

    /// Structural reduction of column `j` onto row `i`: the column becomes
    /// `e_i`, row `i` is cleared elsewhere, and every `(s, t)` with `(s, j)`
    /// and `(i, t)` nonzero is treated as nonzero afterwards.
    pub fn reduce(&mut self, j: usize, i: usize) -> StepTrace {
        let column: Vec<usize> = self.cols[j].iter().copied().collect();
        let row: Vec<usize> = self.rows[i].iter().copied().filter(|&t| t != j).collect();
        let mut trace = StepTrace {
            column: j,
            target_row: i,
            column_nnz: column.len(),
            ..StepTrace::default()
        };
        for &s in column.iter().filter(|&&s| s != i) {
            for &t in &row {
                trace.changed.push((s, t));
                if !self.contains(s, t) {
                    trace.fill_in.push((s, t));
                    self.insert(s, t);
                }
            }
        }
        for &s in column.iter().filter(|&&s| s != i) {
            self.remove(s, j);
            trace.eliminated.push((s, j));
        }
        for &t in &row {
            self.remove(i, t);
            trace.orthogonal.push((i, t));
        }
        self.insert(i, j);
        trace
    }

    pub fn envelope(&self) -> EnvelopeProfile {
        envelope_of(self.n_cols(), |j| self.cols[j].iter().next_back().copied())
    }
}

fn envelope_of(n_cols: usize, lowest: impl Fn(usize) -> Option<usize>) -> EnvelopeProfile {
    let mut env = Vec::with_capacity(n_cols);
    let mut cur = 0usize;
    let mut ed = 0i64;
    for j in 0..n_cols {
        if let Some(r) = lowest(j) {
            cur = cur.max(r);
        }
        env.push(cur);
        ed += cur as i64 - j as i64;
    }
    EnvelopeProfile { env, ed }
}

/// Envelope and envelope distance of `w`.
pub fn envelope(w: &SparseIsometry) -> EnvelopeProfile {
    envelope_of(w.n_cols(), |j| w.col(j).keys().next_back().copied())
}

/// Row permutation that minimizes the envelope for the given column order:
/// column by column, the remaining rows that are nonzero in the column are
/// moved to the top, keeping ascending original order within each group.
pub fn optimal_row_perm(w: &SparseIsometry) -> Vec<usize> {
    optimal_row_perm_pattern(&PatternMatrix::from_isometry(w))
}

pub fn optimal_row_perm_pattern(p: &PatternMatrix) -> Vec<usize> {
    let mut placed = vec![false; p.n_rows()];
    let mut order = Vec::with_capacity(p.n_rows());
    for j in 0..p.n_cols() {
        for &i in p.col(j) {
            if !placed[i] {
                placed[i] = true;
                order.push(i);
            }
        }
    }
    order.extend((0..p.n_rows()).filter(|&i| !placed[i]));
    invert_permutation(&order)
}

/// Greedy envelope ordering: repeatedly take the remaining column with the
/// fewest nonzeros in the remaining rows (ties to the smaller index) and
/// place its rows next. Column counts live in a lazily updated min-heap.
pub fn greedy_order(w: &SparseIsometry) -> EliminationStrategy {
    greedy_order_pattern(&PatternMatrix::from_isometry(w))
}

pub fn greedy_order_pattern(p: &PatternMatrix) -> EliminationStrategy {
    let (nr, nc) = (p.n_rows(), p.n_cols());
    let mut count: Vec<usize> = (0..nc).map(|j| p.col(j).len()).collect();
    let mut heap: BinaryHeap<Reverse<(usize, usize)>> =
        (0..nc).map(|j| Reverse((count[j], j))).collect();
    let mut col_done = vec![false; nc];
    let mut row_done = vec![false; nr];
    let mut col_order = Vec::with_capacity(nc);
    let mut row_order = Vec::with_capacity(nr);
    while let Some(Reverse((c, j))) = heap.pop() {
        if col_done[j] || c != count[j] {
            continue;
        }
        col_done[j] = true;
        col_order.push(j);
        for &i in p.col(j) {
            if row_done[i] {
                continue;
            }
            row_done[i] = true;
            row_order.push(i);
            for &t in p.row(i) {
                if !col_done[t] {
                    count[t] -= 1;
                    heap.push(Reverse((count[t], t)));
                }
            }
        }
    }
    row_order.extend((0..nr).filter(|&i| !row_done[i]));
    EliminationStrategy {
        rho: invert_permutation(&row_order),
        sigma: invert_permutation(&col_order),
    }
}

/// Greedy column order with the row permutation recomputed by
/// [`optimal_row_perm`] for that column order.
pub fn greedy_then_optimal_rows(w: &SparseIsometry) -> EliminationStrategy {
    let greedy = greedy_order(w);
    let rows: Vec<usize> = (0..w.n_rows()).collect();
    let p = PatternMatrix::from_isometry(w).permuted(&rows, &greedy.sigma);
    EliminationStrategy {
        rho: optimal_row_perm_pattern(&p),
        sigma: greedy.sigma,
    }
}

/// Pattern-level elimination under a strategy. Returns the per-step traces in
/// the permuted frame (step `k` reduces column `k` onto row `k`).
pub fn symbolic_elimination(p: &PatternMatrix, strategy: &EliminationStrategy) -> Vec<StepTrace> {
    let mut work = p.permuted(&strategy.rho, &strategy.sigma);
    (0..work.n_cols()).map(|k| work.reduce(k, k)).collect()
}

/// Total number of eliminations `sum_k (nnz(w_k) - 1)` of the structural
/// reduction under `strategy`.
pub fn elim_count(w: &SparseIsometry, strategy: &EliminationStrategy) -> usize {
    elim_count_pattern(&PatternMatrix::from_isometry(w), strategy)
}

pub fn elim_count_pattern(p: &PatternMatrix, strategy: &EliminationStrategy) -> usize {
    symbolic_elimination(p, strategy)
        .iter()
        .map(|t| t.column_nnz.saturating_sub(1))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::random_sparse_isometry;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fig_w() -> PatternMatrix {
        PatternMatrix::from_strings(&["0001", "1111", "0110", "1010"])
    }

    #[test]
    fn identity_envelope() {
        let w = SparseIsometry::identity(4, 2);
        let e = envelope(&w);
        assert_eq!(e.env, vec![0, 1, 2, 3]);
        assert_eq!(e.ed, 0);
        assert_eq!(optimal_row_perm(&w), (0..16).collect::<Vec<_>>());
        assert_eq!(greedy_order(&w), EliminationStrategy::identity(16, 4));
        assert_eq!(elim_count(&w, &EliminationStrategy::identity(16, 4)), 0);
    }

    #[test]
    fn example_envelopes() {
        let p = fig_w();
        assert_eq!(p.envelope(), EnvelopeProfile { env: vec![3, 3, 3, 3], ed: 6 });
        let rho = optimal_row_perm_pattern(&p);
        // rows [1111], [1010], [0110], [0001]
        assert_eq!(rho, vec![3, 0, 2, 1]);
        let q = p.permuted(&rho, &[0, 1, 2, 3]);
        assert_eq!(q, PatternMatrix::from_strings(&["1111", "1010", "0110", "0001"]));
        assert_eq!(q.envelope(), EnvelopeProfile { env: vec![1, 2, 2, 3], ed: 2 });
    }

    #[test]
    fn example_first_step_fill_in() {
        let p = fig_w();
        let strat = EliminationStrategy {
            rho: vec![3, 0, 2, 1],
            sigma: vec![0, 1, 2, 3],
        };
        let steps = symbolic_elimination(&p, &strat);
        assert_eq!(steps[0].fill_in, vec![(1, 1), (1, 3)]);
        assert_eq!(steps[0].eliminated, vec![(1, 0)]);
        assert_eq!(steps[0].orthogonal, vec![(0, 1), (0, 2), (0, 3)]);
        let g = greedy_order_pattern(&p);
        assert_eq!(invert_permutation(&g.sigma)[0], 0);
    }

    #[test]
    fn greedy_takes_sparsest_column() {
        // column 2 has a single nonzero
        let p = PatternMatrix::from_strings(&["1100", "1110", "0101", "1001"]);
        let g = greedy_order_pattern(&p);
        let order = invert_permutation(&g.sigma);
        assert_eq!(order[0], 2);
        assert_eq!(invert_permutation(&g.rho)[0], 1);
        g.validate(4, 4).unwrap();
    }

    #[test]
    fn elimination_bounded_by_envelope_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let w = random_sparse_isometry(4, 2, 6, &mut rng);
            let mut rho: Vec<usize> = (0..16).collect();
            rho.shuffle(&mut rng);
            let mut sigma: Vec<usize> = (0..4).collect();
            sigma.shuffle(&mut rng);
            let s = EliminationStrategy { rho, sigma };
            let ed = envelope(&w.apply_permutations(&s.rho, &s.sigma).unwrap()).ed;
            assert!(elim_count(&w, &s) as i64 <= ed);
        }
    }

    #[test]
    fn optimal_rows_dominate_random_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let w = random_sparse_isometry(5, 2, 8, &mut rng);
            let best = envelope(&w.apply_permutations(&optimal_row_perm(&w), &[0, 1, 2, 3]).unwrap());
            for _ in 0..20 {
                let mut rho: Vec<usize> = (0..32).collect();
                rho.shuffle(&mut rng);
                let e = envelope(&w.apply_permutations(&rho, &[0, 1, 2, 3]).unwrap());
                assert!(best.env.iter().zip(&e.env).all(|(a, b)| a <= b));
            }
        }
    }

    #[test]
    fn symbolic_matches_numeric_reduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..30 {
            let w = random_sparse_isometry(4, 2, 5, &mut rng);
            let s = greedy_order(&w);
            let mut num = w.apply_permutations(&s.rho, &s.sigma).unwrap();
            let mut sym = PatternMatrix::from_isometry(&num);
            for k in 0..4 {
                crate::householder::reduce_column(&mut num, k, k).unwrap();
                sym.reduce(k, k);
                // numeric nonzeros are a subset of the structural ones
                for (i, j, _) in num.entries() {
                    assert!(sym.contains(i, j));
                }
            }
        }
    }
}
