//! Pattern-level runs of the sparse methods, used to inspect which cells are
//! eliminated and filled in without numeric values.

use crate::ordering::{symbolic_elimination, EliminationStrategy, PatternMatrix, StepTrace};

/// Sparse method: traces in the frame of `Pi_rho W Pi_sigma`.
pub fn sparse_trace(p: &PatternMatrix, strategy: &EliminationStrategy) -> Vec<StepTrace> {
    symbolic_elimination(p, strategy)
}

/// Fixed-envelope method: each step reduces the next column onto row 0 and
/// shifts all rows up by one. Returns each step's trace with the pattern after
/// the shift.
pub fn fixed_envelope_trace(p: &PatternMatrix, strategy: &EliminationStrategy) -> Vec<(StepTrace, PatternMatrix)> {
    let mut work = p.permuted(&strategy.rho, &strategy.sigma);
    let rows = work.n_rows();
    (0..work.n_cols())
        .map(|k| {
            let t = work.reduce(k, 0);
            work.map_rows(|r| (r + rows - 1) % rows);
            (t, work.clone())
        })
        .collect()
}

/// No-fill-in method: the pattern is stacked on an empty block of equal size
/// and column `j` is reduced onto row `rows + j`.
pub fn no_fill_in_trace(p: &PatternMatrix) -> Vec<StepTrace> {
    let rows = p.n_rows();
    let mut work = PatternMatrix::zeros(2 * rows, p.n_cols());
    for i in 0..rows {
        for &j in p.row(i) {
            work.insert(i, j);
        }
    }
    (0..p.n_cols()).map(|j| work.reduce(j, rows + j)).collect()
}
