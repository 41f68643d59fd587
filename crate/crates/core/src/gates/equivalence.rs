use super::{circuit_action, SimError, StructuredCircuit};
use crate::numerics::{Amplitude, DenseMatrix, ONE, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub enum EquivalenceMode {
    Exact,
    /// Column phases are free.
    UpToDiagonal,
    /// Column phases are free and the rows of the target are moved by the
    /// given forward map (`row i -> witness[i]`) before comparing.
    UpToDiagAndRowPerm(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equivalence {
    pub ok: bool,
    /// Frobenius distance after the best diagonal was applied.
    pub residual: f64,
    /// Recovered column phases (all ones in exact mode).
    pub diagonal: Vec<Amplitude>,
}

/// Compares the circuit applied to `I_{n,m}` with `target` (`2^n x 2^m`).
pub fn equivalent(
    c: &StructuredCircuit,
    target: &DenseMatrix,
    mode: &EquivalenceMode,
    tol: f64,
) -> Result<Equivalence, SimError> {
    let rows = 1usize << c.n;
    if target.rows() != rows || target.cols() > rows {
        return Err(SimError::DimensionMismatch {
            expected: rows,
            got: target.rows(),
        });
    }
    let action = circuit_action(c, target.cols())?;
    let reference = match mode {
        EquivalenceMode::UpToDiagAndRowPerm(witness) => {
            if crate::numerics::check_bijection(witness, rows).is_err() {
                return Ok(Equivalence {
                    ok: false,
                    residual: f64::INFINITY,
                    diagonal: vec![],
                });
            }
            let mut moved = DenseMatrix::zeros(rows, target.cols());
            for (i, &to) in witness.iter().enumerate() {
                for j in 0..target.cols() {
                    moved[(to, j)] = target[(i, j)];
                }
            }
            moved
        }
        _ => target.clone(),
    };
    let diagonal: Vec<Amplitude> = match mode {
        EquivalenceMode::Exact => vec![ONE; target.cols()],
        _ => (0..target.cols())
            .map(|j| {
                let mut ip = ZERO;
                for i in 0..rows {
                    ip += reference[(i, j)].conj() * action[(i, j)];
                }
                if ip.norm() == 0.0 {
                    ONE
                } else {
                    ip / ip.norm()
                }
            })
            .collect(),
    };
    let mut sq = 0.0;
    for i in 0..rows {
        for (j, d) in diagonal.iter().enumerate() {
            sq += (action[(i, j)] - reference[(i, j)] * d).norm_sqr();
        }
    }
    let residual = sq.sqrt();
    Ok(Equivalence {
        ok: residual <= tol,
        residual,
        diagonal,
    })
}
