use rayon::prelude::*;
use thiserror::Error;

use super::{AncillaKind, Gate, GateError, StructuredCircuit};
use crate::householder::{
    generalized_pair_reflection, standard_pair_reflection, GeneralizedReflection, HouseholderError,
};
use crate::numerics::{cis, Amplitude, DenseMatrix, SparseState, ONE, ZERO, ZERO_TOL};

/// Largest register (data plus ancillas) the dense simulator accepts.
pub const SIMULATION_CAP: usize = 14;

const RESTORE_TOL: f64 = 1e-10;

/// Below this `|1 - v_0|` the generalized completion loses accuracy and the
/// phased standard reflection is used instead.
const COMPLETION_SWITCH: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{qubits} qubits exceed the simulation cap of {cap}")]
    CapExceeded { qubits: usize, cap: usize },
    #[error("state has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ancillas not restored for input {input} (residual {residual:.3e})")]
    AncillaNotRestored { input: usize, residual: f64 },
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Householder(#[from] HouseholderError),
}

/// A unitary `scale * (I + coeff |u><u|)` sending `|0>` to a given state.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePrep {
    pub n: u32,
    pub scale: Amplitude,
    pub coeff: Amplitude,
    pub u: SparseState,
}

impl StatePrep {
    pub fn apply(&self, x: &mut [Amplitude], adjoint: bool) {
        let (scale, coeff) = if adjoint {
            (self.scale.conj(), self.coeff.conj())
        } else {
            (self.scale, self.coeff)
        };
        let mut proj = ZERO;
        for (&k, &uk) in &self.u.entries {
            proj += uk.conj() * x[k];
        }
        proj *= coeff;
        for (&k, &uk) in &self.u.entries {
            x[k] += proj * uk;
        }
        if scale != ONE {
            x.iter_mut().for_each(|a| *a *= scale);
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let dim = 1usize << self.n;
        let mut out = DenseMatrix::zeros(dim, dim);
        for j in 0..dim {
            let mut e = vec![ZERO; dim];
            e[j] = ONE;
            self.apply(&mut e, false);
            for (i, a) in e.into_iter().enumerate() {
                out[(i, j)] = a;
            }
        }
        out
    }
}

/// Deterministic completion of `v` to a unitary with first column `v`.
///
/// The generalized reflection exchanging `|0>` and `v` is used; when `v` is
/// within `1e-3` of `|0>` the phase-corrected standard reflection replaces it.
pub fn complete_state_prep(v: &SparseState) -> Result<StatePrep, HouseholderError> {
    let zero = SparseState::basis(v.n, 0);
    let identity = StatePrep {
        n: v.n,
        scale: ONE,
        coeff: ZERO,
        u: SparseState::new(v.n),
    };
    let nrm = v.norm();
    if (nrm - 1.0).abs() > 1e-9 {
        return Err(HouseholderError::NonUnit(nrm));
    }
    let off_zero = v.entries.iter().all(|(&k, a)| k == 0 || a.norm() <= ZERO_TOL);
    if off_zero && (v.get(0) - ONE).norm() <= ZERO_TOL {
        return Ok(identity);
    }
    if (ONE - v.get(0)).norm() >= COMPLETION_SWITCH {
        if let GeneralizedReflection::Reflection(h) = generalized_pair_reflection(&zero, v)? {
            return Ok(StatePrep {
                n: v.n,
                scale: ONE,
                coeff: cis(h.phi) - ONE,
                u: h.u,
            });
        }
    }
    let h = standard_pair_reflection(&zero, v)?;
    Ok(StatePrep {
        n: v.n,
        scale: cis(-h.theta),
        coeff: Amplitude::new(-2.0, 0.0),
        u: h.u,
    })
}

fn local_offsets(qubits: &[usize], total: usize) -> Vec<usize> {
    let k = qubits.len();
    (0..1usize << k)
        .map(|x| {
            qubits
                .iter()
                .enumerate()
                .filter(|(r, _)| (x >> (k - 1 - r)) & 1 == 1)
                .map(|(_, &q)| 1usize << (total - 1 - q))
                .sum()
        })
        .collect()
}

fn control_pattern(controls: &[super::Control]) -> usize {
    controls
        .iter()
        .fold(0, |acc, c| (acc << 1) | c.polarity as usize)
}

fn transform(g: &Gate, prep: Option<&StatePrep>, buf: &mut [Amplitude]) {
    match g {
        Gate::Cnot { .. } => buf.swap(2, 3),
        Gate::Single { matrix, .. } => {
            let (a, b) = (buf[0], buf[1]);
            buf[0] = matrix[0][0] * a + matrix[0][1] * b;
            buf[1] = matrix[1][0] * a + matrix[1][1] * b;
        }
        Gate::Mcx {
            controls,
            relative_phase,
            ..
        } => {
            let base = control_pattern(controls) << 1;
            buf.swap(base, base | 1);
            if *relative_phase {
                let x = ((controls[0].polarity as usize) << 2)
                    | ((!controls[1].polarity as usize) << 1)
                    | 1;
                buf[x] = -buf[x];
            }
        }
        Gate::Mcu {
            controls, matrix, ..
        } => {
            let base = control_pattern(controls) << 1;
            let (a, b) = (buf[base], buf[base | 1]);
            buf[base] = matrix[0][0] * a + matrix[0][1] * b;
            buf[base | 1] = matrix[1][0] * a + matrix[1][1] * b;
        }
        Gate::Diagonal { phases, .. } => buf.iter_mut().zip(phases).for_each(|(a, p)| *a *= p),
        Gate::Permutation { map, .. } => {
            let old = buf.to_vec();
            for (x, &y) in map.iter().enumerate() {
                buf[y] = old[x];
            }
        }
        Gate::Decrement { inverse, .. } => {
            if *inverse {
                buf.rotate_right(1);
            } else {
                buf.rotate_left(1);
            }
        }
        Gate::SpBlock { inverted, .. } => {
            prep.expect("state prep is precomputed").apply(buf, *inverted)
        }
        Gate::H0Phase { phi, .. } => buf[0] *= cis(*phi),
    }
}

/// Applies `g` to a dense state of `total` qubits in place.
pub fn apply_gate(state: &mut [Amplitude], total: usize, g: &Gate) -> Result<(), SimError> {
    if state.len() != 1usize << total {
        return Err(SimError::DimensionMismatch {
            expected: 1usize << total,
            got: state.len(),
        });
    }
    g.validate(total)?;
    let prep = match g {
        Gate::SpBlock { state: v, .. } => Some(complete_state_prep(v)?),
        _ => None,
    };
    let qubits = g.qubits();
    let offs = local_offsets(&qubits, total);
    let mask: usize = offs.iter().fold(0, |a, &o| a | o);
    let mut buf = vec![ZERO; offs.len()];
    for rest in 0..state.len() {
        if rest & mask != 0 {
            continue;
        }
        for (b, &o) in buf.iter_mut().zip(&offs) {
            *b = state[rest | o];
        }
        transform(g, prep.as_ref(), &mut buf);
        for (b, &o) in buf.iter().zip(&offs) {
            state[rest | o] = *b;
        }
    }
    Ok(())
}

/// Unitary of a single gate on its own qubits, in local order.
pub fn gate_matrix(g: &Gate) -> Result<DenseMatrix, SimError> {
    let qubits = g.qubits();
    let local = g.relabel(|q| qubits.iter().position(|&p| p == q).unwrap());
    let mut c = StructuredCircuit::new(qubits.len());
    c.push(local);
    circuit_unitary(&c)
}

/// Action of `c` on the first `cols` data basis states, checking that every
/// ancilla is returned to its input value.
///
/// Clean ancillas start in `|0>`; dirty ancillas are tried on every basis
/// value and must yield the same data action each time.
pub fn circuit_action(c: &StructuredCircuit, cols: usize) -> Result<DenseMatrix, SimError> {
    let total = c.total_qubits();
    if total > SIMULATION_CAP {
        return Err(SimError::CapExceeded {
            qubits: total,
            cap: SIMULATION_CAP,
        });
    }
    c.validate()?;
    let a = c.ancillas.len();
    let rows = 1usize << c.n;
    let dirty: Vec<usize> = c
        .ancillas
        .iter()
        .enumerate()
        .filter(|(_, k)| **k == AncillaKind::Dirty)
        .map(|(i, _)| 1usize << (a - 1 - i))
        .collect();
    let preps: Vec<Option<StatePrep>> = c
        .gates
        .iter()
        .map(|g| match g {
            Gate::SpBlock { state, .. } => complete_state_prep(state).map(Some),
            _ => Ok(None),
        })
        .collect::<Result<_, _>>()?;
    let plans: Vec<(Vec<usize>, usize)> = c
        .gates
        .iter()
        .map(|g| {
            let offs = local_offsets(&g.qubits(), total);
            let mask = offs.iter().fold(0, |m, &o| m | o);
            (offs, mask)
        })
        .collect();

    let run = |input: usize| -> Vec<Amplitude> {
        let mut state = vec![ZERO; 1usize << total];
        state[input] = ONE;
        for ((g, prep), (offs, mask)) in c.gates.iter().zip(&preps).zip(&plans) {
            let mut buf = vec![ZERO; offs.len()];
            for rest in 0..state.len() {
                if rest & mask != 0 {
                    continue;
                }
                for (b, &o) in buf.iter_mut().zip(offs) {
                    *b = state[rest | o];
                }
                transform(g, prep.as_ref(), &mut buf);
                for (b, &o) in buf.iter().zip(offs) {
                    state[rest | o] = *b;
                }
            }
        }
        state
    };

    let columns: Vec<Result<Vec<Amplitude>, SimError>> = (0..cols)
        .into_par_iter()
        .map(|j| {
            let mut reference: Option<Vec<Amplitude>> = None;
            for assign in 0..1usize << dirty.len() {
                let anc: usize = dirty
                    .iter()
                    .enumerate()
                    .filter(|(r, _)| (assign >> r) & 1 == 1)
                    .map(|(_, &b)| b)
                    .sum();
                let input = (j << a) | anc;
                let out = run(input);
                let mut leak = 0.0;
                let mut col = vec![ZERO; rows];
                for (idx, amp) in out.iter().enumerate() {
                    if idx & ((1usize << a) - 1) == anc {
                        col[idx >> a] = *amp;
                    } else {
                        leak += amp.norm_sqr();
                    }
                }
                let mut residual = leak.sqrt();
                if let Some(r) = &reference {
                    residual += crate::numerics::norm(
                        &r.iter().zip(&col).map(|(x, y)| x - y).collect::<Vec<_>>(),
                    );
                }
                if residual > RESTORE_TOL {
                    return Err(SimError::AncillaNotRestored { input, residual });
                }
                reference.get_or_insert(col);
            }
            Ok(reference.expect("at least one ancilla assignment"))
        })
        .collect();

    let mut m = DenseMatrix::zeros(rows, cols);
    for (j, col) in columns.into_iter().enumerate() {
        for (i, a) in col?.into_iter().enumerate() {
            m[(i, j)] = a;
        }
    }
    Ok(m)
}

/// Full data-register unitary of `c`.
pub fn circuit_unitary(c: &StructuredCircuit) -> Result<DenseMatrix, SimError> {
    circuit_action(c, 1usize << c.n)
}
