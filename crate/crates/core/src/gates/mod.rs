//! Structured gate alphabet and circuit container.
//!
//! Qubit `q` of an `N`-qubit register is bit `N - 1 - q` of the basis index,
//! so qubit 0 is the most significant. Ancillas follow the data qubits and
//! occupy the least significant bits. Inside a gate, the first listed qubit
//! is the most significant bit of the gate's local index.

mod equivalence;
mod record;
mod sim;

pub use equivalence::{equivalent, Equivalence, EquivalenceMode};
pub use record::{CircuitRecord, GateRecord, RecordError};
pub use sim::{
    apply_gate, circuit_action, circuit_unitary, complete_state_prep, gate_matrix, SimError,
    StatePrep, SIMULATION_CAP,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{check_bijection, Amplitude, SparseState, ONE, ZERO};

pub type Mat2 = [[Amplitude; 2]; 2];

pub const PAULI_X: Mat2 = [[ZERO, ONE], [ONE, ZERO]];

const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateError {
    #[error("qubit {qubit} out of range for {total} qubits")]
    QubitOutOfRange { qubit: usize, total: usize },
    #[error("qubit {0} used twice in one gate")]
    DuplicateQubit(usize),
    #[error("{0}: matrix is not unitary")]
    NotUnitary(&'static str),
    #[error("{what}: expected {expected} entries, got {got}")]
    WrongLength {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("diagonal phase {0} does not have unit modulus")]
    NonUnitPhase(usize),
    #[error("permutation map is not a bijection")]
    NotBijection,
    #[error("state-preparation target has norm {0}")]
    NonUnitState(f64),
    #[error("relative-phase form is only defined for two controls")]
    RelativePhaseArity,
    #[error("gate acts on no qubits")]
    Empty,
}

/// A control qubit; the gate fires when the qubit reads `polarity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub polarity: bool,
}

impl Control {
    pub fn on(qubit: usize) -> Self {
        Control {
            qubit,
            polarity: true,
        }
    }

    pub fn off(qubit: usize) -> Self {
        Control {
            qubit,
            polarity: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Cnot {
        control: usize,
        target: usize,
    },
    Single {
        target: usize,
        matrix: Mat2,
    },
    /// Multi-controlled NOT. With `relative_phase` (two controls only) the
    /// gate additionally applies `-1` when the first control is satisfied,
    /// the second is not, and the target reads 1; this is the three-CNOT
    /// Toffoli that is exact up to a diagonal.
    Mcx {
        controls: Vec<Control>,
        target: usize,
        relative_phase: bool,
    },
    Mcu {
        controls: Vec<Control>,
        target: usize,
        matrix: Mat2,
    },
    Diagonal {
        qubits: Vec<usize>,
        phases: Vec<Amplitude>,
    },
    /// `|x> -> |map[x]>` on the local index of `qubits`.
    Permutation {
        qubits: Vec<usize>,
        map: Vec<usize>,
    },
    /// `|x> -> |x - 1 mod 2^k>`, or `+1` when `inverse`.
    Decrement {
        qubits: Vec<usize>,
        inverse: bool,
    },
    /// Dense state preparation `SP_v` (or its adjoint) on `qubits`.
    SpBlock {
        qubits: Vec<usize>,
        state: SparseState,
        inverted: bool,
    },
    /// `I + (e^{i phi} - 1)|0..0><0..0|` on `qubits`.
    H0Phase {
        qubits: Vec<usize>,
        phi: f64,
    },
}

fn adjoint2(m: &Mat2) -> Mat2 {
    [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ]
}

/// Basis image of a monomial 2x2 matrix.
fn mono2(m: &Mat2, l: usize) -> (usize, Amplitude) {
    if m[0][1] == ZERO && m[1][0] == ZERO {
        (l, m[l][l])
    } else {
        (1 - l, m[1 - l][l])
    }
}

fn is_unitary2(m: &Mat2) -> bool {
    let a = adjoint2(m);
    for i in 0..2 {
        for j in 0..2 {
            let mut s = ZERO;
            for k in 0..2 {
                s += a[i][k] * m[k][j];
            }
            let e = if i == j { ONE } else { ZERO };
            if (s - e).norm() > UNIT_TOL {
                return false;
            }
        }
    }
    true
}

impl Gate {
    pub fn x(target: usize) -> Self {
        Gate::Single {
            target,
            matrix: PAULI_X,
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn mcx(controls: Vec<Control>, target: usize) -> Self {
        Gate::Mcx {
            controls,
            target,
            relative_phase: false,
        }
    }

    /// Short name used in cost reports and JSON records.
    pub fn kind(&self) -> &'static str {
        match self {
            Gate::Cnot { .. } => "cnot",
            Gate::Single { .. } => "single",
            Gate::Mcx { .. } => "mcx",
            Gate::Mcu { .. } => "mcu",
            Gate::Diagonal { .. } => "diagonal",
            Gate::Permutation { .. } => "permutation",
            Gate::Decrement { .. } => "decrement",
            Gate::SpBlock { .. } => "sp_block",
            Gate::H0Phase { .. } => "h0_phase",
        }
    }

    /// Qubits in local order (controls first, then the target).
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Single { target, .. } => vec![*target],
            Gate::Mcx {
                controls, target, ..
            }
            | Gate::Mcu {
                controls, target, ..
            } => controls
                .iter()
                .map(|c| c.qubit)
                .chain(std::iter::once(*target))
                .collect(),
            Gate::Diagonal { qubits, .. }
            | Gate::Permutation { qubits, .. }
            | Gate::Decrement { qubits, .. }
            | Gate::SpBlock { qubits, .. }
            | Gate::H0Phase { qubits, .. } => qubits.clone(),
        }
    }

    pub fn dagger(&self) -> Gate {
        match self {
            Gate::Cnot { .. } | Gate::Mcx { .. } => self.clone(),
            Gate::Single { target, matrix } => Gate::Single {
                target: *target,
                matrix: adjoint2(matrix),
            },
            Gate::Mcu {
                controls,
                target,
                matrix,
            } => Gate::Mcu {
                controls: controls.clone(),
                target: *target,
                matrix: adjoint2(matrix),
            },
            Gate::Diagonal { qubits, phases } => Gate::Diagonal {
                qubits: qubits.clone(),
                phases: phases.iter().map(|p| p.conj()).collect(),
            },
            Gate::Permutation { qubits, map } => Gate::Permutation {
                qubits: qubits.clone(),
                map: crate::numerics::invert_permutation(map),
            },
            Gate::Decrement { qubits, inverse } => Gate::Decrement {
                qubits: qubits.clone(),
                inverse: !inverse,
            },
            Gate::SpBlock {
                qubits,
                state,
                inverted,
            } => Gate::SpBlock {
                qubits: qubits.clone(),
                state: state.clone(),
                inverted: !inverted,
            },
            Gate::H0Phase { qubits, phi } => Gate::H0Phase {
                qubits: qubits.clone(),
                phi: -phi,
            },
        }
    }

    /// Renames every qubit through `f`.
    pub fn relabel(&self, f: impl Fn(usize) -> usize) -> Gate {
        let ctl = |cs: &[Control]| {
            cs.iter()
                .map(|c| Control {
                    qubit: f(c.qubit),
                    polarity: c.polarity,
                })
                .collect::<Vec<_>>()
        };
        let mut g = self.clone();
        match &mut g {
            Gate::Cnot { control, target } => {
                *control = f(*control);
                *target = f(*target);
            }
            Gate::Single { target, .. } => *target = f(*target),
            Gate::Mcx {
                controls, target, ..
            }
            | Gate::Mcu {
                controls, target, ..
            } => {
                *controls = ctl(controls);
                *target = f(*target);
            }
            Gate::Diagonal { qubits, .. }
            | Gate::Permutation { qubits, .. }
            | Gate::Decrement { qubits, .. }
            | Gate::SpBlock { qubits, .. }
            | Gate::H0Phase { qubits, .. } => qubits.iter_mut().for_each(|q| *q = f(*q)),
        }
        g
    }

    /// True when the gate maps basis states to phased basis states.
    pub fn is_monomial(&self) -> bool {
        match self {
            Gate::Single { matrix, .. } | Gate::Mcu { matrix, .. } => {
                (matrix[0][1] == ZERO && matrix[1][0] == ZERO)
                    || (matrix[0][0] == ZERO && matrix[1][1] == ZERO)
            }
            Gate::SpBlock { .. } => false,
            _ => true,
        }
    }

    /// Image of basis state `|x>` of a `total`-qubit register as `(y, phase)`
    /// with `g|x> = phase |y>`; `None` for non-monomial gates.
    pub fn basis_image(&self, total: usize, x: usize) -> Option<(usize, Amplitude)> {
        if !self.is_monomial() {
            return None;
        }
        let qs = self.qubits();
        let k = qs.len();
        let bit = |q: usize| (x >> (total - 1 - q)) & 1;
        let local: usize = qs.iter().fold(0, |acc, &q| (acc << 1) | bit(q));
        let ctl_ok = |cs: &[Control]| cs.iter().all(|c| bit(c.qubit) == c.polarity as usize);
        let (y, phase) = match self {
            Gate::Cnot { .. } => (if local >> 1 == 1 { local ^ 1 } else { local }, ONE),
            Gate::Single { matrix, .. } => mono2(matrix, local),
            Gate::Mcx {
                controls,
                relative_phase,
                ..
            } => {
                if ctl_ok(controls) {
                    (local ^ 1, ONE)
                } else if *relative_phase
                    && bit(controls[0].qubit) == controls[0].polarity as usize
                    && local & 1 == 1
                {
                    (local, -ONE)
                } else {
                    (local, ONE)
                }
            }
            Gate::Mcu {
                controls, matrix, ..
            } => {
                if ctl_ok(controls) {
                    let (t, p) = mono2(matrix, local & 1);
                    ((local & !1) | t, p)
                } else {
                    (local, ONE)
                }
            }
            Gate::Diagonal { phases, .. } => (local, phases[local]),
            Gate::Permutation { map, .. } => (map[local], ONE),
            Gate::Decrement { inverse, .. } => {
                let dim = 1usize << k;
                if *inverse {
                    ((local + 1) % dim, ONE)
                } else {
                    ((local + dim - 1) % dim, ONE)
                }
            }
            Gate::H0Phase { phi, .. } => (local, if local == 0 { crate::numerics::cis(*phi) } else { ONE }),
            Gate::SpBlock { .. } => unreachable!("not monomial"),
        };
        let mut out = x;
        for (r, &q) in qs.iter().enumerate() {
            let b = (y >> (k - 1 - r)) & 1;
            let mask = 1usize << (total - 1 - q);
            out = if b == 1 { out | mask } else { out & !mask };
        }
        Some((out, phase))
    }

    /// Checks qubit ranges and the algebraic side conditions of each kind.
    pub fn validate(&self, total_qubits: usize) -> Result<(), GateError> {
        let qs = self.qubits();
        if qs.is_empty() {
            return Err(GateError::Empty);
        }
        let mut seen = std::collections::BTreeSet::new();
        for &q in &qs {
            if q >= total_qubits {
                return Err(GateError::QubitOutOfRange {
                    qubit: q,
                    total: total_qubits,
                });
            }
            if !seen.insert(q) {
                return Err(GateError::DuplicateQubit(q));
            }
        }
        let dim = 1usize << qs.len();
        match self {
            Gate::Single { matrix, .. } | Gate::Mcu { matrix, .. } => {
                if !is_unitary2(matrix) {
                    return Err(GateError::NotUnitary(self.kind()));
                }
            }
            Gate::Mcx {
                controls,
                relative_phase: true,
                ..
            } if controls.len() != 2 => return Err(GateError::RelativePhaseArity),
            Gate::Diagonal { phases, .. } => {
                if phases.len() != dim {
                    return Err(GateError::WrongLength {
                        what: "diagonal",
                        expected: dim,
                        got: phases.len(),
                    });
                }
                if let Some(k) = phases.iter().position(|p| (p.norm() - 1.0).abs() > UNIT_TOL) {
                    return Err(GateError::NonUnitPhase(k));
                }
            }
            Gate::Permutation { map, .. } => {
                check_bijection(map, dim).map_err(|_| GateError::NotBijection)?;
            }
            Gate::SpBlock { state, .. } => {
                if state.n as usize != qs.len() {
                    return Err(GateError::WrongLength {
                        what: "sp_block state",
                        expected: dim,
                        got: 1usize << state.n,
                    });
                }
                let nrm = state.norm();
                if (nrm - 1.0).abs() > UNIT_TOL {
                    return Err(GateError::NonUnitState(nrm));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AncillaKind {
    Clean,
    Dirty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructuredCircuit {
    pub n: usize,
    pub ancillas: Vec<AncillaKind>,
    pub gates: Vec<Gate>,
}

impl StructuredCircuit {
    pub fn new(n: usize) -> Self {
        StructuredCircuit {
            n,
            ancillas: Vec::new(),
            gates: Vec::new(),
        }
    }

    pub fn with_ancillas(n: usize, ancillas: Vec<AncillaKind>) -> Self {
        StructuredCircuit {
            n,
            ancillas,
            gates: Vec::new(),
        }
    }

    pub fn total_qubits(&self) -> usize {
        self.n + self.ancillas.len()
    }

    pub fn push(&mut self, g: Gate) {
        self.gates.push(g);
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) {
        self.gates.extend(gates);
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// The inverse circuit: gates reversed and individually inverted.
    pub fn dagger(&self) -> StructuredCircuit {
        StructuredCircuit {
            n: self.n,
            ancillas: self.ancillas.clone(),
            gates: self.gates.iter().rev().map(Gate::dagger).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), GateError> {
        let total = self.total_qubits();
        self.gates.iter().try_for_each(|g| g.validate(total))
    }

    /// Number of raw CNOT gates.
    pub fn cnot_gates(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::Cnot { .. }))
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn validation_catches_bad_gates() {
        assert_eq!(
            Gate::cnot(0, 0).validate(2),
            Err(GateError::DuplicateQubit(0))
        );
        assert!(matches!(
            Gate::x(3).validate(2),
            Err(GateError::QubitOutOfRange { .. })
        ));
        let bad = Gate::Diagonal {
            qubits: vec![0],
            phases: vec![ONE, Complex64::new(2.0, 0.0)],
        };
        assert_eq!(bad.validate(1), Err(GateError::NonUnitPhase(1)));
        let perm = Gate::Permutation {
            qubits: vec![0],
            map: vec![0, 0],
        };
        assert_eq!(perm.validate(1), Err(GateError::NotBijection));
        let rel = Gate::Mcx {
            controls: vec![Control::on(0)],
            target: 1,
            relative_phase: true,
        };
        assert_eq!(rel.validate(2), Err(GateError::RelativePhaseArity));
        let sp = Gate::SpBlock {
            qubits: vec![0],
            state: SparseState::new(1),
            inverted: false,
        };
        assert!(matches!(sp.validate(1), Err(GateError::NonUnitState(_))));
        let nu = Gate::Single {
            target: 0,
            matrix: [[ONE, ONE], [ZERO, ONE]],
        };
        assert_eq!(nu.validate(1), Err(GateError::NotUnitary("single")));
    }

    #[test]
    fn dagger_of_dagger() {
        let gates = vec![
            Gate::Decrement {
                qubits: vec![0, 1],
                inverse: false,
            },
            Gate::H0Phase {
                qubits: vec![1],
                phi: 0.4,
            },
            Gate::Permutation {
                qubits: vec![0, 1],
                map: vec![2, 0, 3, 1],
            },
        ];
        for g in gates {
            assert_eq!(g.dagger().dagger(), g);
        }
    }

    #[test]
    fn basis_image_matches_simulation() {
        use crate::numerics::cis;
        let gates = vec![
            Gate::cnot(2, 0),
            Gate::x(1),
            Gate::Single {
                target: 3,
                matrix: [[cis(0.2), ZERO], [ZERO, cis(-0.9)]],
            },
            Gate::Mcx {
                controls: vec![Control::off(0), Control::on(3)],
                target: 1,
                relative_phase: true,
            },
            Gate::mcx(vec![Control::on(0), Control::off(1), Control::on(2)], 3),
            Gate::Mcu {
                controls: vec![Control::on(1)],
                target: 2,
                matrix: [[ZERO, cis(0.4)], [cis(1.3), ZERO]],
            },
            Gate::Diagonal {
                qubits: vec![3, 1],
                phases: (0..4).map(|k| cis(0.3 * k as f64)).collect(),
            },
            Gate::Permutation {
                qubits: vec![0, 2, 3],
                map: vec![5, 3, 0, 1, 7, 2, 6, 4],
            },
            Gate::Decrement {
                qubits: vec![1, 3],
                inverse: false,
            },
            Gate::Decrement {
                qubits: vec![0, 1, 2],
                inverse: true,
            },
            Gate::H0Phase {
                qubits: vec![2, 3],
                phi: 0.8,
            },
        ];
        for g in gates {
            let mut c = StructuredCircuit::new(4);
            c.push(g.clone());
            let u = circuit_unitary(&c).unwrap();
            for x in 0..16 {
                let (y, p) = g.basis_image(4, x).unwrap();
                assert!((u[(y, x)] - p).norm() < 1e-12, "{} on {x}", g.kind());
            }
        }
        let sp = Gate::SpBlock {
            qubits: vec![0],
            state: SparseState::basis(1, 1),
            inverted: false,
        };
        assert!(sp.basis_image(1, 0).is_none());
    }

    #[test]
    fn circuit_dagger_reverses() {
        let mut c = StructuredCircuit::new(2);
        c.push(Gate::x(0));
        c.push(Gate::cnot(0, 1));
        let d = c.dagger();
        assert_eq!(d.gates[0], Gate::cnot(0, 1));
        assert_eq!(d.gates[1], Gate::x(0));
        assert_eq!(c.cnot_gates(), 1);
    }
}
