//! JSON form of circuits.
//!
//! ```json
//! {"n": 2, "ancillas": ["clean"],
//!  "gates": [{"kind": "mcx", "qubits": [0, 1, 2],
//!             "params": {"polarity": [true, true], "relative_phase": false}}]}
//! ```
//!
//! `qubits` lists controls first and the target last. Complex numbers are
//! `[re, im]` pairs. Per kind, `params` holds:
//!
//! | kind          | params                                          |
//! |---------------|-------------------------------------------------|
//! | `cnot`        | `{}`                                            |
//! | `single`      | `{"matrix": [[a00, a01], [a10, a11]]}`          |
//! | `mcx`         | `{"polarity": [bool], "relative_phase": bool}`  |
//! | `mcu`         | `{"polarity": [bool], "matrix": ...}`           |
//! | `diagonal`    | `{"phases": [[re, im], ...]}`                   |
//! | `permutation` | `{"map": [int, ...]}`                           |
//! | `decrement`   | `{"inverse": bool}`                             |
//! | `sp_block`    | `{"state": [[index, re, im], ...], "inverted": bool}` |
//! | `h0_phase`    | `{"phi": float}`                                |

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::{AncillaKind, Control, Gate, GateError, Mat2, StructuredCircuit};
use crate::numerics::{Amplitude, SparseState};

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("unknown gate kind `{0}`")]
    UnknownKind(String),
    #[error("gate `{kind}`: {msg}")]
    Malformed { kind: String, msg: String },
    #[error(transparent)]
    Invalid(#[from] GateError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateRecord {
    pub kind: String,
    pub qubits: Vec<usize>,
    #[serde(default)]
    pub params: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitRecord {
    pub n: usize,
    #[serde(default)]
    pub ancillas: Vec<AncillaKind>,
    pub gates: Vec<GateRecord>,
}

fn c2(a: &Amplitude) -> Value {
    json!([a.re, a.im])
}

fn mat(m: &Mat2) -> Value {
    json!([[c2(&m[0][0]), c2(&m[0][1])], [c2(&m[1][0]), c2(&m[1][1])]])
}

impl From<&Gate> for GateRecord {
    fn from(g: &Gate) -> Self {
        let params = match g {
            Gate::Cnot { .. } => json!({}),
            Gate::Single { matrix, .. } => json!({ "matrix": mat(matrix) }),
            Gate::Mcx {
                controls,
                relative_phase,
                ..
            } => json!({
                "polarity": controls.iter().map(|c| c.polarity).collect::<Vec<_>>(),
                "relative_phase": relative_phase,
            }),
            Gate::Mcu {
                controls, matrix, ..
            } => json!({
                "polarity": controls.iter().map(|c| c.polarity).collect::<Vec<_>>(),
                "matrix": mat(matrix),
            }),
            Gate::Diagonal { phases, .. } => {
                json!({ "phases": phases.iter().map(c2).collect::<Vec<_>>() })
            }
            Gate::Permutation { map, .. } => json!({ "map": map }),
            Gate::Decrement { inverse, .. } => json!({ "inverse": inverse }),
            Gate::SpBlock {
                state, inverted, ..
            } => json!({
                "state": state.entries.iter().map(|(k, a)| json!([k, a.re, a.im])).collect::<Vec<_>>(),
                "inverted": inverted,
            }),
            Gate::H0Phase { phi, .. } => json!({ "phi": phi }),
        };
        GateRecord {
            kind: g.kind().to_string(),
            qubits: g.qubits(),
            params,
        }
    }
}

struct Reader<'a> {
    kind: &'a str,
    params: &'a Value,
}

impl Reader<'_> {
    fn err(&self, msg: impl Into<String>) -> RecordError {
        RecordError::Malformed {
            kind: self.kind.to_string(),
            msg: msg.into(),
        }
    }

    fn field(&self, name: &str) -> Result<&Value, RecordError> {
        self.params
            .get(name)
            .ok_or_else(|| self.err(format!("missing `{name}`")))
    }

    fn bool(&self, name: &str) -> Result<bool, RecordError> {
        self.field(name)?
            .as_bool()
            .ok_or_else(|| self.err(format!("`{name}` must be a bool")))
    }

    fn f64_of(&self, v: &Value) -> Result<f64, RecordError> {
        v.as_f64().ok_or_else(|| self.err("expected a number"))
    }

    fn complex(&self, v: &Value) -> Result<Amplitude, RecordError> {
        match v.as_array().map(Vec::as_slice) {
            Some([re, im]) => Ok(Amplitude::new(self.f64_of(re)?, self.f64_of(im)?)),
            _ => Err(self.err("complex numbers are [re, im]")),
        }
    }

    fn array(&self, name: &str) -> Result<&Vec<Value>, RecordError> {
        self.field(name)?
            .as_array()
            .ok_or_else(|| self.err(format!("`{name}` must be an array")))
    }

    fn matrix(&self) -> Result<Mat2, RecordError> {
        let rows = self.array("matrix")?;
        if rows.len() != 2 {
            return Err(self.err("matrix must be 2x2"));
        }
        let mut m = [[Amplitude::new(0.0, 0.0); 2]; 2];
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_array().filter(|r| r.len() == 2).ok_or_else(|| self.err("matrix must be 2x2"))?;
            for (j, v) in row.iter().enumerate() {
                m[i][j] = self.complex(v)?;
            }
        }
        Ok(m)
    }

    fn controls(&self, qubits: &[usize]) -> Result<Vec<Control>, RecordError> {
        let pol = self.array("polarity")?;
        if pol.len() + 1 != qubits.len() {
            return Err(self.err("polarity must list one bit per control"));
        }
        pol.iter()
            .zip(qubits)
            .map(|(p, &q)| {
                Ok(Control {
                    qubit: q,
                    polarity: p.as_bool().ok_or_else(|| self.err("polarity must be bools"))?,
                })
            })
            .collect()
    }
}

impl TryFrom<&GateRecord> for Gate {
    type Error = RecordError;

    fn try_from(r: &GateRecord) -> Result<Self, Self::Error> {
        let rd = Reader {
            kind: &r.kind,
            params: &r.params,
        };
        let q = &r.qubits;
        let target = || q.last().copied().ok_or_else(|| rd.err("no qubits"));
        let arity = |k: usize| {
            if q.len() == k {
                Ok(())
            } else {
                Err(rd.err(format!("expected {k} qubits")))
            }
        };
        let g = match r.kind.as_str() {
            "cnot" => {
                arity(2)?;
                Gate::cnot(q[0], q[1])
            }
            "single" => {
                arity(1)?;
                Gate::Single {
                    target: q[0],
                    matrix: rd.matrix()?,
                }
            }
            "mcx" => Gate::Mcx {
                controls: rd.controls(q)?,
                target: target()?,
                relative_phase: rd.bool("relative_phase")?,
            },
            "mcu" => Gate::Mcu {
                controls: rd.controls(q)?,
                target: target()?,
                matrix: rd.matrix()?,
            },
            "diagonal" => Gate::Diagonal {
                qubits: q.clone(),
                phases: rd
                    .array("phases")?
                    .iter()
                    .map(|v| rd.complex(v))
                    .collect::<Result<_, _>>()?,
            },
            "permutation" => Gate::Permutation {
                qubits: q.clone(),
                map: rd
                    .array("map")?
                    .iter()
                    .map(|v| v.as_u64().map(|x| x as usize).ok_or_else(|| rd.err("map entries are integers")))
                    .collect::<Result<_, _>>()?,
            },
            "decrement" => Gate::Decrement {
                qubits: q.clone(),
                inverse: rd.bool("inverse")?,
            },
            "sp_block" => {
                let mut state = SparseState::new(q.len() as u32);
                for e in rd.array("state")? {
                    match e.as_array().map(Vec::as_slice) {
                        Some([k, re, im]) => {
                            let k = k.as_u64().ok_or_else(|| rd.err("state index must be an integer"))?;
                            state.entries.insert(
                                k as usize,
                                Amplitude::new(rd.f64_of(re)?, rd.f64_of(im)?),
                            );
                        }
                        _ => return Err(rd.err("state entries are [index, re, im]")),
                    }
                }
                if state.entries.keys().any(|&k| k >= 1usize << q.len()) {
                    return Err(rd.err("state index out of range"));
                }
                Gate::SpBlock {
                    qubits: q.clone(),
                    state,
                    inverted: rd.bool("inverted")?,
                }
            }
            "h0_phase" => Gate::H0Phase {
                qubits: q.clone(),
                phi: rd.f64_of(rd.field("phi")?)?,
            },
            other => return Err(RecordError::UnknownKind(other.to_string())),
        };
        Ok(g)
    }
}

impl From<&StructuredCircuit> for CircuitRecord {
    fn from(c: &StructuredCircuit) -> Self {
        CircuitRecord {
            n: c.n,
            ancillas: c.ancillas.clone(),
            gates: c.gates.iter().map(GateRecord::from).collect(),
        }
    }
}

impl TryFrom<&CircuitRecord> for StructuredCircuit {
    type Error = RecordError;

    fn try_from(r: &CircuitRecord) -> Result<Self, Self::Error> {
        let c = StructuredCircuit {
            n: r.n,
            ancillas: r.ancillas.clone(),
            gates: r.gates.iter().map(Gate::try_from).collect::<Result<_, _>>()?,
        };
        c.validate()?;
        Ok(c)
    }
}

impl StructuredCircuit {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&CircuitRecord::from(self)).expect("records always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, RecordError> {
        let r: CircuitRecord = serde_json::from_str(s)?;
        StructuredCircuit::try_from(&r)
    }
}
