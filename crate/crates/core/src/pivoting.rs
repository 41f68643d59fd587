//! Pivoting: a permutation circuit that gathers the nonzeros of a sparse state
//! into a single block of `2^s` consecutive local indices, so that a dense
//! preparation acts on `s` qubits only.
//!
//! The `n` qubits are split into block qubits (which select one of `2^{n-s}`
//! blocks) and register qubits (the position within a block). Each insertion
//! step moves one outside entry into a free slot of the target block with
//! `d - 1` singly controlled NOTs and one `s`-controlled NOT, where `d` is the
//! Hamming distance between entry and slot.

use std::collections::{BTreeSet, HashSet, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::gates::{Control, Gate, StructuredCircuit};
use crate::numerics::{arg0, ceil_log2, cis, Amplitude, SparseState, ONE, ZERO_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PivotError {
    #[error("register size {s} exceeds qubit count {n}")]
    SplitTooLarge { s: usize, n: usize },
    #[error("{nnz} nonzeros do not fit in a block of {capacity}")]
    Infeasible { nnz: usize, capacity: usize },
    #[error("state has no nonzero entries")]
    ZeroVector,
    #[error("invalid splitting: {0}")]
    BadSplitting(String),
}

/// Partition of the `n` qubits into block and register qubits, both ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QubitSplitting {
    pub n: usize,
    pub block_qubits: Vec<usize>,
    pub register_qubits: Vec<usize>,
}

impl QubitSplitting {
    pub fn from_register(n: usize, mut register_qubits: Vec<usize>) -> Result<Self, PivotError> {
        register_qubits.sort_unstable();
        register_qubits.dedup();
        if register_qubits.iter().any(|&q| q >= n) {
            return Err(PivotError::BadSplitting("register qubit out of range".into()));
        }
        let block_qubits = (0..n).filter(|q| register_qubits.binary_search(q).is_err()).collect();
        Ok(Self {
            n,
            block_qubits,
            register_qubits,
        })
    }

    /// The split with the last `s` qubits as the register.
    pub fn trailing(n: usize, s: usize) -> Self {
        Self::from_register(n, (n - s..n).collect()).expect("in range")
    }

    pub fn s(&self) -> usize {
        self.register_qubits.len()
    }

    fn gather(&self, qs: &[usize], x: usize) -> usize {
        qs.iter()
            .fold(0, |acc, &q| (acc << 1) | ((x >> (self.n - 1 - q)) & 1))
    }

    pub fn block_of(&self, x: usize) -> usize {
        self.gather(&self.block_qubits, x)
    }

    pub fn register_of(&self, x: usize) -> usize {
        self.gather(&self.register_qubits, x)
    }

    /// Global index with the given block and register parts.
    pub fn compose(&self, block: usize, reg: usize) -> usize {
        let mut x = 0;
        let nb = self.block_qubits.len();
        for (r, &q) in self.block_qubits.iter().enumerate() {
            x |= ((block >> (nb - 1 - r)) & 1) << (self.n - 1 - q);
        }
        let s = self.s();
        for (r, &q) in self.register_qubits.iter().enumerate() {
            x |= ((reg >> (s - 1 - r)) & 1) << (self.n - 1 - q);
        }
        x
    }

    fn bit(&self, x: usize, q: usize) -> bool {
        (x >> (self.n - 1 - q)) & 1 == 1
    }
}

/// Largest block population of a splitting and every block reaching it.
fn fullest_blocks(split: &QubitSplitting, pattern: &[usize]) -> (usize, Vec<usize>) {
    let mut counts = std::collections::BTreeMap::new();
    for &x in pattern {
        *counts.entry(split.block_of(x)).or_insert(0usize) += 1;
    }
    let max = counts.values().copied().max().unwrap_or(0);
    let blocks = counts.into_iter().filter(|&(_, c)| c == max).map(|(b, _)| b).collect();
    (max, blocks)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All `s`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..s).collect();
    loop {
        out.push(idx.clone());
        let Some(p) = (0..s).rev().find(|&p| idx[p] < n - s + p) else {
            return out;
        };
        idx[p] += 1;
        for r in p + 1..s {
            idx[r] = idx[r - 1] + 1;
        }
    }
}

/// Chooses the splitting whose best block holds the most pattern elements,
/// breaking ties by the total Hamming distance of the insertion plan.
///
/// All `C(n, s)` splittings are tried when there are at most `samples` of them;
/// otherwise `samples` distinct register subsets are drawn with a generator
/// seeded by `seed`. Returns the splitting and its target block.
pub fn choose_splitting(
    pattern: &[usize],
    n: usize,
    s: usize,
    samples: usize,
    seed: u64,
) -> Result<(QubitSplitting, usize), PivotError> {
    if s > n {
        return Err(PivotError::SplitTooLarge { s, n });
    }
    if pattern.len() > 1usize << s {
        return Err(PivotError::Infeasible {
            nnz: pattern.len(),
            capacity: 1 << s,
        });
    }
    let candidates: Vec<Vec<usize>> = if binomial(n, s) <= samples.max(1) as u128 {
        combinations(n, s)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(samples);
        while out.len() < samples {
            let mut reg = rand::seq::index::sample(&mut rng, n, s).into_vec();
            reg.sort_unstable();
            if seen.insert(reg.clone()) {
                out.push(reg);
            }
        }
        out
    };
    let mut best_count = 0;
    let mut tied: Vec<(QubitSplitting, usize)> = Vec::new();
    for reg in candidates {
        let split = QubitSplitting::from_register(n, reg)?;
        let (count, blocks) = fullest_blocks(&split, pattern);
        if count > best_count {
            best_count = count;
            tied.clear();
        }
        if count == best_count {
            tied.extend(blocks.into_iter().map(|b| (split.clone(), b)));
        }
    }
    // among equally full splittings, the cheapest insertion plan wins
    let mut best: Option<(usize, QubitSplitting, usize)> = None;
    for (split, block) in tied {
        let plan = pivot_plan(pattern, &split, block)?;
        let cost: usize = plan.steps.iter().map(|st| st.distance).sum();
        if best.as_ref().is_none_or(|(c, _, _)| cost < *c) {
            best = Some((cost, split, block));
        }
    }
    let (_, split, block) = best.expect("at least one candidate");
    Ok((split, block))
}

/// Multi-source BFS on the `s`-dimensional hypercube: distance from every
/// vertex to the nearest vertex in `sources`.
pub fn hypercube_distances(s: usize, sources: &[usize]) -> Vec<u32> {
    let dim = 1usize << s;
    let mut dist = vec![u32::MAX; dim];
    let mut queue = VecDeque::new();
    for &r in sources {
        if dist[r] != 0 {
            dist[r] = 0;
            queue.push_back(r);
        }
    }
    while let Some(r) = queue.pop_front() {
        for b in 0..s {
            let nb = r ^ (1 << b);
            if dist[nb] == u32::MAX {
                dist[nb] = dist[r] + 1;
                queue.push_back(nb);
            }
        }
    }
    dist
}

#[derive(Debug, Clone, PartialEq)]
pub struct InsertionStep {
    /// Index of the moved entry before the step.
    pub source: usize,
    /// Its index after the step, inside the target block.
    pub slot: usize,
    /// Hamming distance between source and slot.
    pub distance: usize,
    pub gates: Vec<Gate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PivotPlan {
    pub splitting: QubitSplitting,
    pub target_block: usize,
    pub steps: Vec<InsertionStep>,
}

impl PivotPlan {
    pub fn gates(&self) -> impl Iterator<Item = &Gate> + '_ {
        self.steps.iter().flat_map(|s| s.gates.iter())
    }

    /// Plan gates followed by the X layer that moves the target block to block 0.
    pub fn gates_to_zero_block(&self) -> Vec<Gate> {
        let mut out: Vec<Gate> = self.gates().cloned().collect();
        let nb = self.splitting.block_qubits.len();
        for (r, &q) in self.splitting.block_qubits.iter().enumerate() {
            if (self.target_block >> (nb - 1 - r)) & 1 == 1 {
                out.push(Gate::x(q));
            }
        }
        out
    }
}

fn image_of(g: &Gate, n: usize, x: usize) -> usize {
    g.basis_image(n, x).expect("pivot gates are monomial").0
}

/// Greedy insertion plan moving every element of `pattern` into `target_block`.
///
/// At each step the outside entry and free slot with the smallest Hamming
/// distance are chosen (ties to the lowest source, then the lowest slot).
pub fn pivot_plan(
    pattern: &[usize],
    splitting: &QubitSplitting,
    target_block: usize,
) -> Result<PivotPlan, PivotError> {
    let n = splitting.n;
    let s = splitting.s();
    if splitting.block_qubits.len() + s != n {
        return Err(PivotError::BadSplitting("subsets do not cover the register".into()));
    }
    if target_block >= 1usize << (n - s) {
        return Err(PivotError::BadSplitting("target block out of range".into()));
    }
    if pattern.len() > 1usize << s {
        return Err(PivotError::Infeasible {
            nnz: pattern.len(),
            capacity: 1 << s,
        });
    }
    let mut live: BTreeSet<usize> = pattern.iter().copied().collect();
    let mut steps = Vec::new();
    loop {
        let occupied: HashSet<usize> = live
            .iter()
            .filter(|&&x| splitting.block_of(x) == target_block)
            .map(|&x| splitting.register_of(x))
            .collect();
        if occupied.len() == live.len() {
            break;
        }
        let free: Vec<usize> = (0..1usize << s).filter(|r| !occupied.contains(r)).collect();
        let dist = hypercube_distances(s, &free);
        let (source, d_r) = live
            .iter()
            .filter(|&&x| splitting.block_of(x) != target_block)
            .map(|&x| {
                let d_c = (splitting.block_of(x) ^ target_block).count_ones() as usize;
                (x, d_c + dist[splitting.register_of(x)] as usize, dist[splitting.register_of(x)])
            })
            .min_by_key(|&(x, d, _)| (d, x))
            .map(|(x, _, d_r)| (x, d_r))
            .expect("an outside entry exists");
        let r_src = splitting.register_of(source);
        let slot_reg = *free
            .iter()
            .filter(|&&r| (r ^ r_src).count_ones() == d_r)
            .min()
            .expect("BFS distance is attained");
        let slot = splitting.compose(target_block, slot_reg);
        let gates = insertion_gates(splitting, source, slot);
        for g in &gates {
            live = live.into_iter().map(|x| image_of(g, n, x)).collect();
        }
        debug_assert!(live.contains(&slot));
        steps.push(InsertionStep {
            source,
            slot,
            distance: (source ^ slot).count_ones() as usize,
            gates,
        });
    }
    Ok(PivotPlan {
        splitting: splitting.clone(),
        target_block,
        steps,
    })
}

/// Gates moving `source` (outside the target block) onto `slot` while leaving
/// every entry of the target block in place.
fn insertion_gates(split: &QubitSplitting, source: usize, slot: usize) -> Vec<Gate> {
    let q = *split
        .block_qubits
        .iter()
        .find(|&&q| split.bit(source, q) != split.bit(slot, q))
        .expect("source lies outside the target block");
    let pol = split.bit(source, q);
    let mut gates = Vec::new();
    for t in 0..split.n {
        if t != q && split.bit(source, t) != split.bit(slot, t) {
            gates.push(if pol {
                Gate::cnot(q, t)
            } else {
                Gate::mcx(vec![Control::off(q)], t)
            });
        }
    }
    let controls: Vec<Control> = split
        .register_qubits
        .iter()
        .map(|&c| Control {
            qubit: c,
            polarity: split.bit(slot, c),
        })
        .collect();
    gates.push(match controls.len() {
        0 => Gate::x(q),
        2 => Gate::Mcx {
            controls,
            target: q,
            relative_phase: true,
        },
        _ => Gate::mcx(controls, q),
    });
    gates
}

/// Sparse state preparation: the circuit, its pivot plan, and the reduced
/// `s`-qubit state prepared by the dense block.
#[derive(Debug, Clone)]
pub struct SspResult {
    pub circuit: StructuredCircuit,
    pub plan: PivotPlan,
    pub reduced: SparseState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SspOptions {
    pub samples: usize,
    pub seed: u64,
}

impl Default for SspOptions {
    fn default() -> Self {
        Self {
            samples: 100,
            seed: 0,
        }
    }
}

/// Applies monomial gates to a sparse state.
pub fn apply_monomial(v: &SparseState, gates: &[Gate]) -> SparseState {
    let n = v.n as usize;
    let mut out = v.clone();
    for g in gates {
        out.entries = out
            .entries
            .iter()
            .map(|(&x, &a)| {
                let (y, p) = g.basis_image(n, x).expect("monomial gate");
                (y, p * a)
            })
            .collect();
    }
    out
}

/// Pivots `v` into block 0 of a splitting with `s = ceil(log2 nnz)` register
/// qubits. Returns the plan, the forward gates, and the reduced state.
pub fn pivot_state(v: &SparseState, opts: &SspOptions) -> Result<(PivotPlan, Vec<Gate>, SparseState), PivotError> {
    let support: Vec<usize> = v.support().collect();
    if support.is_empty() {
        return Err(PivotError::ZeroVector);
    }
    let n = v.n as usize;
    let s = ceil_log2(support.len()) as usize;
    let (split, block) = choose_splitting(&support, n, s, opts.samples, opts.seed)?;
    let plan = pivot_plan(&support, &split, block)?;
    let forward = plan.gates_to_zero_block();
    let moved = apply_monomial(v, &forward);
    let mut reduced = SparseState::new(s as u32);
    for (&x, &a) in &moved.entries {
        debug_assert_eq!(split.block_of(x), 0);
        reduced.entries.insert(split.register_of(x), a);
    }
    Ok((plan, forward, reduced))
}

/// Circuit `C` with `C|0...0> = v`: a dense preparation of the reduced state on
/// the register qubits followed by the inverse pivot.
pub fn sparse_state_prep(v: &SparseState, opts: &SspOptions) -> Result<SspResult, PivotError> {
    let (plan, forward, reduced) = pivot_state(v, opts)?;
    let n = v.n as usize;
    let mut circuit = StructuredCircuit::new(n);
    if reduced.n == 0 {
        let a = reduced.get(0);
        if (a - ONE).norm() > ZERO_TOL {
            let p: Amplitude = cis(arg0(a));
            circuit.push(Gate::Single {
                target: 0,
                matrix: [[p, Amplitude::new(0.0, 0.0)], [Amplitude::new(0.0, 0.0), p]],
            });
        }
    } else {
        circuit.push(Gate::SpBlock {
            qubits: plan.splitting.register_qubits.clone(),
            state: reduced.clone(),
            inverted: false,
        });
    }
    circuit.extend(forward.iter().rev().map(Gate::dagger));
    Ok(SspResult {
        circuit,
        plan,
        reduced,
    })
}
