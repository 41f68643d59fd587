//! Command-line front end: `compile`, `verify`, `audit`, `order` and
//! `bench ssp`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 unparsable input or arguments,
//! 3 input rejected by validation, 4 simulation check failed.
//!
//! Matrix files are JSON in one of three shapes:
//!
//! ```json
//! {"n": 3, "m": 1, "entries": [[0, 0, 0.6, 0.0], [5, 1, 0.0, -1.0]]}
//! {"rows": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]}
//! {"permutation": [2, 0, 3, 1]}
//! ```
//!
//! `entries` rows are `[row, col, re, im]`; `rows` is a dense row-major array
//! of `[re, im]` pairs; `permutation` maps each basis state to its image.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::json;
use thiserror::Error;

use crate::costs::{audit_with, bounds, AncillaRegime, CostModel, CostReport};
use crate::gates::{equivalent, EquivalenceMode, StructuredCircuit, SIMULATION_CAP};
use crate::methods::{self, DecompositionResult, MethodError};
use crate::numerics::{Amplitude, DenseMatrix, SparseIsometry, SparseState};
use crate::ordering::{self, envelope, EliminationStrategy};
use crate::pivoting::{sparse_state_prep, SspOptions};
use crate::random::random_sparse_state;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Verify(_) => 4,
        }
    }
}

impl From<MethodError> for CliError {
    fn from(e: MethodError) -> Self {
        CliError::Validation(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "sparse-iso", version, about = "Circuit synthesis for sparse states and isometries")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decompose a matrix file into a circuit.
    Compile(CompileArgs),
    /// Simulate a circuit and compare it with a matrix.
    Verify(VerifyArgs),
    /// Print the CNOT audit of a circuit.
    Audit(AuditArgs),
    /// Compute an elimination strategy and envelope statistics.
    Order(OrderArgs),
    /// Benchmarks.
    Bench {
        #[command(subcommand)]
        which: BenchCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// CNOT counts of sparse state preparation on random sparse states.
    Ssp(BenchSspArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Dense,
    Unitary,
    Sparse,
    FixedEnv,
    NoFillIn,
    Ssp,
    Perm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyKind {
    Identity,
    Greedy,
    /// Greedy column order with the row order recomputed for it.
    GreedyRows,
    /// Identity column order with the envelope-optimal row order.
    Rows,
    File,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "sparse")]
    pub method: Method,
    #[arg(long, default_value = "dirty:1")]
    pub regime: AncillaRegime,
    #[arg(long, value_enum, default_value = "greedy")]
    pub strategy: StrategyKind,
    /// JSON file with `rho` and `sigma`, for `--strategy file`.
    #[arg(long)]
    pub strategy_file: Option<PathBuf>,
    /// Circuit output (stdout when absent).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Audit output; defaults to the circuit path with `.audit.json`.
    #[arg(long)]
    pub audit: Option<PathBuf>,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Simulate the circuit before writing it.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Price multi-controlled NOTs with the split construction as well.
    #[arg(long)]
    pub split_mcx: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub circuit: PathBuf,
    pub matrix: PathBuf,
    /// Allow a free phase per column.
    #[arg(long)]
    pub up_to_diagonal: bool,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    pub circuit: PathBuf,
    #[arg(long, default_value = "dirty:1")]
    pub regime: AncillaRegime,
    #[arg(long)]
    pub split_mcx: bool,
    /// Print the full JSON report instead of the table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "greedy")]
    pub strategy: StrategyKind,
}

#[derive(Debug, Args)]
pub struct BenchSspArgs {
    /// Qubit counts: `10`, `8-16` or `8,10,12`.
    #[arg(long, default_value = "8-16")]
    pub n: String,
    /// Register sizes (nnz = 2^s), same syntax as `--n`.
    #[arg(long, default_value = "1-3")]
    pub s: String,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "none")]
    pub regime: AncillaRegime,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Price multi-controlled NOTs with the table rules only.
    #[arg(long)]
    pub table_only: bool,
    /// Simulate every circuit (n up to the simulation cap).
    #[arg(long)]
    pub verify: bool,
    /// Per-trial CSV (stdout when absent).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Per-(n, s) summary CSV.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

/// Parsed input matrix.
#[derive(Debug, Clone)]
pub enum MatrixInput {
    Isometry(SparseIsometry),
    Permutation(Vec<usize>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixFile {
    Sparse {
        n: u32,
        m: u32,
        entries: Vec<(usize, usize, f64, f64)>,
    },
    Dense {
        rows: Vec<Vec<[f64; 2]>>,
    },
    Permutation {
        permutation: Vec<usize>,
    },
}

pub fn parse_matrix(text: &str) -> Result<MatrixInput, CliError> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    let parse = |e: crate::numerics::NumericsError| CliError::Parse(e.to_string());
    Ok(match file {
        MatrixFile::Sparse { n, m, entries } => {
            if m > n || n as usize >= usize::BITS as usize {
                return Err(CliError::Parse(format!("bad shape n={n}, m={m}")));
            }
            let it = entries.into_iter().map(|(i, j, re, im)| (i, j, Amplitude::new(re, im)));
            MatrixInput::Isometry(SparseIsometry::from_entries(n, m, it).map_err(parse)?)
        }
        MatrixFile::Dense { rows } => {
            let rows = rows
                .into_iter()
                .map(|r| r.into_iter().map(|[re, im]| Amplitude::new(re, im)).collect())
                .collect();
            let d = DenseMatrix::from_rows(rows).map_err(parse)?;
            MatrixInput::Isometry(SparseIsometry::from_dense(&d).map_err(parse)?)
        }
        MatrixFile::Permutation { permutation } => MatrixInput::Permutation(permutation),
    })
}

/// Sparse matrix file text for `w`.
pub fn matrix_to_json(w: &SparseIsometry) -> String {
    let entries: Vec<_> = w.entries().map(|(i, j, a)| json!([i, j, a.re, a.im])).collect();
    serde_json::to_string_pretty(&json!({"n": w.n(), "m": w.m(), "entries": entries})).expect("serializable")
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn isometry(input: MatrixInput) -> Result<SparseIsometry, CliError> {
    match input {
        MatrixInput::Isometry(w) => Ok(w),
        MatrixInput::Permutation(p) => {
            crate::numerics::check_bijection(&p, p.len()).map_err(|e| CliError::Validation(e.to_string()))?;
            let n = crate::numerics::log2_exact(p.len()).map_err(|e| CliError::Validation(e.to_string()))?;
            let it = p.iter().enumerate().map(|(x, &y)| (y, x, crate::numerics::ONE));
            SparseIsometry::from_entries(n, n, it).map_err(|e| CliError::Validation(e.to_string()))
        }
    }
}

fn strategy_for(
    kind: StrategyKind,
    w: &SparseIsometry,
    file: Option<&Path>,
) -> Result<EliminationStrategy, CliError> {
    let s = match kind {
        StrategyKind::Identity => EliminationStrategy::identity(w.n_rows(), w.n_cols()),
        StrategyKind::Greedy => ordering::greedy_order(w),
        StrategyKind::GreedyRows => ordering::greedy_then_optimal_rows(w),
        StrategyKind::Rows => EliminationStrategy {
            rho: ordering::optimal_row_perm(w),
            sigma: (0..w.n_cols()).collect(),
        },
        StrategyKind::File => {
            let path = file.ok_or_else(|| CliError::Parse("--strategy file needs --strategy-file".into()))?;
            serde_json::from_str(&read(path)?).map_err(|e| CliError::Parse(e.to_string()))?
        }
    };
    s.validate(w.n_rows(), w.n_cols())
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(s)
}

fn model(regime: AncillaRegime, split: bool) -> CostModel {
    let m = CostModel::new(regime);
    if split {
        m.with_split_mcx()
    } else {
        m
    }
}

pub fn audit_json(report: &CostReport, regime: AncillaRegime) -> String {
    let by_kind: serde_json::Map<String, serde_json::Value> =
        report.by_kind().into_iter().map(|(k, c)| (k, json!(c))).collect();
    serde_json::to_string_pretty(&json!({
        "regime": regime.to_string(),
        "total": report.total,
        "by_kind": by_kind,
        "items": report.breakdown,
    }))
    .expect("serializable")
}

fn verify_circuit(c: &StructuredCircuit, target: &DenseMatrix, mode: &EquivalenceMode, tol: f64) -> Result<f64, CliError> {
    let e = equivalent(c, target, mode, tol).map_err(|e| CliError::Verify(e.to_string()))?;
    if e.ok {
        Ok(e.residual)
    } else {
        Err(CliError::Verify(format!("residual {:e} exceeds {tol:e}", e.residual)))
    }
}

pub fn cmd_compile(a: &CompileArgs) -> Result<(), CliError> {
    let input = parse_matrix(&read(&a.input)?)?;
    let opts = SspOptions {
        samples: a.samples,
        seed: a.seed,
    };
    let mut trace = None;
    let (circuit, mode, target) = match a.method {
        Method::Perm => {
            let w = isometry(input.clone())?;
            let MatrixInput::Permutation(p) = input else {
                return Err(CliError::Validation("--method perm needs a permutation file".into()));
            };
            let c = methods::perm_via_householder(&p).map_err(|e| CliError::Validation(e.to_string()))?;
            (c, EquivalenceMode::Exact, w)
        }
        Method::Ssp => {
            let w = isometry(input)?;
            if w.m() != 0 {
                return Err(CliError::Validation(format!("--method ssp needs one column, got 2^{}", w.m())));
            }
            w.validate_isometry(methods::ISOMETRY_TOL)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let r = sparse_state_prep(&w.column_state(0), &opts).map_err(|e| CliError::Validation(e.to_string()))?;
            (r.circuit, EquivalenceMode::Exact, w)
        }
        _ => {
            let w = isometry(input)?;
            let r: DecompositionResult = match a.method {
                Method::Dense => methods::dense_householder_iso(&w.to_dense(), a.regime)?,
                Method::Unitary => methods::dense_householder_unitary(&w.to_dense(), a.regime)?,
                Method::Sparse => {
                    let s = strategy_for(a.strategy, &w, a.strategy_file.as_deref())?;
                    methods::sparse_householder_iso(&w, &s, a.regime, &opts)?
                }
                Method::FixedEnv => {
                    let s = strategy_for(a.strategy, &w, a.strategy_file.as_deref())?;
                    methods::fixed_envelope_iso(&w, &s, a.regime, &opts)?
                }
                Method::NoFillIn => methods::no_fill_in_iso(&w, a.regime, &opts)?,
                Method::Perm | Method::Ssp => unreachable!(),
            };
            trace = Some(r.trace);
            (r.circuit, EquivalenceMode::Exact, w)
        }
    };
    log::info!("compiled {} gates on {} qubits", circuit.len(), circuit.total_qubits());
    if a.verify {
        if circuit.total_qubits() > SIMULATION_CAP {
            return Err(CliError::Verify(format!(
                "{} qubits exceed the simulation cap of {SIMULATION_CAP}",
                circuit.total_qubits()
            )));
        }
        let residual = verify_circuit(&circuit, &target.to_dense(), &mode, a.tol)?;
        log::info!("verified, residual {residual:e}");
    }
    let report = audit_with(&circuit, &model(a.regime, a.split_mcx)).map_err(|e| CliError::Validation(e.to_string()))?;
    let text = circuit.to_json();
    match &a.output {
        Some(p) => {
            write(p, &text)?;
            let audit_path = a.audit.clone().unwrap_or_else(|| p.with_extension("audit.json"));
            write(&audit_path, &audit_json(&report, a.regime))?;
        }
        None => {
            println!("{text}");
            if let Some(ap) = &a.audit {
                write(ap, &audit_json(&report, a.regime))?;
            }
        }
    }
    if let Some(tp) = &a.trace {
        let t = serde_json::to_string_pretty(&trace.unwrap_or_default()).expect("serializable");
        write(tp, &t)?;
    }
    eprint!("{}", report.table());
    Ok(())
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<(), CliError> {
    let c = StructuredCircuit::from_json(&read(&a.circuit)?).map_err(|e| CliError::Parse(e.to_string()))?;
    let w = isometry(parse_matrix(&read(&a.matrix)?)?)?;
    let mode = if a.up_to_diagonal {
        EquivalenceMode::UpToDiagonal
    } else {
        EquivalenceMode::Exact
    };
    let residual = verify_circuit(&c, &w.to_dense(), &mode, a.tol)?;
    println!("{}", json!({"ok": true, "residual": residual}));
    Ok(())
}

pub fn cmd_audit(a: &AuditArgs) -> Result<(), CliError> {
    let c = StructuredCircuit::from_json(&read(&a.circuit)?).map_err(|e| CliError::Parse(e.to_string()))?;
    let report = audit_with(&c, &model(a.regime, a.split_mcx)).map_err(|e| CliError::Validation(e.to_string()))?;
    if a.json {
        println!("{}", audit_json(&report, a.regime));
    } else {
        print!("{}", report.table());
    }
    Ok(())
}

pub fn cmd_order(a: &OrderArgs) -> Result<(), CliError> {
    let w = isometry(parse_matrix(&read(&a.input)?)?)?;
    let s = strategy_for(a.strategy, &w, None)?;
    let after = w
        .apply_permutations(&s.rho, &s.sigma)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let out = json!({
        "rho": s.rho,
        "sigma": s.sigma,
        "ed_before": envelope(&w).ed,
        "ed_after": envelope(&after).ed,
        "elim": ordering::elim_count(&w, &s),
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    Ok(())
}

/// Parses `10`, `8-16` or `8,10,12`.
pub fn parse_range(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Parse(format!("bad range '{s}'"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    if let Some((lo, hi)) = s.split_once('-') {
        let (lo, hi) = (num(lo)?, num(hi)?);
        if lo > hi {
            return Err(bad());
        }
        Ok((lo..=hi).collect())
    } else {
        s.split(',').map(num).collect()
    }
}

/// Formats `x` with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (5 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub s: usize,
    pub trial: usize,
    pub nnz: usize,
    pub cnots: u64,
    pub bound: f64,
}

fn trial_seed(seed: u64, n: usize, s: usize, trial: usize) -> u64 {
    // distinct streams per (n, s, trial), mixed so nearby seeds decorrelate
    let mut x = seed ^ ((n as u64) << 48) ^ ((s as u64) << 40) ^ trial as u64;
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Runs the sparse state preparation benchmark; rows are ordered by
/// `(n, s, trial)` regardless of scheduling.
pub fn bench_ssp(a: &BenchSspArgs) -> Result<Vec<BenchRow>, CliError> {
    let ns = parse_range(&a.n)?;
    let ss = parse_range(&a.s)?;
    let mut jobs = Vec::new();
    for &n in &ns {
        for &s in &ss {
            if s > n || n > 30 {
                return Err(CliError::Validation(format!("need s <= n <= 30, got n={n}, s={s}")));
            }
            jobs.extend((0..a.trials).map(|t| (n, s, t)));
        }
    }
    let cost_model = model(a.regime, !a.table_only);
    jobs.par_iter()
        .map(|&(n, s, t)| {
            let seed = trial_seed(a.seed, n, s, t);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = random_sparse_state(n as u32, 1 << s, &mut rng);
            let opts = SspOptions {
                samples: a.samples,
                seed,
            };
            let r = sparse_state_prep(&v, &opts).map_err(|e| CliError::Validation(e.to_string()))?;
            if a.verify && n <= SIMULATION_CAP {
                check_state(&r.circuit, &v)?;
            }
            let cnots = audit_with(&r.circuit, &cost_model)
                .map_err(|e| CliError::Validation(e.to_string()))?
                .total;
            Ok(BenchRow {
                n,
                s,
                trial: t,
                nnz: v.nnz(),
                cnots,
                bound: bounds::ssp_reference(n, s),
            })
        })
        .collect()
}

fn check_state(c: &StructuredCircuit, v: &SparseState) -> Result<(), CliError> {
    let mut x = vec![crate::numerics::ZERO; 1usize << c.n];
    x[0] = crate::numerics::ONE;
    for g in &c.gates {
        crate::gates::apply_gate(&mut x, c.total_qubits(), g).map_err(|e| CliError::Verify(e.to_string()))?;
    }
    let err = x
        .iter()
        .enumerate()
        .map(|(i, a)| (a - v.get(i)).norm())
        .fold(0.0, f64::max);
    if err > 1e-9 {
        return Err(CliError::Verify(format!("state error {err:e}")));
    }
    Ok(())
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("n,s,trial,nnz,cnots,bound\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{},{},{}\n", r.n, r.s, r.trial, r.nnz, r.cnots, sig6(r.bound)));
    }
    out
}

/// Per-(n, s) statistics: `(n, s, mean, standard error of the mean, bound)`.
pub fn bench_summary(rows: &[BenchRow]) -> Vec<(usize, usize, f64, f64, f64)> {
    let mut groups: std::collections::BTreeMap<(usize, usize), Vec<f64>> = Default::default();
    for r in rows {
        groups.entry((r.n, r.s)).or_default().push(r.cnots as f64);
    }
    groups
        .into_iter()
        .map(|((n, s), xs)| {
            let k = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / k;
            let var = if xs.len() > 1 {
                xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)
            } else {
                0.0
            };
            (n, s, mean, (var / k).sqrt(), bounds::ssp_reference(n, s))
        })
        .collect()
}

pub fn summary_csv(summary: &[(usize, usize, f64, f64, f64)]) -> String {
    let mut out = String::from("n,s,mean,sem,bound\n");
    for (n, s, mean, sem, bound) in summary {
        out.push_str(&format!("{n},{s},{},{},{}\n", sig6(*mean), sig6(*sem), sig6(*bound)));
    }
    out
}

pub fn cmd_bench_ssp(a: &BenchSspArgs) -> Result<(), CliError> {
    let rows = bench_ssp(a)?;
    let csv = bench_csv(&rows);
    match &a.output {
        Some(p) => write(p, &csv)?,
        None => print!("{csv}"),
    }
    let summary = bench_summary(&rows);
    let text = summary_csv(&summary);
    if let Some(p) = &a.summary {
        write(p, &text)?;
    }
    eprint!("{text}");
    Ok(())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Compile(a) => cmd_compile(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Audit(a) => cmd_audit(a),
        Command::Order(a) => cmd_order(a),
        Command::Bench {
            which: BenchCommand::Ssp(a),
        } => cmd_bench_ssp(a),
    }
}
