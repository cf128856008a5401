//! Experiment configuration, orchestration and result files.
//!
//! Every file written here starts with `#` lines carrying the tool version,
//! the config hash and the master seed. CSV readers should treat `#` as a
//! comment character.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::frobenius::{
    make_plan, BaseSamples, FrobeniusConfig, FrobeniusError, PreparedOutcomes, Repetitions,
    SigmaSampling, estimate_with_candidate,
};
use crate::pauli::IdentityFill;
use crate::seed::{derive_seed, stream};
use crate::state::{exact_fidelity, exact_frobenius, StateError, StateVector};
use crate::tomography::{
    build_measurement_set, execute_plan, plan_accounting, reconstruct, total_copies, CellSize,
    Constants, NodeStatus, TomographyError,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration:\n{}", format_fields(.0))]
    Invalid(Vec<FieldError>),
    #[error("config file: {0}")]
    ConfigParse(String),
    #[error("{failed} of {total} trials failed (threshold {threshold})")]
    TooManyFailures { failed: usize, total: usize, threshold: f64 },
    #[error("states have {left} and {right} qubits")]
    DimensionMismatch { left: usize, right: usize },
    #[error(transparent)]
    Tomography(#[from] TomographyError),
    #[error(transparent)]
    Frobenius(#[from] FrobeniusError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// 2 for validation errors, 3 for too many failed trials, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Invalid(_) | HarnessError::ConfigParse(_) | HarnessError::DimensionMismatch { .. } => 2,
            HarnessError::TooManyFailures { .. } => 3,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldError {
    pub field: &'static str,
    pub message: String,
}

fn format_fields(errors: &[FieldError]) -> String {
    errors
        .iter()
        .map(|e| format!("  {}: {}", e.field, e.message))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SigmaMode {
    Faithful,
    VarianceReduced,
}

impl From<SigmaMode> for SigmaSampling {
    fn from(m: SigmaMode) -> Self {
        match m {
            SigmaMode::Faithful => SigmaSampling::Faithful,
            SigmaMode::VarianceReduced => SigmaSampling::VarianceReduced,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FillMode {
    Z,
    Random,
}

impl From<FillMode> for IdentityFill {
    fn from(m: FillMode) -> Self {
        match m {
            FillMode::Z => IdentityFill::Z,
            FillMode::Random => IdentityFill::Random,
        }
    }
}

/// Flat experiment configuration. Counts of 0 for `m0` and the repetition
/// fields select the formula values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    pub trials: usize,
    /// `C` in the replica count.
    pub budget: f64,
    pub poly_exponent: f64,
    pub m0: usize,
    pub repetitions: usize,
    pub gamma_scale: f64,
    pub net_scale: f64,
    pub sigma_sampling: SigmaMode,
    pub identity_fill: FillMode,
    pub rescale_accuracy: bool,
    /// Literal constants; plan-size accounting only.
    pub paper_constants: bool,
    /// Target error of `estimate`.
    pub gamma: f64,
    pub estimate_m0: usize,
    pub estimate_repetitions: usize,
    pub estimate_repeats: usize,
    pub bench_n: Vec<usize>,
    pub bench_eps: Vec<f64>,
    /// Largest tolerated fraction of failed `run` trials before exit code 3.
    pub failure_threshold: f64,
    pub state_file: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let desk = Constants::desk();
        let m0 = match desk.frobenius.base_samples {
            BaseSamples::Fixed(m) => m,
            BaseSamples::Default => 0,
        };
        let repetitions = match desk.frobenius.repetitions {
            Repetitions::Fixed(k) => k,
            Repetitions::Formula => 0,
        };
        Self {
            n: 3,
            eps: 0.1,
            delta: 0.1,
            seed: 1,
            trials: 20,
            budget: desk.budget,
            poly_exponent: desk.poly_exponent,
            m0,
            repetitions,
            gamma_scale: desk.gamma_scale,
            net_scale: desk.net_scale,
            sigma_sampling: SigmaMode::Faithful,
            identity_fill: FillMode::Z,
            rescale_accuracy: desk.rescale_accuracy,
            paper_constants: false,
            gamma: 0.25,
            estimate_m0: 0,
            estimate_repetitions: 15,
            estimate_repeats: 20,
            bench_n: vec![2, 3],
            bench_eps: vec![0.1],
            failure_threshold: 0.2,
            state_file: None,
            out: PathBuf::from("results"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::ConfigParse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of SHA-256 over the canonical TOML form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let mut errors = Vec::new();
        let mut bad = |field, message: &str| {
            errors.push(FieldError {
                field,
                message: message.to_string(),
            })
        };
        if self.n == 0 || self.n > 20 {
            bad("n", "must be between 1 and 20");
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            bad("eps", "must lie in (0, 1]");
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            bad("delta", "must lie in (0, 1)");
        }
        if !(self.budget >= 1.0) {
            bad("budget", "must be at least 1");
        }
        if !(self.poly_exponent >= 0.0) {
            bad("poly_exponent", "must be nonnegative");
        }
        if self.m0 % 4 != 0 {
            bad("m0", "must be a multiple of 4 (0 selects the formula)");
        }
        if self.estimate_m0 % 4 != 0 {
            bad("estimate_m0", "must be a multiple of 4 (0 selects the formula)");
        }
        if !(self.gamma_scale > 0.0) {
            bad("gamma_scale", "must be positive");
        }
        if !(self.gamma_scale < 2.0) {
            bad("gamma_scale", "must be below 2 so every grid accuracy is valid");
        }
        if !(self.net_scale > 0.0) {
            bad("net_scale", "must be positive");
        }
        if !(self.gamma > 0.0) {
            bad("gamma", "must be positive");
        }
        if !(0.0..=1.0).contains(&self.failure_threshold) {
            bad("failure_threshold", "must lie in [0, 1]");
        }
        if self.bench_n.iter().any(|&n| n == 0 || n > 20) {
            bad("bench_n", "entries must be between 1 and 20");
        }
        if self.bench_eps.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            bad("bench_eps", "entries must lie in (0, 1]");
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Invalid(errors))
        }
    }

    pub fn constants(&self) -> Constants {
        if self.paper_constants {
            return Constants::paper();
        }
        Constants {
            budget: self.budget,
            poly_exponent: self.poly_exponent,
            gamma_scale: self.gamma_scale,
            net_scale: self.net_scale,
            frobenius: FrobeniusConfig {
                base_samples: fixed_or_default(self.m0),
                repetitions: fixed_or_formula(self.repetitions),
                sigma: self.sigma_sampling.into(),
                identity_fill: self.identity_fill.into(),
            },
            rescale_accuracy: self.rescale_accuracy,
        }
    }

    fn estimate_config(&self) -> FrobeniusConfig {
        FrobeniusConfig {
            base_samples: fixed_or_default(self.estimate_m0),
            repetitions: fixed_or_formula(self.estimate_repetitions),
            sigma: self.sigma_sampling.into(),
            identity_fill: self.identity_fill.into(),
        }
    }

    /// The `#` lines every output file starts with.
    pub fn header(&self, kind: &str) -> String {
        format!(
            "# pauli-tomo {VERSION} {kind}\n# config_hash={} seed={}\n",
            self.hash(),
            self.seed
        )
    }
}

fn fixed_or_default(m0: usize) -> BaseSamples {
    if m0 == 0 {
        BaseSamples::Default
    } else {
        BaseSamples::Fixed(m0)
    }
}

fn fixed_or_formula(k: usize) -> Repetitions {
    if k == 0 {
        Repetitions::Formula
    } else {
        Repetitions::Fixed(k)
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, HarnessError> {
    std::fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn csv_writer<W: Write>(mut w: W, header: &str) -> Result<csv::Writer<W>, HarnessError> {
    w.write_all(header.as_bytes())?;
    Ok(csv::Writer::from_writer(w))
}

/// Opens a CSV written by this module, skipping `#` lines.
pub fn csv_reader<R: std::io::Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r)
}

pub const PLAN_CELLS_COLUMNS: [&str; 5] = ["level", "eps_prime", "slots", "replicas", "copies"];
pub const RUNS_COLUMNS: [&str; 10] = [
    "trial",
    "n",
    "eps",
    "fidelity",
    "passed",
    "copies_planned",
    "copies_used",
    "nodes_ok",
    "nodes_fallback",
    "error",
];
pub const ESTIMATE_COLUMNS: [&str; 7] = [
    "repeat",
    "d_hat",
    "infidelity_distance",
    "oracle",
    "error",
    "within_gamma",
    "rho_copies",
];
pub const BENCH_COLUMNS: [&str; 6] = ["n", "eps", "trial", "planned_copies", "fidelity", "runtime_seconds"];

/// Totals of a measurement plan.
#[derive(Clone, Debug)]
pub struct PlanReport {
    pub cells: Vec<CellSize>,
    pub total: u128,
    /// Set when the plan itself was written.
    pub plan_file: Option<PathBuf>,
}

/// Builds the plan for `(n, ε, seed)` and writes `plan.txt` and
/// `plan_cells.csv`. Under `paper_constants` only the counts are produced.
pub fn cmd_plan(config: &ExperimentConfig) -> Result<PlanReport, HarnessError> {
    config.validate()?;
    let constants = config.constants();
    let (cells, plan_file) = if config.paper_constants {
        (plan_accounting(config.n, config.eps, config.delta, &constants)?, None)
    } else {
        let plan = build_measurement_set(
            config.n,
            config.eps,
            config.delta,
            &constants,
            &mut stream(config.seed, "plan", 0),
        )?;
        let mut w = create(&config.out, "plan.txt")?;
        w.write_all(config.header("plan").as_bytes())?;
        plan.write_text(&mut w)?;
        w.flush()?;
        (plan.accounting(), Some(config.out.join("plan.txt")))
    };
    let mut w = csv_writer(create(&config.out, "plan_cells.csv")?, &config.header("plan-cells"))?;
    w.write_record(PLAN_CELLS_COLUMNS)?;
    for c in &cells {
        w.write_record([
            c.level.to_string(),
            c.eps_prime.to_string(),
            c.slots.to_string(),
            c.replicas.to_string(),
            c.copies().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(PlanReport {
        total: total_copies(&cells),
        cells,
        plan_file,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NodeSummary {
    pub prefix: String,
    pub status: &'static str,
    pub eps_prime: Option<f64>,
    pub hits: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialResult {
    pub config_hash: String,
    pub seed: u64,
    pub version: &'static str,
    pub trial: usize,
    pub fidelity: Option<f64>,
    pub passed: bool,
    pub copies_planned: u64,
    pub copies_used: u64,
    pub nodes: Vec<NodeSummary>,
    pub wall_seconds: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub config_hash: String,
    pub trials: Vec<TrialResult>,
}

impl RunResult {
    pub fn passed(&self) -> usize {
        self.trials.iter().filter(|t| t.passed).count()
    }

    pub fn failed(&self) -> usize {
        self.trials.len() - self.passed()
    }
}

/// One tomography trial: Haar-random (or fixed) state, plan, execution,
/// reconstruction and the exact fidelity.
pub fn run_trial(config: &ExperimentConfig, trial: usize, fixed: Option<&StateVector>) -> TrialResult {
    let start = Instant::now();
    let mut result = TrialResult {
        config_hash: config.hash(),
        seed: config.seed,
        version: VERSION,
        trial,
        fidelity: None,
        passed: false,
        copies_planned: 0,
        copies_used: 0,
        nodes: Vec::new(),
        wall_seconds: 0.0,
        error: None,
    };
    let t = trial as u64;
    let outcome = (|| -> Result<(), HarnessError> {
        let psi = match fixed {
            Some(s) => s.clone(),
            None => StateVector::haar_random(config.n, &mut stream(config.seed, "state", t)),
        };
        let plan = build_measurement_set(
            config.n,
            config.eps,
            config.delta,
            &config.constants(),
            &mut stream(config.seed, "plan", t),
        )?;
        result.copies_planned = plan.total_copies();
        let log = execute_plan(&plan, &psi, &mut stream(config.seed, "execute", t))?;
        result.copies_used = log.copies_used();
        let rec = reconstruct(&plan, &log, derive_seed(config.seed, "reconstruct", t))?;
        let f = exact_fidelity(&rec.state, &psi)?;
        result.fidelity = Some(f);
        result.passed = f >= 1.0 - config.eps;
        result.nodes = rec
            .nodes
            .iter()
            .map(|n| NodeSummary {
                prefix: n.prefix.to_token(),
                status: n.status.as_str(),
                eps_prime: n.eps_prime,
                hits: n.hits,
            })
            .collect();
        Ok(())
    })();
    if let Err(e) = outcome {
        result.error = Some(e.to_string());
    }
    result.wall_seconds = start.elapsed().as_secs_f64();
    result
}

/// Runs all trials (in parallel, results in trial order) and writes
/// `runs.csv` and `runs.jsonl`.
pub fn cmd_run(config: &ExperimentConfig) -> Result<RunResult, HarnessError> {
    config.validate()?;
    if config.paper_constants {
        return Err(HarnessError::Invalid(vec![FieldError {
            field: "paper_constants",
            message: "paper_constants supports plan accounting only".into(),
        }]));
    }
    let fixed = match &config.state_file {
        Some(p) => {
            let s = StateVector::load(p)?;
            if s.qubits() != config.n {
                return Err(HarnessError::DimensionMismatch {
                    left: s.qubits(),
                    right: config.n,
                });
            }
            Some(s)
        }
        None => None,
    };
    let trials: Vec<TrialResult> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, t, fixed.as_ref()))
        .collect();
    let result = RunResult {
        config_hash: config.hash(),
        trials,
    };
    write_runs(config, &result)?;
    let failed = result.failed();
    if config.trials > 0 && failed as f64 > config.failure_threshold * config.trials as f64 {
        return Err(HarnessError::TooManyFailures {
            failed,
            total: config.trials,
            threshold: config.failure_threshold,
        });
    }
    Ok(result)
}

fn write_runs(config: &ExperimentConfig, result: &RunResult) -> Result<(), HarnessError> {
    let mut w = csv_writer(create(&config.out, "runs.csv")?, &config.header("runs"))?;
    w.write_record(RUNS_COLUMNS)?;
    for t in &result.trials {
        let ok = t.nodes.iter().filter(|n| n.status == NodeStatus::Ok.as_str()).count();
        w.write_record([
            t.trial.to_string(),
            config.n.to_string(),
            config.eps.to_string(),
            t.fidelity.map(|f| f.to_string()).unwrap_or_default(),
            t.passed.to_string(),
            t.copies_planned.to_string(),
            t.copies_used.to_string(),
            ok.to_string(),
            (t.nodes.len() - ok).to_string(),
            t.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    let mut j = create(&config.out, "runs.jsonl")?;
    for t in &result.trials {
        serde_json::to_writer(&mut j, t)?;
        j.write_all(b"\n")?;
    }
    j.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateRow {
    pub repeat: usize,
    pub d_hat: f64,
    pub oracle: f64,
    pub rho_copies: usize,
}

impl EstimateRow {
    pub fn error(&self) -> f64 {
        (self.d_hat - self.oracle).abs()
    }
}

/// Repeats the Frobenius estimate of `‖ρ − σ‖_F` and writes `estimate.csv`.
/// Only copies of `ρ` are counted; `σ` draws are classical.
pub fn cmd_estimate(config: &ExperimentConfig, rho: &StateVector, sigma: &StateVector) -> Result<Vec<EstimateRow>, HarnessError> {
    config.validate()?;
    if rho.qubits() != sigma.qubits() {
        return Err(HarnessError::DimensionMismatch {
            left: rho.qubits(),
            right: sigma.qubits(),
        });
    }
    let m = rho.qubits();
    let oracle = exact_frobenius(rho, sigma)?;
    let fc = config.estimate_config();
    let mut rows = Vec::with_capacity(config.estimate_repeats);
    for r in 0..config.estimate_repeats {
        let t = r as u64;
        let plan = make_plan(m, config.gamma, config.delta, &fc, &mut stream(config.seed, "estimate-plan", t))?;
        let prepared = PreparedOutcomes::sample_pure(&plan, rho, &mut stream(config.seed, "estimate-rho", t))?;
        let est = estimate_with_candidate(&plan, &prepared, sigma, fc.sigma, &mut stream(config.seed, "estimate-sigma", t))?;
        rows.push(EstimateRow {
            repeat: r,
            d_hat: est.frobenius,
            oracle,
            rho_copies: plan.total_queries(),
        });
    }
    let header = format!(
        "{}# gamma={} rho_copies counts measured copies of rho only; sigma draws are classical\n",
        config.header("estimate"),
        config.gamma
    );
    let mut w = csv_writer(create(&config.out, "estimate.csv")?, &header)?;
    w.write_record(ESTIMATE_COLUMNS)?;
    for row in &rows {
        w.write_record([
            row.repeat.to_string(),
            row.d_hat.to_string(),
            (row.d_hat / std::f64::consts::SQRT_2).to_string(),
            row.oracle.to_string(),
            row.error().to_string(),
            (row.error() <= config.gamma).to_string(),
            row.rho_copies.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub eps: f64,
    pub trial: usize,
    pub planned_copies: u128,
    pub fidelity: Option<f64>,
    pub runtime_seconds: f64,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of `log2(copies)` against `n`, per `ε`.
    pub slopes: Vec<(f64, f64)>,
}

/// Least-squares slope of `y` on `x`; `None` with fewer than two distinct x.
pub fn regression_slope(points: &[(f64, f64)]) -> Option<f64> {
    let k = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// One row per `(n, ε, trial)` over `bench_n × bench_eps`. Under
/// `paper_constants` only the planned copies are computed (one row, no fidelity).
pub fn cmd_bench(config: &ExperimentConfig) -> Result<BenchReport, HarnessError> {
    config.validate()?;
    let mut rows = Vec::new();
    for &eps in &config.bench_eps {
        for &n in &config.bench_n {
            let c = ExperimentConfig {
                n,
                eps,
                ..config.clone()
            };
            let planned = total_copies(&plan_accounting(n, eps, c.delta, &c.constants())?);
            if config.paper_constants {
                rows.push(BenchRow {
                    n,
                    eps,
                    trial: 0,
                    planned_copies: planned,
                    fidelity: None,
                    runtime_seconds: 0.0,
                });
                continue;
            }
            let results: Vec<TrialResult> = (0..c.trials)
                .into_par_iter()
                .map(|t| run_trial(&c, t, None))
                .collect();
            for r in results {
                rows.push(BenchRow {
                    n,
                    eps,
                    trial: r.trial,
                    planned_copies: planned,
                    fidelity: r.fidelity,
                    runtime_seconds: r.wall_seconds,
                });
            }
        }
    }
    let slopes = config
        .bench_eps
        .iter()
        .filter_map(|&eps| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.eps == eps && r.trial == 0)
                .map(|r| (r.n as f64, (r.planned_copies as f64).log2()))
                .collect();
            regression_slope(&pts).map(|s| (eps, s))
        })
        .collect();
    let mut w = csv_writer(create(&config.out, "bench.csv")?, &config.header("bench"))?;
    w.write_record(BENCH_COLUMNS)?;
    for r in &rows {
        w.write_record([
            r.n.to_string(),
            r.eps.to_string(),
            r.trial.to_string(),
            r.planned_copies.to_string(),
            r.fidelity.map(|f| f.to_string()).unwrap_or_default(),
            r.runtime_seconds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(BenchReport { rows, slopes })
}

/// A named quick check and whether it passed.
#[derive(Clone, Debug)]
pub struct SelfCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Fast end-to-end checks of the installed build.
pub fn cmd_selftest(seed: u64) -> Vec<SelfCheck> {
    let mut checks = Vec::new();
    let mut rng = stream(seed, "selftest", 0);

    let a = StateVector::haar_random(2, &mut rng);
    let b = StateVector::haar_random(2, &mut rng);
    let dense = exact_frobenius(&a, &b).unwrap_or(f64::NAN);
    let mut sum = 0.0;
    for k in 0..16u64 {
        let label = crate::pauli::PauliLabel::from_index(2, k).expect("k < 16");
        let v = 0.5 * (a.pauli_expectation(&label).unwrap_or(f64::NAN) - b.pauli_expectation(&label).unwrap_or(f64::NAN));
        sum += v * v;
    }
    let via_paulis = 2.0 * 2.0 * (sum / 16.0).sqrt();
    checks.push(SelfCheck {
        name: "pauli-identity",
        passed: (dense - via_paulis).abs() < 1e-9,
        detail: format!("dense {dense:.12} pauli {via_paulis:.12}"),
    });

    let config = ExperimentConfig {
        n: 2,
        eps: 0.2,
        seed,
        ..Default::default()
    };
    let trial = run_trial(&config, 0, None);
    checks.push(SelfCheck {
        name: "tomography-n2",
        passed: trial.error.is_none() && trial.copies_used == trial.copies_planned,
        detail: format!("fidelity {:?} copies {}", trial.fidelity, trial.copies_used),
    });

    let est = ExperimentConfig {
        estimate_m0: 64,
        estimate_repetitions: 5,
        gamma: 0.5,
        ..config
    };
    let fc = est.estimate_config();
    let ok = make_plan(1, est.gamma, est.delta, &fc, &mut rng)
        .and_then(|plan| {
            let zero = StateVector::basis(1, 0);
            let one = StateVector::basis(1, 1);
            let prep = PreparedOutcomes::sample_pure(&plan, &zero, &mut rng)?;
            estimate_with_candidate(&plan, &prep, &one, fc.sigma, &mut rng)
        })
        .map(|e| (e.frobenius, (e.frobenius - 2f64.sqrt()).abs() <= 0.5));
    checks.push(SelfCheck {
        name: "frobenius-orthogonal",
        passed: matches!(ok, Ok((_, true))),
        detail: format!("{ok:?}"),
    });
    checks
}
