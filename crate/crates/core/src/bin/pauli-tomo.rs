use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pauli_tomo::harness::{
    cmd_bench, cmd_estimate, cmd_plan, cmd_run, cmd_selftest, ExperimentConfig, HarnessError,
};
use pauli_tomo::state::StateVector;

#[derive(Parser)]
#[command(name = "pauli-tomo", version, about = "Nonadaptive Pauli-measurement pure-state tomography")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; they override the constants file.
#[derive(Args)]
struct Common {
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Flat TOML file with any `ExperimentConfig` fields.
    #[arg(long, global = true)]
    constants_file: Option<PathBuf>,
    /// Literal constants (plan accounting only).
    #[arg(long, global = true)]
    paper_constants: bool,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the measurement plan and report its size.
    Plan,
    /// Run tomography trials against Haar-random or file-given states.
    Run {
        /// Amplitude file (`re im` per line) used in every trial.
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Estimate the Frobenius distance between two state files.
    Estimate {
        #[arg(long)]
        rho: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        repeats: Option<usize>,
    },
    /// Planned copies (and fidelity, unless --paper-constants) over a range.
    Bench {
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        eps_list: Option<Vec<f64>>,
    },
    /// Quick checks of this build.
    Selftest,
}

fn config(common: &Common) -> Result<ExperimentConfig, HarnessError> {
    let mut c = match &common.constants_file {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = common.n {
        c.n = v;
    }
    if let Some(v) = common.eps {
        c.eps = v;
    }
    if let Some(v) = common.delta {
        c.delta = v;
    }
    if let Some(v) = common.seed {
        c.seed = v;
    }
    if let Some(v) = common.trials {
        c.trials = v;
    }
    if let Some(v) = &common.out {
        c.out = v.clone();
    }
    c.paper_constants |= common.paper_constants;
    Ok(c)
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let mut c = config(&cli.common)?;
    match cli.command {
        Command::Plan => {
            let report = cmd_plan(&c)?;
            println!("config_hash {}", c.hash());
            println!("{:>5} {:>10} {:>14} {:>10} {:>18}", "level", "eps_prime", "slots", "replicas", "copies");
            for cell in &report.cells {
                println!(
                    "{:>5} {:>10.6} {:>14} {:>10} {:>18}",
                    cell.level,
                    cell.eps_prime,
                    cell.slots,
                    cell.replicas,
                    cell.copies()
                );
            }
            println!("total copies {}", report.total);
            if let Some(p) = report.plan_file {
                println!("plan written to {}", p.display());
            }
        }
        Command::Run { state } => {
            if state.is_some() {
                c.state_file = state;
            }
            let result = cmd_run(&c);
            let summary = |r: &pauli_tomo::harness::RunResult| {
                println!(
                    "config_hash {} passed {}/{} (fidelity >= {})",
                    r.config_hash,
                    r.passed(),
                    r.trials.len(),
                    1.0 - c.eps
                );
            };
            match result {
                Ok(r) => summary(&r),
                Err(e) => return Err(e),
            }
        }
        Command::Estimate {
            rho,
            sigma,
            gamma,
            repeats,
        } => {
            if let Some(g) = gamma {
                c.gamma = g;
            }
            if let Some(r) = repeats {
                c.estimate_repeats = r;
            }
            let (rho, sigma) = (StateVector::load(&rho)?, StateVector::load(&sigma)?);
            let rows = cmd_estimate(&c, &rho, &sigma)?;
            let within = rows.iter().filter(|r| r.error() <= c.gamma).count();
            for r in &rows {
                println!("repeat {:>3} d_hat {:.6} oracle {:.6} error {:.6}", r.repeat, r.d_hat, r.oracle, r.error());
            }
            println!("within gamma {}/{}; only copies of rho are counted", within, rows.len());
        }
        Command::Bench { n_list, eps_list } => {
            if let Some(v) = n_list {
                c.bench_n = v;
            }
            if let Some(v) = eps_list {
                c.bench_eps = v;
            }
            let report = cmd_bench(&c)?;
            for r in &report.rows {
                println!("n {} eps {} trial {} copies {} fidelity {:?}", r.n, r.eps, r.trial, r.planned_copies, r.fidelity);
            }
            for (eps, slope) in &report.slopes {
                println!("eps {eps}: slope of log2(copies) vs n = {slope:.4}");
            }
        }
        Command::Selftest => {
            let checks = cmd_selftest(c.seed);
            let mut all = true;
            for ch in &checks {
                println!("{} {} ({})", if ch.passed { "PASS" } else { "FAIL" }, ch.name, ch.detail);
                all &= ch.passed;
            }
            if !all {
                return Err(HarnessError::TooManyFailures {
                    failed: checks.iter().filter(|c| !c.passed).count(),
                    total: checks.len(),
                    threshold: 0.0,
                });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
