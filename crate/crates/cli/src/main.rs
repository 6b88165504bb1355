//! `neqdmft`: batch runner for the emulated hybrid DMFT experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use neqdmft_core::experiment::{run_experiment, RunSummary};
use neqdmft_core::io::{parse_config, ExperimentConfig, ExperimentMode};
use neqdmft_core::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    /// Classical DMFT with the exact-diagonalization solver
    Ed,
    /// DMFT with the emulated circuit solver
    Hybrid,
    /// Decay rate of the mean field against the MS error level
    EtaSweep,
    /// Naive versus noise-aware coupling extraction with dissipative baths
    LindbladFit,
}

impl From<Mode> for ExperimentMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Ed => ExperimentMode::Ed,
            Mode::Hybrid => ExperimentMode::Hybrid,
            Mode::EtaSweep => ExperimentMode::EtaSweep,
            Mode::LindbladFit => ExperimentMode::LindbladFit,
        }
    }
}

/// Run one experiment and write its data files and manifest into `--out`.
///
/// Settings are resolved in order: built-in defaults, the config file,
/// `--set` overrides, then the mode, `--seed` and `--workers` flags.
#[derive(Debug, Parser)]
#[command(name = "neqdmft", version)]
struct Cli {
    /// Experiment to run; defaults to the `mode` key of the config
    mode: Option<Mode>,

    /// Flat `key = value` configuration file
    #[arg(short, long)]
    config: Option<PathBuf>,

    /// Output directory (created if missing)
    #[arg(short, long, default_value = "out")]
    out: PathBuf,

    /// Master seed for every random stream
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads; 0 uses all cores
    #[arg(long)]
    workers: Option<usize>,

    /// Override a config key, e.g. `--set sigma_ms=0.01` (repeatable)
    #[arg(short, long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Print the resolved configuration and exit without running
    #[arg(long)]
    dry_run: bool,
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(path)?,
        None => ExperimentConfig::default(),
    };
    for item in &cli.set {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{item}`")))?;
        cfg.set(key.trim(), value.trim())?;
    }
    if let Some(mode) = cli.mode {
        cfg.mode = mode.into();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(workers) = cli.workers {
        cfg.workers = workers;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_summary(s: &RunSummary) {
    println!("mode: {}", s.mode.name());
    println!("converged: {}", s.converged);
    println!("iterations: {}", s.iterations);
    println!("final metric: {:e}", s.final_metric);
    for p in &s.eta {
        println!(
            "sigma_ms {}: eta {:.6} (r^2 {:.4}, {} points)",
            p.sigma_ms, p.eta, p.r_squared, p.points
        );
    }
    if let Some(c) = s.comparison {
        println!(
            "mean error naive {:e}, corrected {:e}, ratio {:.4}",
            c.naive_error,
            c.corrected_error,
            c.ratio()
        );
    }
    for f in &s.files {
        println!("wrote {}", f.display());
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } => EXIT_IO,
        // numerical breakdown of an otherwise valid run
        Error::NotHermitian(_) | Error::NonFinite(_) | Error::EmptyFitBand => EXIT_NOT_CONVERGED,
        _ => EXIT_VALIDATION,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let cfg = match resolve(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    if cli.dry_run {
        print!("{}", cfg.to_text());
        return ExitCode::SUCCESS;
    }
    match run_experiment(&cfg, &cli.out) {
        Ok(summary) => {
            print_summary(&summary);
            if summary.converged {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: self-consistency did not converge; outputs kept in {}", cli.out.display());
                ExitCode::from(EXIT_NOT_CONVERGED)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
