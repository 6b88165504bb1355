//! Experiment pipelines and their output files.
//!
//! Every data file depends only on the configuration (seed included); the
//! wall-clock time is confined to the manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::dmft::{bethe_map, run_self_consistency, spin_average, DmftOutcome, EdSolver, ImpuritySolver};
use crate::error::{Error, Result};
use crate::fermi::{HybridizationSet, SiamParams};
use crate::interferometry::{CircuitSolver, CircuitSolverConfig};
use crate::io::{write_table, write_two_time, ExperimentConfig, ExperimentMode, TwoTimeRecord};
use crate::lindblad::{estimate_decay_rate, mean_abs_difference, LindbladBathParams, LindbladSolver};
use crate::linalg::CMatrix;
use crate::qubit::NoiseModel;
use crate::two_time::{Component, Spin};

/// Band floor of the decay-rate fit relative to `max |Im Λ_ideal|`.
pub const ETA_FLOOR: f64 = 1e-3;

/// Decay-rate fit of one noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaPoint {
    pub sigma_ms: f64,
    pub eta: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Errors of the naive and noise-aware coupling extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionComparison {
    pub naive_error: f64,
    pub corrected_error: f64,
}

impl CorrectionComparison {
    pub fn ratio(&self) -> f64 {
        self.corrected_error / self.naive_error
    }
}

/// What a run produced, for the caller and the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub mode: ExperimentMode,
    pub converged: bool,
    pub iterations: usize,
    pub final_metric: f64,
    pub files: Vec<PathBuf>,
    pub eta: Vec<EtaPoint>,
    pub comparison: Option<CorrectionComparison>,
}

fn fmt(x: f64) -> String {
    x.to_string()
}

/// Run the configured pipeline with `cfg.workers` threads and write all
/// outputs into `out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("workers: {e}")))?;
    let start = Instant::now();
    let mut summary = pool.install(|| match cfg.mode {
        ExperimentMode::Ed => run_dmft(cfg, out_dir, &mut EdSolver),
        ExperimentMode::Hybrid => run_dmft(cfg, out_dir, &mut CircuitSolver::new(cfg.circuit_config())),
        ExperimentMode::EtaSweep => run_eta_sweep(cfg, out_dir),
        ExperimentMode::LindbladFit => run_lindblad_fit(cfg, out_dir),
    })?;
    let manifest = out_dir.join("manifest.txt");
    write_manifest(cfg, &summary, start.elapsed().as_secs_f64(), &manifest)?;
    summary.files.push(manifest);
    Ok(summary)
}

fn write_manifest(cfg: &ExperimentConfig, s: &RunSummary, seconds: f64, path: &Path) -> Result<()> {
    let mut text = String::from("# resolved configuration\n");
    text.push_str(&cfg.to_text());
    text.push_str("# run\n");
    text.push_str(&format!("version = {}\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("converged = {}\n", s.converged));
    text.push_str(&format!("iterations = {}\n", s.iterations));
    text.push_str(&format!("final_metric = {}\n", s.final_metric));
    if let Some(c) = s.comparison {
        text.push_str(&format!("naive_error = {}\n", c.naive_error));
        text.push_str(&format!("corrected_error = {}\n", c.corrected_error));
        text.push_str(&format!("error_ratio = {}\n", c.ratio()));
    }
    text.push_str(&format!("wall_clock_seconds = {seconds:.3}\n"));
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_outcome(out: &DmftOutcome, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let grid = cfg.grid()?;
    let mut files = Vec::new();

    let path = dir.join("greens.tsv");
    write_two_time(&TwoTimeRecord::from_greens(&out.greens, &out.components, &grid), &path)?;
    files.push(path);

    let path = dir.join("lambda.tsv");
    write_two_time(&TwoTimeRecord::from_greens(&out.lambda, &out.components, &grid), &path)?;
    files.push(path);

    let path = dir.join("double_occupancy.tsv");
    let rows: Vec<Vec<String>> = out
        .double_occupancy
        .iter()
        .enumerate()
        .map(|(n, d)| vec![n.to_string(), fmt(grid.time(n)), fmt(*d)])
        .collect();
    write_table(&path, &["n", "t", "d"], &rows)?;
    files.push(path);

    let path = dir.join("convergence.tsv");
    let rows: Vec<Vec<String>> = out
        .report
        .history
        .iter()
        .map(|r| vec![r.slice.to_string(), r.iteration.to_string(), fmt(r.metric), fmt(r.residual)])
        .collect();
    write_table(&path, &["slice", "iteration", "metric", "residual"], &rows)?;
    files.push(path);

    let path = dir.join("hybridization.tsv");
    let mut rows = Vec::new();
    for spin in Spin::ALL {
        let v = out.hybridization.matrix(spin);
        for p in 0..v.nrows() {
            for n in 0..v.ncols() {
                let z = v[(p, n)];
                rows.push(vec![spin.name().to_string(), (p + 1).to_string(), n.to_string(), fmt(z.re), fmt(z.im)]);
            }
        }
    }
    write_table(&path, &["spin", "p", "n", "re", "im"], &rows)?;
    files.push(path);
    Ok(files)
}

fn run_dmft(cfg: &ExperimentConfig, dir: &Path, solver: &mut dyn ImpuritySolver) -> Result<RunSummary> {
    let out = run_self_consistency(&cfg.dmft_config()?, solver)?;
    let files = write_outcome(&out, cfg, dir)?;
    Ok(RunSummary {
        mode: cfg.mode,
        converged: out.report.converged,
        iterations: out.report.iterations,
        final_metric: out.report.final_metric,
        files,
        eta: Vec::new(),
        comparison: None,
    })
}

/// Constant couplings `v` on every occupied site (conjugates on the empty ones).
pub fn constant_hybridization(l: usize, len: usize, v: f64) -> HybridizationSet {
    HybridizationSet::from_occupied(&CMatrix::from_element(l, len, v.into()))
}

/// Spin-averaged `Λ^<` of one circuit measurement with fixed couplings.
fn sweep_lambda(cfg: &ExperimentConfig, params: &SiamParams, noise: NoiseModel) -> Result<crate::TwoTimeFunction> {
    let grid = cfg.grid()?;
    let circuit = CircuitSolverConfig {
        noise,
        components: vec![Component::Lesser],
        ..cfg.circuit_config()
    };
    let sol = CircuitSolver::new(circuit).solve(params, &grid)?;
    bethe_map(&spin_average(&sol.greens, Component::Lesser), &cfg.quench()?, &grid)
}

/// Decay rates of the hybridization function over a list of MS error
/// levels, with the couplings held fixed.
pub fn eta_sweep(cfg: &ExperimentConfig) -> Result<Vec<EtaPoint>> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let params = SiamParams::new(cfg.u, constant_hybridization(cfg.l, grid.len(), cfg.sweep_v));
    let ideal = sweep_lambda(cfg, &params, NoiseModel::noiseless())?;
    cfg.sigma_ms_list
        .iter()
        .map(|&s| {
            let noise = NoiseModel {
                sigma_ms: s,
                ..cfg.noise()
            };
            let noisy = sweep_lambda(cfg, &params, noise)?;
            let fit = estimate_decay_rate(&noisy, &ideal, &grid, ETA_FLOOR)?;
            Ok(EtaPoint {
                sigma_ms: s,
                eta: fit.eta,
                r_squared: fit.r_squared,
                points: fit.points,
            })
        })
        .collect()
}

fn run_eta_sweep(cfg: &ExperimentConfig, dir: &Path) -> Result<RunSummary> {
    let eta = eta_sweep(cfg)?;
    let path = dir.join("eta.tsv");
    let rows: Vec<Vec<String>> = eta
        .iter()
        .map(|p| vec![fmt(p.sigma_ms), fmt(p.eta), fmt(p.r_squared), p.points.to_string()])
        .collect();
    write_table(&path, &["sigma_ms", "eta", "r_squared", "points"], &rows)?;
    Ok(RunSummary {
        mode: cfg.mode,
        converged: true,
        iterations: 0,
        final_metric: 0.0,
        files: vec![path],
        eta,
        comparison: None,
    })
}

/// Three U = 0 loops: ideal baths (reference), dissipative baths with naive
/// extraction, and dissipative baths with the noise-aware fit.
pub fn correction_comparison(cfg: &ExperimentConfig) -> Result<(CorrectionComparison, [DmftOutcome; 3])> {
    if cfg.u != 0.0 {
        return Err(Error::Interacting(cfg.u));
    }
    let bath = cfg.bath()?;
    let mut base = cfg.clone();
    base.correction = false;
    let exact = run_self_consistency(
        &base.dmft_config()?,
        &mut LindbladSolver {
            bath: LindbladBathParams::ideal(),
        },
    )?;
    let naive = run_self_consistency(&base.dmft_config()?, &mut LindbladSolver { bath })?;
    let mut fit_cfg = cfg.clone();
    fit_cfg.correction = true;
    let corrected = run_self_consistency(&fit_cfg.dmft_config()?, &mut LindbladSolver { bath })?;
    // the impurity of each loop sees its self-consistent Λ = v G v
    let lesser = |o: &DmftOutcome| spin_average(&o.lambda, Component::Lesser).values;
    let reference = lesser(&exact);
    let cmp = CorrectionComparison {
        naive_error: mean_abs_difference(&lesser(&naive), &reference),
        corrected_error: mean_abs_difference(&lesser(&corrected), &reference),
    };
    Ok((cmp, [exact, naive, corrected]))
}

fn run_lindblad_fit(cfg: &ExperimentConfig, dir: &Path) -> Result<RunSummary> {
    let (cmp, outcomes) = correction_comparison(cfg)?;
    let grid = cfg.grid()?;
    let mut files = Vec::new();
    for (name, out) in ["exact", "naive", "corrected"].iter().zip(&outcomes) {
        let path = dir.join(format!("lambda_{name}.tsv"));
        let mut rec = TwoTimeRecord::default();
        rec.push_function(&spin_average(&out.lambda, Component::Lesser), &grid);
        write_two_time(&rec, &path)?;
        files.push(path);
    }
    let path = dir.join("comparison.tsv");
    write_table(
        &path,
        &["method", "mean_error"],
        &[
            vec!["naive".into(), fmt(cmp.naive_error)],
            vec!["corrected".into(), fmt(cmp.corrected_error)],
        ],
    )?;
    files.push(path);
    let converged = outcomes.iter().all(|o| o.report.converged);
    Ok(RunSummary {
        mode: cfg.mode,
        converged,
        iterations: outcomes.iter().map(|o| o.report.iterations).sum(),
        final_metric: outcomes.iter().map(|o| o.report.final_metric).fold(0.0, f64::max),
        files,
        eta: Vec::new(),
        comparison: Some(cmp),
    })
}
