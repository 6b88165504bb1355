//! Flat `key = value` run configuration and tab-separated data records.
//!
//! Floats are written with the shortest representation that parses back to
//! the same value, so every record round-trips bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::dmft::{Correction, DmftConfig};
use crate::error::{Error, Result};
use crate::grid::{QuenchProfile, TimeGrid};
use crate::interferometry::{CircuitSolverConfig, MeasurementMode};
use crate::lindblad::LindbladBathParams;
use crate::qubit::NoiseModel;
use crate::two_time::{Component, Spin, SpinGreens, TwoTimeFunction};
use num_complex::Complex64 as C64;

/// Which pipeline a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentMode {
    /// Classical DMFT with the exact-diagonalization solver.
    Ed,
    /// DMFT with the emulated circuit solver.
    Hybrid,
    /// Fixed couplings, noisy circuit runs over a list of MS error levels,
    /// decay-rate fits.
    EtaSweep,
    /// U = 0 with dissipative baths: naive versus noise-aware extraction.
    LindbladFit,
}

impl ExperimentMode {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentMode::Ed => "ed",
            ExperimentMode::Hybrid => "hybrid",
            ExperimentMode::EtaSweep => "eta-sweep",
            ExperimentMode::LindbladFit => "lindblad-fit",
        }
    }
}

impl FromStr for ExperimentMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ed" => Ok(ExperimentMode::Ed),
            "hybrid" => Ok(ExperimentMode::Hybrid),
            "eta-sweep" => Ok(ExperimentMode::EtaSweep),
            "lindblad-fit" => Ok(ExperimentMode::LindbladFit),
            other => Err(Error::Config(format!(
                "mode: expected ed, hybrid, eta-sweep or lindblad-fit, got `{other}`"
            ))),
        }
    }
}

/// Every setting of a run. Energies in units of the final hopping `v0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: ExperimentMode,
    pub dt: f64,
    pub t_max: f64,
    pub u: f64,
    pub t_q: f64,
    pub v_final: f64,
    /// Occupied/empty bath pairs (bath count `2L`).
    pub l: usize,
    pub sigma_1q: f64,
    /// Relative MS angle error (0.01 = 1 %).
    pub sigma_ms: f64,
    pub realizations: usize,
    /// Shots per probe expectation; 0 selects exact expectations.
    pub shots: u64,
    pub seed: u64,
    pub delta_conv: f64,
    pub max_iters: usize,
    pub mixing: f64,
    pub correction: bool,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub mu_fit: f64,
    pub spin_symmetric: bool,
    /// Measure only the lesser component in noisy circuit runs.
    pub lesser_only: bool,
    pub sigma_ms_list: Vec<f64>,
    /// Constant coupling of the fixed-hybridization sweep.
    pub sweep_v: f64,
    /// Worker threads; 0 uses all cores.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: ExperimentMode::Ed,
            dt: 0.04,
            t_max: 1.5,
            u: 2.0,
            t_q: 0.25,
            v_final: 1.0,
            l: 1,
            sigma_1q: 1e-6,
            sigma_ms: 0.0,
            realizations: 128,
            shots: 0,
            seed: 0,
            delta_conv: 1e-5,
            max_iters: 100,
            mixing: 0.0,
            correction: false,
            gamma_minus: 0.0,
            gamma_plus: 0.0,
            mu_fit: 0.0,
            spin_symmetric: false,
            lesser_only: false,
            sigma_ms_list: vec![0.02, 0.04, 0.06, 0.08],
            sweep_v: 0.5,
            workers: 0,
        }
    }
}

/// Recognized configuration keys.
pub const CONFIG_KEYS: &[&str] = &[
    "mode",
    "dt",
    "t_max",
    "u",
    "t_q",
    "v_final",
    "l",
    "sigma_1q",
    "sigma_ms",
    "realizations",
    "shots",
    "seed",
    "delta_conv",
    "max_iters",
    "mixing",
    "correction",
    "gamma",
    "gamma_minus",
    "gamma_plus",
    "mu_fit",
    "spin_symmetric",
    "lesser_only",
    "sigma_ms_list",
    "sweep_v",
    "workers",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got `{value}`"))),
    }
}

impl ExperimentConfig {
    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "mode" => self.mode = value.parse()?,
            "dt" => self.dt = parse_num(key, value)?,
            "t_max" => self.t_max = parse_num(key, value)?,
            "u" => self.u = parse_num(key, value)?,
            "t_q" => self.t_q = parse_num(key, value)?,
            "v_final" => self.v_final = parse_num(key, value)?,
            "l" => self.l = parse_num(key, value)?,
            "sigma_1q" => self.sigma_1q = parse_num(key, value)?,
            "sigma_ms" => self.sigma_ms = parse_num(key, value)?,
            "realizations" => self.realizations = parse_num(key, value)?,
            "shots" => self.shots = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "delta_conv" => self.delta_conv = parse_num(key, value)?,
            "max_iters" => self.max_iters = parse_num(key, value)?,
            "mixing" => self.mixing = parse_num(key, value)?,
            "correction" => {
                self.correction = match value {
                    "none" => false,
                    "dissipative-fit" => true,
                    _ => {
                        return Err(Error::Config(format!(
                            "correction: expected none or dissipative-fit, got `{value}`"
                        )))
                    }
                }
            }
            "gamma" => {
                let g = parse_num(key, value)?;
                self.gamma_minus = g;
                self.gamma_plus = g;
            }
            "gamma_minus" => self.gamma_minus = parse_num(key, value)?,
            "gamma_plus" => self.gamma_plus = parse_num(key, value)?,
            "mu_fit" => self.mu_fit = parse_num(key, value)?,
            "spin_symmetric" => self.spin_symmetric = parse_bool(key, value)?,
            "lesser_only" => self.lesser_only = parse_bool(key, value)?,
            "sigma_ms_list" => {
                self.sigma_ms_list = value
                    .split(',')
                    .map(|s| parse_num(key, s.trim()))
                    .collect::<Result<_>>()?
            }
            "sweep_v" => self.sweep_v = parse_num(key, value)?,
            "workers" => self.workers = parse_num(key, value)?,
            other => return Err(Error::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Check ranges; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive, got {x}")))
            }
        };
        let nonneg = |name: &str, x: f64| {
            if x >= 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be nonnegative, got {x}")))
            }
        };
        positive("dt", self.dt)?;
        nonneg("t_max", self.t_max)?;
        if !self.u.is_finite() {
            return Err(Error::Config(format!("u must be finite, got {}", self.u)));
        }
        positive("t_q", self.t_q)?;
        if !self.v_final.is_finite() {
            return Err(Error::Config(format!("v_final must be finite, got {}", self.v_final)));
        }
        if self.l == 0 {
            return Err(Error::Config("l must be at least 1".into()));
        }
        nonneg("sigma_1q", self.sigma_1q)?;
        nonneg("sigma_ms", self.sigma_ms)?;
        if self.realizations == 0 {
            return Err(Error::Config("realizations must be at least 1".into()));
        }
        positive("delta_conv", self.delta_conv)?;
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.mixing) {
            return Err(Error::Config(format!("mixing must lie in [0, 1), got {}", self.mixing)));
        }
        nonneg("gamma_minus", self.gamma_minus)?;
        nonneg("gamma_plus", self.gamma_plus)?;
        nonneg("mu_fit", self.mu_fit)?;
        for &s in &self.sigma_ms_list {
            nonneg("sigma_ms_list", s)?;
        }
        if self.mode == ExperimentMode::EtaSweep && self.sigma_ms_list.is_empty() {
            return Err(Error::Config("sigma_ms_list must not be empty".into()));
        }
        if !self.sweep_v.is_finite() {
            return Err(Error::Config(format!("sweep_v must be finite, got {}", self.sweep_v)));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::covering(self.dt, self.t_max)
    }

    pub fn quench(&self) -> Result<QuenchProfile> {
        QuenchProfile::new(self.t_q, self.v_final)
    }

    pub fn bath(&self) -> Result<LindbladBathParams> {
        LindbladBathParams::new(self.gamma_minus, self.gamma_plus)
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel {
            sigma_1q: self.sigma_1q,
            sigma_ms: self.sigma_ms,
            ..NoiseModel::default()
        }
    }

    pub fn measurement(&self) -> MeasurementMode {
        match self.shots {
            0 => MeasurementMode::Exact,
            shots => MeasurementMode::Sampled { shots },
        }
    }

    /// Loop settings derived from this configuration.
    pub fn dmft_config(&self) -> Result<DmftConfig> {
        self.validate()?;
        let mut cfg = DmftConfig::new(self.grid()?, self.u, self.l);
        cfg.quench = self.quench()?;
        cfg.delta_conv = self.delta_conv;
        cfg.max_iters = self.max_iters;
        cfg.mixing = self.mixing;
        cfg.correction = if self.correction {
            Correction::DissipativeFit {
                bath: self.bath()?,
                mu_fit: self.mu_fit,
            }
        } else {
            Correction::None
        };
        Ok(cfg)
    }

    pub fn circuit_config(&self) -> CircuitSolverConfig {
        CircuitSolverConfig {
            noise: self.noise(),
            mode: self.measurement(),
            realizations: self.realizations,
            seed: self.seed,
            spin_symmetric: self.spin_symmetric,
            components: if self.lesser_only {
                vec![Component::Lesser]
            } else {
                Component::ALL.to_vec()
            },
        }
    }

    /// Resolved settings as `key = value` lines, one per recognized key
    /// (`gamma` expands to its two rates).
    pub fn to_text(&self) -> String {
        let list = self
            .sigma_ms_list
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let correction = if self.correction { "dissipative-fit" } else { "none" };
        let pairs: Vec<(&str, String)> = vec![
            ("mode", self.mode.name().into()),
            ("dt", self.dt.to_string()),
            ("t_max", self.t_max.to_string()),
            ("u", self.u.to_string()),
            ("t_q", self.t_q.to_string()),
            ("v_final", self.v_final.to_string()),
            ("l", self.l.to_string()),
            ("sigma_1q", self.sigma_1q.to_string()),
            ("sigma_ms", self.sigma_ms.to_string()),
            ("realizations", self.realizations.to_string()),
            ("shots", self.shots.to_string()),
            ("seed", self.seed.to_string()),
            ("delta_conv", self.delta_conv.to_string()),
            ("max_iters", self.max_iters.to_string()),
            ("mixing", self.mixing.to_string()),
            ("correction", correction.into()),
            ("gamma_minus", self.gamma_minus.to_string()),
            ("gamma_plus", self.gamma_plus.to_string()),
            ("mu_fit", self.mu_fit.to_string()),
            ("spin_symmetric", self.spin_symmetric.to_string()),
            ("lesser_only", self.lesser_only.to_string()),
            ("sigma_ms_list", list),
            ("sweep_v", self.sweep_v.to_string()),
            ("workers", self.workers.to_string()),
        ];
        let mut out = String::new();
        for (k, v) in pairs {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

/// Parse configuration text. Blank lines and `#` comments are skipped;
/// unknown keys are rejected.
pub fn parse_config_str(text: &str, origin: &Path) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Read and validate a configuration file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text, path)
}

/// One stored grid pair of a two-time function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoTimeRow {
    pub component: Component,
    pub spin: Spin,
    pub n: usize,
    pub m: usize,
    pub t_n: f64,
    pub t_m: f64,
    pub value: C64,
}

/// Lower triangle plus diagonal of a set of two-time functions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TwoTimeRecord {
    pub rows: Vec<TwoTimeRow>,
}

pub const TWO_TIME_HEADER: &str = "component\tspin\tn\tm\tt_n\tt_m\tre\tim";

impl TwoTimeRecord {
    pub fn push_function(&mut self, f: &TwoTimeFunction, grid: &TimeGrid) {
        for n in 0..f.len() {
            for m in 0..=n {
                self.rows.push(TwoTimeRow {
                    component: f.component,
                    spin: f.spin,
                    n,
                    m,
                    t_n: grid.time(n),
                    t_m: grid.time(m),
                    value: f.get(n, m),
                });
            }
        }
    }

    /// Records of the given components of a function set.
    pub fn from_greens(g: &SpinGreens, components: &[Component], grid: &TimeGrid) -> Self {
        let mut rec = Self::default();
        for &c in components {
            for spin in Spin::ALL {
                rec.push_function(g.get(c, spin), grid);
            }
        }
        rec
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(TWO_TIME_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.component.name(),
                r.spin.name(),
                r.n,
                r.m,
                r.t_n,
                r.t_m,
                r.value.re,
                r.value.im
            );
        }
        out
    }

    pub fn from_text(text: &str, origin: &Path) -> Result<Self> {
        let perr = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h == TWO_TIME_HEADER => {}
            _ => return Err(perr(1, "missing two-time header".into())),
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 8 {
                return Err(perr(i + 1, format!("expected 8 fields, got {}", f.len())));
            }
            let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| perr(i + 1, format!("bad number `{s}`"))) };
            let idx = |s: &str| -> Result<usize> { s.parse().map_err(|_| perr(i + 1, format!("bad index `{s}`"))) };
            rows.push(TwoTimeRow {
                component: Component::parse(f[0]).ok_or_else(|| perr(i + 1, format!("bad component `{}`", f[0])))?,
                spin: Spin::parse(f[1]).ok_or_else(|| perr(i + 1, format!("bad spin `{}`", f[1])))?,
                n: idx(f[2])?,
                m: idx(f[3])?,
                t_n: num(f[4])?,
                t_m: num(f[5])?,
                value: C64::new(num(f[6])?, num(f[7])?),
            });
        }
        Ok(Self { rows })
    }
}

pub fn write_two_time(record: &TwoTimeRecord, path: &Path) -> Result<()> {
    fs::write(path, record.to_text()).map_err(|e| Error::io(path, e))
}

pub fn read_two_time(path: &Path) -> Result<TwoTimeRecord> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    TwoTimeRecord::from_text(&text, path)
}

/// Write a tab-separated table with a header line.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = header.join("\t");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join("\t"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
