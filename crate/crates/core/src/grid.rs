//! Discrete time grid and the hopping quench profile.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform grid `t_n = n * dt`, `n = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    dt: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(Error::Domain(format!("time step must be positive, got {dt}")));
        }
        Ok(Self { dt, n_steps })
    }

    /// Smallest grid with step `dt` that reaches at least `t_max`.
    pub fn covering(dt: f64, t_max: f64) -> Result<Self> {
        let steps = (t_max / dt - 1e-9).ceil().max(0.0) as usize;
        Self::new(dt, steps)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of grid points, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_max(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|n| self.time(n))
    }

    /// The same step size truncated to `n_steps`.
    pub fn truncated(&self, n_steps: usize) -> Self {
        Self {
            dt: self.dt,
            n_steps: n_steps.min(self.n_steps),
        }
    }
}

/// Smooth ramp of the lattice hopping from 0 to `v_final` over `t_q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuenchProfile {
    pub t_q: f64,
    pub v_final: f64,
}

impl Default for QuenchProfile {
    fn default() -> Self {
        Self {
            t_q: 0.25,
            v_final: 1.0,
        }
    }
}

impl QuenchProfile {
    pub fn new(t_q: f64, v_final: f64) -> Result<Self> {
        if t_q.is_nan() || t_q <= 0.0 {
            return Err(Error::Domain(format!("quench time must be positive, got {t_q}")));
        }
        Ok(Self { t_q, v_final })
    }

    /// Hopping switched off at all times; the atomic-limit control case.
    pub fn off() -> Self {
        Self {
            t_q: 0.25,
            v_final: 0.0,
        }
    }

    pub fn omega0(&self) -> f64 {
        PI / self.t_q
    }

    /// Hopping amplitude v(t).
    pub fn v(&self, t: f64) -> Result<f64> {
        if t < 0.0 || t.is_nan() {
            return Err(Error::Domain(format!("quench profile needs t >= 0, got {t}")));
        }
        if t < self.t_q {
            Ok(self.v_final * 0.5 * (1.0 - (self.omega0() * t).cos()))
        } else {
            Ok(self.v_final)
        }
    }

    /// v(t_n) for every point of `grid`.
    pub fn sample(&self, grid: &TimeGrid) -> Vec<f64> {
        grid.times()
            .map(|t| self.v(t).expect("grid times are nonnegative"))
            .collect()
    }
}

/// Free-function form of [`QuenchProfile::v`].
pub fn quench_v(t: f64, profile: &QuenchProfile) -> Result<f64> {
    profile.v(t)
}
