use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::gates::GateSpec;

/// Zero-mean Gaussian angle errors on evolution gates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Std-dev (radians) added to single-qubit rotation angles.
    pub sigma_1q: f64,
    /// Relative MS error; the additive std-dev on θ and φ is `sigma_ms * ms_scale`.
    pub sigma_ms: f64,
    /// Reference angle for `sigma_ms`, π/2 by default.
    pub ms_scale: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            sigma_1q: 1e-6,
            sigma_ms: 0.0,
            ms_scale: FRAC_PI_2,
        }
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            sigma_1q: 0.0,
            sigma_ms: 0.0,
            ms_scale: FRAC_PI_2,
        }
    }

    pub fn with_ms(sigma_ms: f64) -> Self {
        Self {
            sigma_ms,
            ..Self::default()
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.sigma_1q == 0.0 && self.sigma_ms == 0.0
    }

    pub fn ms_std(&self) -> f64 {
        self.sigma_ms * self.ms_scale
    }
}

/// Perturbed copy of an evolution gate. Hadamards and controlled Paulis are
/// measurement scaffolding and come back unchanged.
pub fn noisify<R: Rng + ?Sized>(gate: &GateSpec, noise: &NoiseModel, rng: &mut R) -> GateSpec {
    match gate {
        GateSpec::Rotation { axis, qubit, angle } if noise.sigma_1q > 0.0 => {
            let d = Normal::new(0.0, noise.sigma_1q).expect("finite std-dev");
            GateSpec::Rotation {
                axis: *axis,
                qubit: *qubit,
                angle: angle + d.sample(rng),
            }
        }
        GateSpec::Ms {
            first,
            last,
            theta,
            phi,
        } if noise.sigma_ms > 0.0 => {
            let d = Normal::new(0.0, noise.ms_std()).expect("finite std-dev");
            GateSpec::Ms {
                first: *first,
                last: *last,
                theta: theta + d.sample(rng),
                phi: phi + d.sample(rng),
            }
        }
        other => other.clone(),
    }
}

/// Deterministic RNG for one work item, keyed by the master seed and a
/// sequence of indices (realization, grid point, contribution, …).
pub fn stream_rng(master_seed: u64, key: &[u64]) -> ChaCha8Rng {
    let mut h = 0x9e37_79b9_7f4a_7c15_u64;
    for &k in key {
        h = splitmix64(h ^ splitmix64(k.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(h);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
