use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ZERO};
use crate::two_time::Spin;

/// Mode index of the impurity orbital with spin `spin`.
pub fn impurity_mode(spin: Spin) -> usize {
    spin.index()
}

/// Mode index of bath site `p` (1-based) with spin `spin`.
pub fn bath_mode(p: usize, spin: Spin) -> usize {
    2 * p + spin.index()
}

/// Odd-numbered bath sites start doubly occupied, even-numbered ones empty.
pub fn bath_initially_occupied(p: usize) -> bool {
    p % 2 == 1
}

/// Which of the two pure initial states of the spin-mixed impurity is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialImpurity {
    /// Impurity holds a single ↑ electron.
    Alpha,
    /// Impurity holds a single ↓ electron.
    Beta,
}

impl InitialImpurity {
    pub const BOTH: [InitialImpurity; 2] = [InitialImpurity::Alpha, InitialImpurity::Beta];

    pub fn occupied_spin(self) -> Spin {
        match self {
            InitialImpurity::Alpha => Spin::Up,
            InitialImpurity::Beta => Spin::Down,
        }
    }

    pub fn index(self) -> usize {
        match self {
            InitialImpurity::Alpha => 0,
            InitialImpurity::Beta => 1,
        }
    }
}

/// Mode occupations of the initial product state.
pub fn initial_occupations(n_bath: usize, system: InitialImpurity) -> Vec<bool> {
    let modes = 2 * (n_bath + 1);
    let mut occ = vec![false; modes];
    occ[impurity_mode(system.occupied_spin())] = true;
    for p in 1..=n_bath {
        if bath_initially_occupied(p) {
            occ[bath_mode(p, Spin::Down)] = true;
            occ[bath_mode(p, Spin::Up)] = true;
        }
    }
    occ
}

/// Time-dependent impurity–bath couplings `V_pσ(t_n)`; row `p - 1` holds bath site `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridizationSet {
    values: [CMatrix; 2],
}

impl HybridizationSet {
    pub fn zeros(n_bath: usize, len: usize) -> Self {
        Self {
            values: [CMatrix::zeros(n_bath, len), CMatrix::zeros(n_bath, len)],
        }
    }

    /// Spin-symmetric set from the couplings of the occupied sites (`L × len`),
    /// pairing each occupied site `2k-1` with an empty site `2k` carrying the
    /// complex-conjugate coupling.
    pub fn from_occupied(occupied: &CMatrix) -> Self {
        let (l, len) = occupied.shape();
        let mut v = CMatrix::zeros(2 * l, len);
        for k in 0..l {
            for n in 0..len {
                v[(2 * k, n)] = occupied[(k, n)];
                v[(2 * k + 1, n)] = occupied[(k, n)].conj();
            }
        }
        Self {
            values: [v.clone(), v],
        }
    }

    /// The same coupling on every bath site, spin and grid point.
    pub fn constant(n_bath: usize, len: usize, value: C64) -> Self {
        let v = CMatrix::from_element(n_bath, len, value);
        Self {
            values: [v.clone(), v],
        }
    }

    pub fn n_bath(&self) -> usize {
        self.values[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.values[0].ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `V_pσ(t_n)` with 1-based `p`.
    pub fn get(&self, spin: Spin, p: usize, n: usize) -> C64 {
        self.values[spin.index()][(p - 1, n)]
    }

    pub fn set(&mut self, spin: Spin, p: usize, n: usize, v: C64) {
        self.values[spin.index()][(p - 1, n)] = v;
    }

    pub fn matrix(&self, spin: Spin) -> &CMatrix {
        &self.values[spin.index()]
    }

    /// Couplings of the initially occupied sites for one spin (`L × len`).
    pub fn occupied(&self, spin: Spin) -> CMatrix {
        let v = &self.values[spin.index()];
        let rows: Vec<usize> = (1..=self.n_bath()).filter(|&p| bath_initially_occupied(p)).collect();
        CMatrix::from_fn(rows.len(), self.len(), |k, n| v[(rows[k] - 1, n)])
    }

    /// Largest |ΔV| against another set of the same shape.
    pub fn max_abs_diff(&self, other: &HybridizationSet) -> f64 {
        let mut worst = 0.0_f64;
        for s in 0..2 {
            let (a, b) = (&self.values[s], &other.values[s]);
            let cols = a.ncols().min(b.ncols());
            for p in 0..a.nrows().min(b.nrows()) {
                for n in 0..cols {
                    worst = worst.max((a[(p, n)] - b[(p, n)]).norm());
                }
            }
        }
        worst
    }

    /// Copy extended (zero-padded) or truncated to `len` grid points.
    pub fn resized(&self, len: usize) -> Self {
        let resize = |m: &CMatrix| {
            CMatrix::from_fn(m.nrows(), len, |p, n| if n < m.ncols() { m[(p, n)] } else { ZERO })
        };
        Self {
            values: [resize(&self.values[0]), resize(&self.values[1])],
        }
    }
}

/// Single-impurity Anderson model with μ = 0 and ε_p(t > 0) = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SiamParams {
    pub u: f64,
    pub hybridization: HybridizationSet,
}

impl SiamParams {
    pub fn new(u: f64, hybridization: HybridizationSet) -> Self {
        Self { u, hybridization }
    }

    pub fn n_bath(&self) -> usize {
        self.hybridization.n_bath()
    }

    pub fn n_modes(&self) -> usize {
        2 * (self.n_bath() + 1)
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if self.hybridization.len() < len.saturating_sub(1) {
            return Err(Error::Dimension {
                expected: len.saturating_sub(1),
                got: self.hybridization.len(),
            });
        }
        Ok(())
    }
}
