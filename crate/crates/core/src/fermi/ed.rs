//! Exact Fock-space propagation and Green functions of the impurity model.

use num_complex::Complex64 as C64;

use super::siam::{bath_mode, impurity_mode, initial_occupations, InitialImpurity, SiamParams};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{expm_hermitian, CMatrix, CVector, I, ZERO};
use crate::two_time::{Component, Spin, SpinGreens};

/// Amplitudes over occupation-number states; bit `j` of a basis index is mode `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    n_modes: usize,
    amps: CVector,
}

impl FockState {
    pub fn basis(n_modes: usize, occupations: &[bool]) -> Result<Self> {
        if occupations.len() != n_modes {
            return Err(Error::Dimension {
                expected: n_modes,
                got: occupations.len(),
            });
        }
        let idx = occupations
            .iter()
            .enumerate()
            .filter(|(_, &o)| o)
            .fold(0usize, |a, (j, _)| a | (1 << j));
        let mut amps = CVector::zeros(1 << n_modes);
        amps[idx] = C64::new(1.0, 0.0);
        Ok(Self { n_modes, amps })
    }

    pub fn from_amplitudes(n_modes: usize, amps: CVector) -> Result<Self> {
        if amps.len() != 1 << n_modes {
            return Err(Error::Dimension {
                expected: 1 << n_modes,
                got: amps.len(),
            });
        }
        Ok(Self { n_modes, amps })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// `⟨n_a n_b⟩` for two modes.
    pub fn pair_occupation(&self, a: usize, b: usize) -> f64 {
        let mask = (1 << a) | (1 << b);
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == mask)
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }

    pub fn total_number(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(i, z)| i.count_ones() as f64 * z.norm_sqr())
            .sum()
    }

    pub fn annihilate(&self, mode: usize) -> CVector {
        apply_ladder(&self.amps, mode, false)
    }
}

fn parity_below(index: usize, mode: usize) -> f64 {
    if (index & ((1 << mode) - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `c_mode |ψ⟩` (or `c†_mode |ψ⟩` when `create`) on a raw amplitude vector.
pub(crate) fn apply_ladder(amps: &CVector, mode: usize, create: bool) -> CVector {
    let bit = 1usize << mode;
    let mut out = CVector::zeros(amps.len());
    for (i, &a) in amps.iter().enumerate() {
        if a == ZERO {
            continue;
        }
        let occupied = i & bit != 0;
        if occupied != create {
            out[i ^ bit] += a * parity_below(i, mode);
        }
    }
    out
}

/// Add `coeff · c†_a c_b` to `h`.
fn add_hopping(h: &mut CMatrix, a: usize, b: usize, coeff: C64) {
    let dim = h.nrows();
    for s in 0..dim {
        if s & (1 << b) == 0 {
            continue;
        }
        let s1 = s ^ (1 << b);
        let sign_b = parity_below(s, b);
        if s1 & (1 << a) != 0 {
            continue;
        }
        let s2 = s1 | (1 << a);
        let sign_a = parity_below(s1, a);
        h[(s2, s)] += coeff * sign_a * sign_b;
    }
}

/// Dense SIAM Hamiltonian `H(t_n)` over the Fock space.
pub fn build_siam_hamiltonian(params: &SiamParams, n: usize) -> Result<CMatrix> {
    let hyb = &params.hybridization;
    if n >= hyb.len() {
        return Err(Error::Dimension {
            expected: n + 1,
            got: hyb.len(),
        });
    }
    let modes = params.n_modes();
    let dim = 1usize << modes;
    let mut h = CMatrix::zeros(dim, dim);
    let (dn, up) = (impurity_mode(Spin::Down), impurity_mode(Spin::Up));
    if params.u != 0.0 {
        for s in 0..dim {
            let nd = ((s >> dn) & 1) as f64;
            let nu = ((s >> up) & 1) as f64;
            h[(s, s)] += C64::new(params.u * (nu - 0.5) * (nd - 0.5), 0.0);
        }
    }
    for spin in Spin::ALL {
        for p in 1..=params.n_bath() {
            let v = hyb.get(spin, p, n);
            if v == ZERO {
                continue;
            }
            let (a, b) = (impurity_mode(spin), bath_mode(p, spin));
            add_hopping(&mut h, a, b, v);
            add_hopping(&mut h, b, a, v.conj());
        }
    }
    Ok(h)
}

/// `exp(-i dt H)` assembled block by block: the Hamiltonian conserves the
/// particle number of each spin (even modes ↓, odd modes ↑).
fn expm_blocks(h: &CMatrix, modes: usize, dt: f64) -> CMatrix {
    let dim = h.nrows();
    let even: usize = (0..modes).step_by(2).map(|j| 1usize << j).sum();
    let odd = (dim - 1) & !even;
    let mut sectors: std::collections::BTreeMap<(u32, u32), Vec<usize>> = Default::default();
    for s in 0..dim {
        sectors
            .entry(((s & even).count_ones(), (s & odd).count_ones()))
            .or_default()
            .push(s);
    }
    let mut out = CMatrix::zeros(dim, dim);
    for idx in sectors.values() {
        let sub = CMatrix::from_fn(idx.len(), idx.len(), |a, b| h[(idx[a], idx[b])]);
        let u = expm_hermitian(&sub, dt);
        for (a, &ia) in idx.iter().enumerate() {
            for (b, &ib) in idx.iter().enumerate() {
                out[(ia, ib)] = u[(a, b)];
            }
        }
    }
    out
}

/// Step propagators `exp(-i dt H(t_k))` for every step of a grid.
#[derive(Debug, Clone)]
pub struct EdPropagator {
    steps: Vec<CMatrix>,
}

impl EdPropagator {
    pub fn new(params: &SiamParams, grid: &TimeGrid) -> Result<Self> {
        params.check_len(grid.len())?;
        let steps = (0..grid.n_steps())
            .map(|k| build_siam_hamiltonian(params, k).map(|h| expm_blocks(&h, params.n_modes(), grid.dt())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { steps })
    }

    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn step(&self, k: usize) -> &CMatrix {
        &self.steps[k]
    }

    pub fn propagate(&self, amps: &CVector, n_from: usize, n_to: usize) -> Result<CVector> {
        if n_from > n_to || n_to > self.steps.len() {
            return Err(Error::Domain(format!(
                "cannot propagate from step {n_from} to {n_to} on {} steps",
                self.steps.len()
            )));
        }
        let mut v = amps.clone();
        for k in n_from..n_to {
            v = &self.steps[k] * v;
        }
        Ok(v)
    }
}

/// Propagate a Fock state from grid index `n_from` to `n_to` with the
/// piecewise-constant Hamiltonian sampled at the left end of each step.
pub fn propagate_exact(
    state: &FockState,
    n_from: usize,
    n_to: usize,
    params: &SiamParams,
    grid: &TimeGrid,
) -> Result<FockState> {
    let prop = EdPropagator::new(params, &grid.truncated(n_to.max(n_from)))?;
    let amps = prop.propagate(&state.amps, n_from, n_to)?;
    FockState::from_amplitudes(state.n_modes, amps)
}

fn initial_state(params: &SiamParams, system: InitialImpurity) -> CVector {
    FockState::basis(params.n_modes(), &initial_occupations(params.n_bath(), system))
        .expect("occupation vector matches mode count")
        .amps
}

/// Trajectory `ψ(t_n)` for every grid point.
fn trajectory(prop: &EdPropagator, psi0: &CVector) -> Vec<CVector> {
    let mut out = Vec::with_capacity(prop.n_steps() + 1);
    out.push(psi0.clone());
    for k in 0..prop.n_steps() {
        let next = prop.step(k) * &out[k];
        out.push(next);
    }
    out
}

/// Impurity Green functions for one pure initial state.
pub fn greens_ed_system(
    params: &SiamParams,
    grid: &TimeGrid,
    system: InitialImpurity,
) -> Result<SpinGreens> {
    let prop = EdPropagator::new(params, grid)?;
    Ok(greens_from_propagator(&prop, &initial_state(params, system)))
}

fn greens_from_propagator(prop: &EdPropagator, psi0: &CVector) -> SpinGreens {
    let len = prop.n_steps() + 1;
    let psi = trajectory(prop, psi0);
    let mut out = SpinGreens::zeros(len);
    for spin in Spin::ALL {
        let mode = impurity_mode(spin);
        for (component, create) in [(Component::Greater, true), (Component::Lesser, false)] {
            // greater: -i ⟨c†ψ_n| U(n,m) c†ψ_m⟩ ; lesser: i ⟨U(n,m) cψ_m | cψ_n⟩
            let moved: Vec<CVector> = psi.iter().map(|v| apply_ladder(v, mode, create)).collect();
            let f = out.get_mut(component, spin);
            for m in 0..len {
                let mut chi = moved[m].clone();
                for n in m..len {
                    let z = match component {
                        Component::Greater => -I * moved[n].dotc(&chi),
                        Component::Lesser => I * chi.dotc(&moved[n]),
                    };
                    f.set(n, m, z);
                    if n + 1 < len {
                        chi = prop.step(n) * chi;
                    }
                }
            }
            f.fill_upper_from_lower();
        }
    }
    out
}

/// Local Green functions `½(G^α + G^β)` for both spins.
pub fn greens_ed(params: &SiamParams, grid: &TimeGrid) -> Result<SpinGreens> {
    let prop = EdPropagator::new(params, grid)?;
    let ga = greens_from_propagator(&prop, &initial_state(params, InitialImpurity::Alpha));
    let gb = greens_from_propagator(&prop, &initial_state(params, InitialImpurity::Beta));
    Ok(SpinGreens::average(&ga, &gb))
}

/// Impurity double occupation `⟨n↓ n↑⟩(t_n)` averaged over both initial states.
pub fn double_occupancy_ed(params: &SiamParams, grid: &TimeGrid) -> Result<Vec<f64>> {
    let prop = EdPropagator::new(params, grid)?;
    let (dn, up) = (impurity_mode(Spin::Down), impurity_mode(Spin::Up));
    let mut d = vec![0.0; grid.len()];
    for system in InitialImpurity::BOTH {
        for (n, psi) in trajectory(&prop, &initial_state(params, system)).into_iter().enumerate() {
            let st = FockState {
                n_modes: params.n_modes(),
                amps: psi,
            };
            d[n] += 0.5 * st.pair_occupation(dn, up);
        }
    }
    Ok(d)
}
