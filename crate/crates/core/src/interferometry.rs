//! Probe-qubit Ramsey readout of impurity Green functions.
//!
//! Every two-time contribution `F(t, t') = ⟨σ_late(t) σ_early(t')⟩` is read
//! from a fresh circuit: Hadamard on the probe, evolve to `t'`, controlled
//! `σ_early` (control value 0), evolve to `t`, controlled `σ_late` (control
//! value 1), Hadamard, then `F = ⟨σ^z⟩ + i⟨σ^y⟩` of the probe.

use std::collections::HashMap;
use std::ops::Range;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::compiler::compile_trotter_step;
use crate::dmft::{ImpuritySolution, ImpuritySolver};
use crate::error::{Error, Result};
use crate::fermi::{impurity_mode, initial_occupations, HybridizationSet, InitialImpurity, SiamParams};
use crate::grid::TimeGrid;
use crate::linalg::{I, ZERO};
use crate::qubit::{jw_encode, noisify, stream_rng, GateSpec, NoiseModel, Pauli, PauliString, Statevector};
use crate::two_time::{Component, Spin, SpinGreens, TwoTimeFunction};

/// Probe qubit index; system mode `j` lives on qubit `j + 1`.
pub const PROBE: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasurementMode {
    /// Exact probe expectation values.
    Exact,
    /// Each of ⟨σ^z⟩ and ⟨σ^y⟩ estimated from this many projective shots.
    Sampled { shots: u64 },
}

impl MeasurementMode {
    pub fn validate(self) -> Result<Self> {
        match self {
            MeasurementMode::Sampled { shots: 0 } => {
                Err(Error::Config("sampled measurement needs at least one shot".into()))
            }
            m => Ok(m),
        }
    }
}

/// One of the four probe measurements making up a Green-function entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ContributionSpec {
    /// String inserted at the earlier time (system-register numbering).
    pub sigma_early: PauliString,
    /// String inserted at the later time.
    pub sigma_late: PauliString,
    pub prefactor: C64,
    pub component: Component,
    pub spin: Spin,
}

/// The σ^x- and σ^y-type Jordan–Wigner strings of the impurity annihilator.
pub fn annihilator_strings(spin: Spin) -> [PauliString; 2] {
    let q = impurity_mode(spin);
    let build = |p: Pauli| {
        PauliString::new((0..q).map(|j| (j, Pauli::Z)).chain(std::iter::once((q, p))))
            .expect("distinct qubits")
    };
    [build(Pauli::X), build(Pauli::Y)]
}

/// The four contributions for one component and spin, ordered
/// (late, early) = (x, x), (x, y), (y, x), (y, y).
///
/// Greater weights give `G^>(t, t')` with `t` the later time; lesser weights
/// give `G^<(t', t)`, from which the stored lower triangle follows by
/// skew-Hermiticity.
pub fn contributions(component: Component, spin: Spin) -> [ContributionSpec; 4] {
    let [x, y] = annihilator_strings(spin);
    let q = C64::new(0.25, 0.0);
    let weights = match component {
        Component::Greater => [-I * q, -q, q, -I * q],
        Component::Lesser => [I * q, -q, q, I * q],
    };
    let pairs = [(&x, &x), (&x, &y), (&y, &x), (&y, &y)];
    std::array::from_fn(|k| ContributionSpec {
        sigma_early: pairs[k].1.clone(),
        sigma_late: pairs[k].0.clone(),
        prefactor: weights[k],
        component,
        spin,
    })
}

/// Probe + system register with the probe in `|0⟩`.
pub fn with_probe(system: &Statevector) -> Statevector {
    let mut amps = vec![ZERO; 2 * system.amplitudes().len()];
    for (i, a) in system.amplitudes().iter().enumerate() {
        amps[i << 1] = *a;
    }
    Statevector::from_amplitudes(amps).expect("power-of-two length")
}

/// Initial product state on the system register alone (mode `j` on qubit `j`).
fn system_state(n_bath: usize, system: InitialImpurity) -> Result<Statevector> {
    let full = jw_encode(&initial_occupations(n_bath, system), n_bath)?;
    let index = full.amplitudes().iter().position(|a| *a != ZERO).expect("basis state");
    Ok(Statevector::basis(full.n_qubits() - 1, index >> 1))
}

fn evolve<R: Rng + ?Sized>(
    state: &mut Statevector,
    steps: &[Vec<GateSpec>],
    range: Range<usize>,
    offset: usize,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<()> {
    for step in &steps[range] {
        for g in step {
            let g = g.shifted(offset);
            if noise.is_noiseless() {
                state.apply(&g)?;
            } else {
                state.apply(&noisify(&g, noise, rng))?;
            }
        }
    }
    Ok(())
}

fn read_probe<R: Rng + ?Sized>(state: &Statevector, mode: MeasurementMode, rng: &mut R) -> Result<C64> {
    let z = state.expect_z(PROBE);
    let y = state.expect_y(PROBE);
    match mode.validate()? {
        MeasurementMode::Exact => Ok(C64::new(z, y)),
        MeasurementMode::Sampled { shots } => {
            let mut estimate = |e: f64| -> f64 {
                let p = (0.5 * (1.0 + e)).clamp(0.0, 1.0);
                let k = Binomial::new(shots, p).expect("valid probability").sample(rng);
                2.0 * k as f64 / shots as f64 - 1.0
            };
            let z = estimate(z);
            let y = estimate(y);
            Ok(C64::new(z, y))
        }
    }
}

/// Run the Ramsey circuit from the system state at grid index `start`.
/// Until the first controlled gate the probe is unentangled, so the
/// evolution up to `t'` runs on the system register alone.
#[allow(clippy::too_many_arguments)]
fn ramsey_from<R: Rng + ?Sized>(
    mut system: Statevector,
    start: usize,
    steps: &[Vec<GateSpec>],
    early: usize,
    late: usize,
    sigma_early: Option<&PauliString>,
    sigma_late: Option<&PauliString>,
    noise: &NoiseModel,
    mode: MeasurementMode,
    rng: &mut R,
) -> Result<C64> {
    if start > early || early > late || late > steps.len() {
        return Err(Error::Domain(format!(
            "Ramsey indices must satisfy start ≤ early ≤ late ≤ {} (got {start}, {early}, {late})",
            steps.len()
        )));
    }
    evolve(&mut system, steps, start..early, 0, noise, rng)?;
    let mut state = with_probe(&system);
    state.apply(&GateSpec::Hadamard { qubit: PROBE })?;
    if let Some(s) = sigma_early {
        state.apply_controlled_pauli(PROBE, false, &s.shifted(1))?;
    }
    evolve(&mut state, steps, early..late, 1, noise, rng)?;
    if let Some(s) = sigma_late {
        state.apply_controlled_pauli(PROBE, true, &s.shifted(1))?;
    }
    state.apply(&GateSpec::Hadamard { qubit: PROBE })?;
    read_probe(&state, mode, rng)
}

/// `F(t_late, t_early)` for a system state at `t = 0` and per-step gate
/// programs on the system register. `None` strings stand for the identity.
#[allow(clippy::too_many_arguments)]
pub fn ramsey_contribution<R: Rng + ?Sized>(
    system: &Statevector,
    steps: &[Vec<GateSpec>],
    early: usize,
    late: usize,
    sigma_early: Option<&PauliString>,
    sigma_late: Option<&PauliString>,
    noise: &NoiseModel,
    mode: MeasurementMode,
    rng: &mut R,
) -> Result<C64> {
    ramsey_from(
        system.clone(),
        0,
        steps,
        early,
        late,
        sigma_early,
        sigma_late,
        noise,
        mode,
        rng,
    )
}

/// Measurement count per time step for a target standard deviation `eps`
/// of every probe expectation value.
pub fn shot_budget(eps: f64, spin_symmetric: bool) -> Result<u64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("target deviation must be positive, got {eps}")));
    }
    let x = 1.0 / (eps * eps);
    let r = x.round();
    // 1/0.02² evaluates to 2500.0000000000005; do not let rounding noise add a shot
    let per = if (x - r).abs() <= 1e-9 * x { r } else { x.ceil() } as u64;
    let full = 2 * 2 * 2 * 4 * 2 * per;
    Ok(if spin_symmetric { full / 2 } else { full })
}

fn pair_index(n: usize, m: usize) -> usize {
    n * (n + 1) / 2 + m
}

type TableKey = (InitialImpurity, Component, Spin);

/// Raw contribution values `F` indexed by initial state, component, spin and
/// grid pair `(n, m)` with `n ≥ m`.
#[derive(Debug, Clone, Default)]
pub struct ContributionTable {
    len: usize,
    values: HashMap<TableKey, Vec<[Option<C64>; 4]>>,
}

impl ContributionTable {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            values: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Store `F` for contribution `k` at `(n, m)`, `n ≥ m`.
    #[allow(clippy::too_many_arguments)]
    pub fn insert(
        &mut self,
        system: InitialImpurity,
        component: Component,
        spin: Spin,
        n: usize,
        m: usize,
        k: usize,
        value: C64,
    ) {
        assert!(m <= n && n < self.len && k < 4, "pair ({n}, {m}) outside table");
        let len = self.len;
        let row = self
            .values
            .entry((system, component, spin))
            .or_insert_with(|| vec![[None; 4]; len * (len + 1) / 2]);
        row[pair_index(n, m)][k] = Some(value);
    }

    pub fn get(&self, key: TableKey, n: usize, m: usize, k: usize) -> Option<C64> {
        self.values.get(&key).and_then(|v| v[pair_index(n, m)][k])
    }

    /// Drop every entry with row index `≥ len`.
    pub fn truncate(&mut self, len: usize) {
        let len = len.min(self.len);
        for v in self.values.values_mut() {
            v.truncate(len * (len + 1) / 2);
        }
        self.len = len;
    }

    /// Grow to `len` rows, keeping stored values.
    pub fn extend_to(&mut self, len: usize) {
        if len <= self.len {
            return;
        }
        for v in self.values.values_mut() {
            v.resize(len * (len + 1) / 2, [None; 4]);
        }
        self.len = len;
    }
}

/// Green function of one pure initial state.
pub fn assemble_system_green(
    table: &ContributionTable,
    system: InitialImpurity,
    component: Component,
    spin: Spin,
) -> Result<TwoTimeFunction> {
    let specs = contributions(component, spin);
    let mut f = TwoTimeFunction::zeros(component, spin, table.len());
    for n in 0..table.len() {
        for m in 0..=n {
            let mut z = ZERO;
            for (k, spec) in specs.iter().enumerate() {
                let v = table.get((system, component, spin), n, m, k).ok_or_else(|| {
                    Error::MissingContribution(format!(
                        "{system:?} {} {spin} at ({n}, {m}), term {k}",
                        component.name()
                    ))
                })?;
                z += spec.prefactor * v;
            }
            match component {
                Component::Greater => f.set(n, m, z),
                // the lesser weights produce the (m, n) entry
                Component::Lesser => f.set(n, m, -z.conj()),
            }
        }
    }
    f.fill_upper_from_lower();
    Ok(f)
}

/// Local Green function `½(G^α + G^β)`; with `spin_symmetric` only β is
/// needed since `G^α_σ = G^β_σ̄`.
pub fn assemble_green(
    table: &ContributionTable,
    component: Component,
    spin: Spin,
    spin_symmetric: bool,
) -> Result<TwoTimeFunction> {
    let beta = assemble_system_green(table, InitialImpurity::Beta, component, spin)?;
    let other = if spin_symmetric {
        let mut g = assemble_system_green(table, InitialImpurity::Beta, component, spin.flipped())?;
        g.spin = spin;
        g
    } else {
        assemble_system_green(table, InitialImpurity::Alpha, component, spin)?
    };
    let mut out = beta;
    out.values = (&out.values + &other.values).scale(0.5);
    Ok(out)
}

/// Settings of the circuit-level impurity solver.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSolverConfig {
    pub noise: NoiseModel,
    pub mode: MeasurementMode,
    pub realizations: usize,
    pub seed: u64,
    /// Measure the β system only and use spin symmetry for α.
    pub spin_symmetric: bool,
    /// Components to measure; the self-consistency only consumes the lesser one.
    pub components: Vec<Component>,
}

impl Default for CircuitSolverConfig {
    fn default() -> Self {
        Self {
            noise: NoiseModel::noiseless(),
            mode: MeasurementMode::Exact,
            realizations: 1,
            seed: 0,
            spin_symmetric: false,
            components: Component::ALL.to_vec(),
        }
    }
}

impl CircuitSolverConfig {
    fn systems(&self) -> &'static [InitialImpurity] {
        if self.spin_symmetric {
            &[InitialImpurity::Beta]
        } else {
            &InitialImpurity::BOTH
        }
    }

    /// Noiseless exact circuits are deterministic, so one realization suffices.
    fn effective_realizations(&self) -> usize {
        if self.noise.is_noiseless() && self.mode == MeasurementMode::Exact {
            1
        } else {
            self.realizations.max(1)
        }
    }
}

// Stream tags keep the RNG streams of different circuit families disjoint.
const TAG_RAMSEY: u64 = 1;
const TAG_DOUBLE: u64 = 2;

struct RowCache {
    u: f64,
    dt: f64,
    hybridization: HybridizationSet,
    table: ContributionTable,
    double_occupancy: Vec<f64>,
}

/// Circuit-level impurity solver. Rows of the Green function whose inputs
/// (the couplings at earlier grid points) are unchanged since the previous
/// call are reused.
pub struct CircuitSolver {
    pub config: CircuitSolverConfig,
    cache: Option<RowCache>,
}

impl CircuitSolver {
    pub fn new(config: CircuitSolverConfig) -> Self {
        Self { config, cache: None }
    }

    /// Number of leading rows whose inputs match the cache.
    fn valid_rows(&self, params: &SiamParams, grid: &TimeGrid) -> usize {
        let Some(c) = &self.cache else { return 0 };
        if c.u.to_bits() != params.u.to_bits()
            || c.dt.to_bits() != grid.dt().to_bits()
            || c.hybridization.n_bath() != params.n_bath()
        {
            return 0;
        }
        let cols = c.hybridization.len().min(params.hybridization.len());
        let mut same = 0;
        'cols: while same < cols {
            for spin in Spin::ALL {
                let (a, b) = (c.hybridization.matrix(spin), params.hybridization.matrix(spin));
                for p in 0..a.nrows() {
                    let (x, y) = (a[(p, same)], b[(p, same)]);
                    if x.re.to_bits() != y.re.to_bits() || x.im.to_bits() != y.im.to_bits() {
                        break 'cols;
                    }
                }
            }
            same += 1;
        }
        // row n depends on couplings at indices < n
        (same + 1).min(c.table.len())
    }

    fn measure(&mut self, params: &SiamParams, grid: &TimeGrid) -> Result<RowCache> {
        let len = grid.len();
        let keep = self.valid_rows(params, grid).min(len);
        let (mut table, mut dbl) = match self.cache.take() {
            Some(c) => (c.table, c.double_occupancy),
            None => (ContributionTable::new(0), Vec::new()),
        };
        table.truncate(keep);
        table.extend_to(len);
        dbl.truncate(keep);

        let steps: Vec<Vec<GateSpec>> = (0..grid.n_steps())
            .map(|n| compile_trotter_step(params, n, grid.dt()).map(|p| p.gates().cloned().collect()))
            .collect::<Result<_>>()?;
        let n_bath = params.n_bath();
        let cfg = &self.config;
        let systems = cfg.systems();
        let reals = cfg.effective_realizations();
        let noiseless = cfg.noise.is_noiseless();

        // noiseless trajectories let every circuit start at its early time
        let trajectories: Vec<Vec<Statevector>> = if noiseless {
            systems
                .iter()
                .map(|&s| {
                    let mut sv = system_state(n_bath, s)?;
                    let mut out = vec![sv.clone()];
                    let mut rng = stream_rng(cfg.seed, &[]);
                    for n in 0..grid.n_steps() {
                        evolve(&mut sv, &steps, n..n + 1, 0, &cfg.noise, &mut rng)?;
                        out.push(sv.clone());
                    }
                    Ok(out)
                })
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };

        let items: Vec<(usize, usize)> =
            (keep..len).flat_map(|n| (0..=n).map(move |m| (n, m))).collect();
        type ItemOut = Vec<(InitialImpurity, Component, Spin, [C64; 4])>;
        let results: Vec<Result<ItemOut>> = items
            .par_iter()
            .map(|&(n, m)| {
                let mut out = Vec::new();
                for (si, &system) in systems.iter().enumerate() {
                    let initial = system_state(n_bath, system)?;
                    for &component in &cfg.components {
                        for spin in Spin::ALL {
                            let specs = contributions(component, spin);
                            let mut vals = [ZERO; 4];
                            for (k, spec) in specs.iter().enumerate() {
                                let mut acc = ZERO;
                                for r in 0..reals {
                                    let key = [
                                        TAG_RAMSEY,
                                        r as u64,
                                        n as u64,
                                        m as u64,
                                        system.index() as u64,
                                        component as u64,
                                        spin.index() as u64,
                                        k as u64,
                                    ];
                                    let mut rng = stream_rng(cfg.seed, &key);
                                    let (state, start) = if noiseless {
                                        (trajectories[si][m].clone(), m)
                                    } else {
                                        (initial.clone(), 0)
                                    };
                                    acc += ramsey_from(
                                        state,
                                        start,
                                        &steps,
                                        m,
                                        n,
                                        Some(&spec.sigma_early),
                                        Some(&spec.sigma_late),
                                        &cfg.noise,
                                        cfg.mode,
                                        &mut rng,
                                    )?;
                                }
                                vals[k] = acc / reals as f64;
                            }
                            out.push((system, component, spin, vals));
                        }
                    }
                }
                Ok(out)
            })
            .collect();
        for (&(n, m), res) in items.iter().zip(results) {
            for (system, component, spin, vals) in res? {
                for (k, v) in vals.into_iter().enumerate() {
                    table.insert(system, component, spin, n, m, k, v);
                }
            }
        }

        let mask = (1usize << impurity_mode(Spin::Down)) | (1usize << impurity_mode(Spin::Up));
        let new_d: Vec<Result<f64>> = (keep..len)
            .into_par_iter()
            .map(|n| {
                let mut acc = 0.0;
                for (si, &system) in systems.iter().enumerate() {
                    if noiseless {
                        acc += trajectories[si][n].prob_all_set(mask) * reals as f64;
                        continue;
                    }
                    for r in 0..reals {
                        let key = [TAG_DOUBLE, r as u64, n as u64, system.index() as u64];
                        let mut rng = stream_rng(cfg.seed, &key);
                        let mut sv = system_state(n_bath, system)?;
                        evolve(&mut sv, &steps, 0..n, 0, &cfg.noise, &mut rng)?;
                        acc += sv.prob_all_set(mask);
                    }
                }
                Ok(acc / (reals * systems.len()) as f64)
            })
            .collect();
        for d in new_d {
            dbl.push(d?);
        }

        Ok(RowCache {
            u: params.u,
            dt: grid.dt(),
            hybridization: params.hybridization.clone(),
            table,
            double_occupancy: dbl,
        })
    }

    /// Raw contribution table of the most recent solve.
    pub fn table(&self) -> Option<&ContributionTable> {
        self.cache.as_ref().map(|c| &c.table)
    }
}

impl ImpuritySolver for CircuitSolver {
    fn solve(&mut self, params: &SiamParams, grid: &TimeGrid) -> Result<ImpuritySolution> {
        let cache = self.measure(params, grid)?;
        let mut greens = SpinGreens::zeros(grid.len());
        for &component in &self.config.components {
            for spin in Spin::ALL {
                *greens.get_mut(component, spin) =
                    assemble_green(&cache.table, component, spin, self.config.spin_symmetric)?;
            }
        }
        let solution = ImpuritySolution {
            greens,
            double_occupancy: cache.double_occupancy.clone(),
            components: self.config.components.clone(),
        };
        self.cache = Some(cache);
        Ok(solution)
    }

    fn name(&self) -> &'static str {
        "circuit"
    }
}

/// One-shot circuit measurement of the impurity Green functions.
pub fn measure_impurity_green(
    params: &SiamParams,
    grid: &TimeGrid,
    config: &CircuitSolverConfig,
) -> Result<ImpuritySolution> {
    if config.realizations == 0 {
        return Err(Error::Config("realizations must be at least 1".into()));
    }
    CircuitSolver::new(config.clone()).solve(params, grid)
}
