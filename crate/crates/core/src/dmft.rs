//! Bethe-lattice self-consistency: `Λ = v G v`, extraction of bath couplings
//! by Cholesky factorization and time slicing, and the iteration driver.

use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fermi::{double_occupancy_ed, greens_ed, HybridizationSet, SiamParams};
use crate::grid::{QuenchProfile, TimeGrid};
use crate::lindblad::{fit_hybridizations_noisy, BathModel, FitOptions, LindbladBathParams};
use crate::linalg::{hermiticity_defect, lstsq, CMatrix, CVector, I, ZERO};
use crate::two_time::{Component, Spin, SpinGreens, TwoTimeFunction};

/// Output of one impurity solve on a (possibly truncated) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpuritySolution {
    /// Local Green functions `½(G^α + G^β)`.
    pub greens: SpinGreens,
    /// `⟨n↓ n↑⟩(t_n)`.
    pub double_occupancy: Vec<f64>,
    /// Components actually computed; the others are left at zero.
    pub components: Vec<Component>,
}

/// Anything that maps couplings `V_pσ(t_n)` to impurity Green functions.
pub trait ImpuritySolver {
    fn solve(&mut self, params: &SiamParams, grid: &TimeGrid) -> Result<ImpuritySolution>;
    fn name(&self) -> &'static str;
}

/// Exact-diagonalization solver.
#[derive(Debug, Clone, Copy, Default)]
pub struct EdSolver;

impl ImpuritySolver for EdSolver {
    fn solve(&mut self, params: &SiamParams, grid: &TimeGrid) -> Result<ImpuritySolution> {
        Ok(ImpuritySolution {
            greens: greens_ed(params, grid)?,
            double_occupancy: double_occupancy_ed(params, grid)?,
            components: Component::ALL.to_vec(),
        })
    }

    fn name(&self) -> &'static str {
        "ed"
    }
}

/// `Λ(n, m) = v(t_n) G(n, m) v(t_m)`.
pub fn bethe_map(g: &TwoTimeFunction, quench: &QuenchProfile, grid: &TimeGrid) -> Result<TwoTimeFunction> {
    if g.len() > grid.len() {
        return Err(Error::Dimension {
            expected: grid.len(),
            got: g.len(),
        });
    }
    let v = quench.sample(grid);
    let mut out = g.clone();
    for n in 0..g.len() {
        for m in 0..g.len() {
            out.values[(n, m)] *= v[n] * v[m];
        }
    }
    Ok(out)
}

/// Bethe map applied to every component and spin.
pub fn bethe_map_all(g: &SpinGreens, quench: &QuenchProfile, grid: &TimeGrid) -> Result<SpinGreens> {
    let mut out = g.clone();
    for f in out.iter_mut() {
        *f = bethe_map(f, quench, grid)?;
    }
    Ok(out)
}

/// `½(f↓ + f↑)` for one component.
pub fn spin_average(g: &SpinGreens, component: Component) -> TwoTimeFunction {
    let (a, b) = (g.get(component, Spin::Down), g.get(component, Spin::Up));
    let mut out = a.clone();
    out.values = (&a.values + &b.values).scale(0.5);
    out
}

/// Nearest positive-semidefinite matrix (eigenvalue clipping) of the
/// Hermitian part of `a`.
pub fn psd_projection(a: &CMatrix) -> CMatrix {
    let h = (a + a.adjoint()).scale(0.5);
    let eig = h.clone().symmetric_eigen();
    if eig.eigenvalues.iter().all(|&e| e >= 0.0) {
        return h;
    }
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= C64::new(eig.eigenvalues[j].max(0.0), 0.0);
    }
    scaled * v.adjoint()
}

/// Lower-triangular `L` with real nonnegative diagonal and `L L† = a`
/// after projecting `a` onto the PSD cone. Vanishing pivots give zero
/// columns, so rank-deficient inputs are allowed.
pub fn cholesky_lower(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            got: a.ncols(),
        });
    }
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("Cholesky input"));
    }
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let defect = hermiticity_defect(a);
    if defect > 1e-8 * scale.max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let p = psd_projection(a);
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = p[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= tol {
            continue;
        }
        let ljj = d.sqrt();
        l[(j, j)] = C64::new(ljj, 0.0);
        for i in (j + 1)..n {
            let mut s = p[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Occupied-site couplings `V_p(t_n)`, `n = 0..=L`, from `−iΛ^<` on grid
/// points `1..=L`; `V_p(t_0) = 0` and `V_p(t_n) = 0` for `n < p`.
pub fn cholesky_hybridizations(lambda_lesser: &TwoTimeFunction, l: usize) -> Result<HybridizationSet> {
    if lambda_lesser.len() < l + 1 {
        return Err(Error::Dimension {
            expected: l + 1,
            got: lambda_lesser.len(),
        });
    }
    let a = CMatrix::from_fn(l, l, |i, j| -I * lambda_lesser.get(i + 1, j + 1));
    // sampled estimates are Hermitian only up to shot noise
    let chol = cholesky_lower(&(&a + a.adjoint()).scale(0.5))?;
    let occ = CMatrix::from_fn(l, l + 1, |p, n| if n == 0 { ZERO } else { chol[(n - 1, p)] });
    Ok(HybridizationSet::from_occupied(&occ))
}

/// New couplings at grid index `m_new` from row `m_new` of `−iΛ^<`, with
/// every earlier coupling held fixed. Returns the extended set and the
/// residual norm of the represented row (diagonal included).
pub fn time_slice_extend(
    v: &HybridizationSet,
    lambda_lesser: &TwoTimeFunction,
    m_new: usize,
) -> Result<(HybridizationSet, f64)> {
    let occ = v.occupied(Spin::Down);
    let l = occ.nrows();
    if m_new <= l || m_new >= lambda_lesser.len() || v.len() < m_new {
        return Err(Error::Domain(format!(
            "time slice {m_new} needs L = {l} < M < {} and couplings up to M - 1",
            lambda_lesser.len()
        )));
    }
    // −iΛ^<(M, m) = Σ_p V_p(t_M) conj(V_p(t_m)) for m < M
    let a = CMatrix::from_fn(m_new, l, |m, p| occ[(p, m)].conj());
    let x = CVector::from_fn(m_new, |m, _| -I * lambda_lesser.get(m_new, m));
    let w = lstsq(&a, &x);
    let row_res = (&a * &w - &x).norm_squared();
    let diag = w.norm_squared() - (-I * lambda_lesser.get(m_new, m_new)).re;
    let residual = (row_res + diag * diag).sqrt();

    let mut new_occ = CMatrix::zeros(l, m_new + 1);
    new_occ.view_mut((0, 0), (l, m_new)).copy_from(&occ.view((0, 0), (l, m_new)));
    for p in 0..l {
        new_occ[(p, m_new)] = w[p];
    }
    Ok((HybridizationSet::from_occupied(&new_occ), residual))
}

/// Atomic-limit (decoupled impurity) Green functions used as `g₀`.
pub fn initial_green_guess(u: f64, grid: &TimeGrid) -> Result<SpinGreens> {
    greens_ed(&SiamParams::new(u, HybridizationSet::zeros(0, grid.len())), grid)
}

/// How couplings are extracted from the measured hybridization function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Correction {
    /// Cholesky factorization and time slicing with ideal bath functions.
    None,
    /// Weighted least-squares fit with dissipative bath functions.
    DissipativeFit { bath: LindbladBathParams, mu_fit: f64 },
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Correction::None => f.write_str("none"),
            Correction::DissipativeFit { .. } => f.write_str("dissipative-fit"),
        }
    }
}

/// Parameters of the self-consistency loop.
#[derive(Debug, Clone, PartialEq)]
pub struct DmftConfig {
    pub grid: TimeGrid,
    pub u: f64,
    pub quench: QuenchProfile,
    /// Number of occupied/empty bath pairs; the bath has `2L` sites.
    pub l: usize,
    pub delta_conv: f64,
    pub max_iters: usize,
    /// Weight of the previous couplings in linear mixing (0 = none).
    pub mixing: f64,
    pub correction: Correction,
}

impl DmftConfig {
    pub fn new(grid: TimeGrid, u: f64, l: usize) -> Self {
        Self {
            grid,
            u,
            quench: QuenchProfile::default(),
            l,
            delta_conv: 1e-5,
            max_iters: 100,
            mixing: 0.0,
            correction: Correction::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta_conv.is_nan() || self.delta_conv <= 0.0 {
            return Err(Error::Config(format!("delta_conv must be positive, got {}", self.delta_conv)));
        }
        if self.l == 0 {
            return Err(Error::Config("L must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.mixing) {
            return Err(Error::Config(format!("mixing must lie in [0, 1), got {}", self.mixing)));
        }
        Ok(())
    }
}

/// One loop iteration as recorded in the convergence log.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Last grid index covered by the stage (`L` for the initial block).
    pub slice: usize,
    pub iteration: usize,
    /// `max |V − V_prev|` over the couplings updated in this stage.
    pub metric: f64,
    /// Representation residual of the extracted couplings.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceReport {
    pub history: Vec<IterationRecord>,
    pub iterations: usize,
    /// True iff every stage ended below the threshold.
    pub converged: bool,
    pub final_metric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DmftOutcome {
    pub hybridization: HybridizationSet,
    pub greens: SpinGreens,
    /// `Λ = v G v` for every computed component and spin.
    pub lambda: SpinGreens,
    pub double_occupancy: Vec<f64>,
    pub components: Vec<Component>,
    pub report: ConvergenceReport,
}

fn mix(new: HybridizationSet, old: &HybridizationSet, alpha: f64) -> HybridizationSet {
    if alpha == 0.0 {
        return new;
    }
    let mut out = new.clone();
    for spin in Spin::ALL {
        for p in 1..=new.n_bath() {
            for n in 0..new.len().min(old.len()) {
                let z = (1.0 - alpha) * new.get(spin, p, n) + alpha * old.get(spin, p, n);
                out.set(spin, p, n, z);
            }
        }
    }
    out
}

fn column_diff(a: &HybridizationSet, b: &HybridizationSet, n: usize) -> f64 {
    let mut worst = 0.0_f64;
    for spin in Spin::ALL {
        for p in 1..=a.n_bath() {
            worst = worst.max((a.get(spin, p, n) - b.get(spin, p, n)).norm());
        }
    }
    worst
}

struct Extractor<'a> {
    config: &'a DmftConfig,
}

impl Extractor<'_> {
    /// Couplings on the initial block `0..=end`.
    fn block(&self, lam: &TwoTimeFunction, end: usize, prev: &HybridizationSet) -> Result<(HybridizationSet, f64)> {
        let l = self.config.l;
        let lam_b = lam.truncated(end + 1);
        let chol = if end >= l {
            cholesky_hybridizations(&lam_b, l)?
        } else {
            // grid shorter than the rank: factor what exists, pad with zero sites
            let base = cholesky_hybridizations(&lam_b, end)?;
            let occ = CMatrix::from_fn(l, end + 1, |p, n| {
                if p < end {
                    base.occupied(Spin::Down)[(p, n)]
                } else {
                    ZERO
                }
            });
            HybridizationSet::from_occupied(&occ)
        };
        match self.config.correction {
            Correction::None => {
                let res = representation_residual(&chol, &lam_b);
                Ok((chol, res))
            }
            Correction::DissipativeFit { bath, mu_fit } => {
                let grid = self.config.grid.truncated(end);
                let model = BathModel::dissipative(&bath, &grid);
                // warm start from the previous fit once one exists
                let start = if prev.occupied(Spin::Down).iter().any(|z| *z != ZERO) {
                    prev.occupied(Spin::Down)
                } else {
                    chol.occupied(Spin::Down)
                };
                let target = lam_b.values.map(|z| -I * z);
                let fit = fit_hybridizations_noisy(&target, &model, mu_fit, &start, &grid, &FitOptions::default())?;
                Ok((fit.hybridization, fit.residual))
            }
        }
    }

    /// Couplings at slice `m` with everything earlier fixed.
    fn slice(&self, v: &HybridizationSet, lam: &TwoTimeFunction, m: usize) -> Result<(HybridizationSet, f64)> {
        let lam_m = lam.truncated(m + 1);
        let (ext, res) = time_slice_extend(v, &lam_m, m)?;
        match self.config.correction {
            Correction::None => Ok((ext, res)),
            Correction::DissipativeFit { bath, mu_fit } => {
                let grid = self.config.grid.truncated(m);
                let model = BathModel::dissipative(&bath, &grid);
                let target = lam_m.values.map(|z| -I * z);
                let opts = FitOptions {
                    fixed_before: m,
                    ..FitOptions::default()
                };
                let fit = fit_hybridizations_noisy(&target, &model, mu_fit, &ext.occupied(Spin::Down), &grid, &opts)?;
                Ok((fit.hybridization, fit.residual))
            }
        }
    }
}

/// Residual norm of `i V V†` against `Λ^<` on the lower triangle.
fn representation_residual(v: &HybridizationSet, lam: &TwoTimeFunction) -> f64 {
    let occ = v.occupied(Spin::Down);
    let len = occ.ncols().min(lam.len());
    let mut acc = 0.0;
    for n in 0..len {
        for m in 0..=n {
            let model: C64 = (0..occ.nrows()).map(|p| occ[(p, n)] * occ[(p, m)].conj()).sum();
            acc += (model - (-I * lam.get(n, m))).norm_sqr();
        }
    }
    acc.sqrt()
}

/// Run the non-equilibrium DMFT loop: the block of the first `L + 1` grid
/// points is iterated jointly, then each later grid point is added and
/// iterated to self-consistency before moving on.
pub fn run_self_consistency(config: &DmftConfig, solver: &mut dyn ImpuritySolver) -> Result<DmftOutcome> {
    config.validate()?;
    let grid = &config.grid;
    let l = config.l;
    let ext = Extractor { config };

    let g0 = initial_green_guess(config.u, grid)?;
    let mut lam = bethe_map(&spin_average(&g0, Component::Lesser), &config.quench, grid)?;
    let mut report = ConvergenceReport {
        converged: true,
        ..ConvergenceReport::default()
    };

    let update_lambda = |lam: &mut TwoTimeFunction, sol: &ImpuritySolution, len: usize| -> Result<()> {
        let lam_new = bethe_map(&spin_average(&sol.greens, Component::Lesser), &config.quench, &grid.truncated(len - 1))?;
        lam.values.view_mut((0, 0), (len, len)).copy_from(&lam_new.values);
        Ok(())
    };

    // initial block
    let end = l.min(grid.n_steps());
    let mut v = HybridizationSet::zeros(2 * l, end + 1);
    let mut solution = None;
    let mut stage_ok = false;
    let mut metric = f64::INFINITY;
    for it in 1..=config.max_iters {
        let (v_new, residual) = ext.block(&lam, end, &v)?;
        let v_new = mix(v_new, &v, config.mixing);
        metric = v_new.max_abs_diff(&v);
        v = v_new;
        let sol = solver.solve(&SiamParams::new(config.u, v.clone()), &grid.truncated(end))?;
        update_lambda(&mut lam, &sol, end + 1)?;
        solution = Some(sol);
        report.history.push(IterationRecord {
            slice: end,
            iteration: it,
            metric,
            residual,
        });
        report.iterations += 1;
        if metric < config.delta_conv {
            stage_ok = true;
            break;
        }
    }
    report.converged &= stage_ok;

    // time slices
    for m in (end + 1)..=grid.n_steps() {
        let mut v_cur = v.resized(m + 1);
        stage_ok = false;
        for it in 1..=config.max_iters {
            let (v_new, residual) = ext.slice(&v_cur.resized(m), &lam, m)?;
            let v_new = mix(v_new, &v_cur, config.mixing);
            metric = column_diff(&v_new, &v_cur, m);
            v_cur = v_new;
            let sol = solver.solve(&SiamParams::new(config.u, v_cur.clone()), &grid.truncated(m))?;
            update_lambda(&mut lam, &sol, m + 1)?;
            solution = Some(sol);
            report.history.push(IterationRecord {
                slice: m,
                iteration: it,
                metric,
                residual,
            });
            report.iterations += 1;
            if metric < config.delta_conv {
                stage_ok = true;
                break;
            }
        }
        report.converged &= stage_ok;
        v = v_cur;
    }
    report.final_metric = metric;

    let solution = solution.expect("at least one iteration runs");
    let lambda = bethe_map_all(&solution.greens, &config.quench, grid)?;
    Ok(DmftOutcome {
        hybridization: v,
        greens: solution.greens,
        lambda,
        double_occupancy: solution.double_occupancy,
        components: solution.components,
        report,
    })
}
