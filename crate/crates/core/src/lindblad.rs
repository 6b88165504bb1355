//! Dissipative-bath model of gate noise.
//!
//! Bath sites exchange particles with a reservoir through the jump operators
//! `√Γ⁻ c` (ejection) and `√Γ⁺ c†` (injection). For the quadratic (U = 0)
//! impurity model the single-particle correlations `C_ij = ⟨c_i† c_j⟩` obey
//! closed linear equations, and two-time functions follow from the quantum
//! regression theorem.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::dmft::{ImpuritySolution, ImpuritySolver};
use crate::error::{Error, Result};
use crate::fermi::{bath_initially_occupied, HybridizationSet, SiamParams};
use crate::grid::TimeGrid;
use crate::linalg::{expm, CMatrix, CVector, I, ONE};
use crate::two_time::{Component, Spin, SpinGreens, TwoTimeFunction};

/// Particle-exchange rates of every bath site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladBathParams {
    pub gamma_minus: f64,
    pub gamma_plus: f64,
}

impl LindbladBathParams {
    pub fn new(gamma_minus: f64, gamma_plus: f64) -> Result<Self> {
        if !(gamma_minus >= 0.0 && gamma_plus >= 0.0) || !gamma_minus.is_finite() || !gamma_plus.is_finite() {
            return Err(Error::Domain(format!(
                "Lindblad rates must be finite and nonnegative, got Γ⁻={gamma_minus}, Γ⁺={gamma_plus}"
            )));
        }
        Ok(Self {
            gamma_minus,
            gamma_plus,
        })
    }

    /// Equal ejection and injection rates.
    pub fn symmetric(gamma: f64) -> Result<Self> {
        Self::new(gamma, gamma)
    }

    pub fn ideal() -> Self {
        Self {
            gamma_minus: 0.0,
            gamma_plus: 0.0,
        }
    }

    pub fn is_ideal(&self) -> bool {
        self.gamma_minus == 0.0 && self.gamma_plus == 0.0
    }

    /// Relaxation rate of the occupation, `Γ⁻ + Γ⁺`.
    pub fn relaxation(&self) -> f64 {
        self.gamma_minus + self.gamma_plus
    }

    /// Decay rate of single-particle coherences, `(Γ⁻ + Γ⁺)/2`.
    pub fn coherence_decay(&self) -> f64 {
        0.5 * self.relaxation()
    }

    /// `Γ⁺/(Γ⁻ + Γ⁺)`, undefined for an isolated site.
    pub fn steady_occupation(&self) -> Option<f64> {
        let k = self.relaxation();
        (k > 0.0).then(|| self.gamma_plus / k)
    }

    /// Occupation at time `t` starting from `n0`.
    pub fn occupation(&self, n0: f64, t: f64) -> f64 {
        match self.steady_occupation() {
            Some(n_inf) => n_inf + (n0 - n_inf) * (-self.relaxation() * t).exp(),
            None => n0,
        }
    }
}

/// Reduced Green functions of one isolated dissipative bath site with ε = 0:
/// `lesser = −i g^<` and `greater = i g^>`, both Hermitian in `(t, t')`.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipativeBathGreen {
    pub initially_occupied: bool,
    pub lesser: CMatrix,
    pub greater: CMatrix,
}

impl DissipativeBathGreen {
    /// The function that equals one for an ideal site: the lesser part for an
    /// occupied site, the greater part for an empty one.
    pub fn h(&self) -> &CMatrix {
        if self.initially_occupied {
            &self.lesser
        } else {
            &self.greater
        }
    }
}

/// Closed-form solution of the single-site equations of motion:
/// `n(t)` relaxes at rate `Γ⁻ + Γ⁺` and coherences decay at `(Γ⁻ + Γ⁺)/2`.
pub fn bath_green_dissipative(
    bath: &LindbladBathParams,
    initially_occupied: bool,
    grid: &TimeGrid,
) -> DissipativeBathGreen {
    let len = grid.len();
    let n0 = if initially_occupied { 1.0 } else { 0.0 };
    let gamma = bath.coherence_decay();
    let occ: Vec<f64> = grid.times().map(|t| bath.occupation(n0, t)).collect();
    let mut lesser = CMatrix::zeros(len, len);
    let mut greater = CMatrix::zeros(len, len);
    for n in 0..len {
        for m in 0..len {
            let early = n.min(m);
            let damp = (-gamma * (grid.time(n) - grid.time(m)).abs()).exp();
            lesser[(n, m)] = C64::new(occ[early] * damp, 0.0);
            greater[(n, m)] = C64::new((1.0 - occ[early]) * damp, 0.0);
        }
    }
    DissipativeBathGreen {
        initially_occupied,
        lesser,
        greater,
    }
}

/// Per-step dynamics of one spin sector (impurity + bath sites).
struct Sector {
    /// Propagators `P_k` of `⟨c⟩` over step `k`.
    props: Vec<CMatrix>,
    /// `C(t_n)` with the impurity initially empty / occupied.
    corr: [Vec<CMatrix>; 2],
}

fn sector(hyb: &HybridizationSet, spin: Spin, bath: &LindbladBathParams, grid: &TimeGrid) -> Sector {
    let nb = hyb.n_bath();
    let d = nb + 1;
    let gamma = bath.coherence_decay();
    let mut c0 = CMatrix::zeros(d, d);
    for p in 1..=nb {
        if bath_initially_occupied(p) {
            c0[(p, p)] = ONE;
        }
    }
    let mut noise = CMatrix::zeros(d, d);
    for p in 1..=nb {
        noise[(p, p)] = C64::new(bath.gamma_plus, 0.0);
    }
    let mut corr = [vec![c0.clone()], vec![c0]];
    corr[1][0][(0, 0)] = ONE;
    let mut props = Vec::with_capacity(grid.n_steps());
    for k in 0..grid.n_steps() {
        // d⟨c⟩/dt = A⟨c⟩ with A = −ih − K
        let mut a = CMatrix::zeros(d, d);
        for p in 1..=nb {
            let v = hyb.get(spin, p, k);
            a[(0, p)] = -I * v;
            a[(p, 0)] = -I * v.conj();
            a[(p, p)] = C64::new(-gamma, 0.0);
        }
        let p_k = expm(&a.scale(grid.dt()));
        // dC/dt = B C + C B† + D with B = conj(A); Van Loan block exponential
        let b = a.map(|z| z.conj());
        let mut blk = CMatrix::zeros(2 * d, 2 * d);
        blk.view_mut((0, 0), (d, d)).copy_from(&(-&b));
        blk.view_mut((0, d), (d, d)).copy_from(&noise);
        blk.view_mut((d, d), (d, d)).copy_from(&b.adjoint());
        let e = expm(&blk.scale(grid.dt()));
        let f22 = e.view((d, d), (d, d)).into_owned();
        let w = f22.adjoint() * e.view((0, d), (d, d));
        let phi = p_k.map(|z| z.conj());
        for c in corr.iter_mut() {
            let last = c.last().expect("initial correlation present");
            let next = &phi * last * phi.adjoint() + &w;
            c.push(next);
        }
        props.push(p_k);
    }
    Sector { props, corr }
}

fn sector_greens(s: &Sector, spin: Spin, len: usize) -> (TwoTimeFunction, TwoTimeFunction) {
    let mut lesser = TwoTimeFunction::zeros(Component::Lesser, spin, len);
    let mut greater = TwoTimeFunction::zeros(Component::Greater, spin, len);
    let d = s.props.first().map_or(1, |p| p.nrows());
    for m in 0..len {
        // impurity initially half filled: average of the two pure cases
        let c = (&s.corr[0][m] + &s.corr[1][m]).scale(0.5);
        let mut y = CVector::from_fn(d, |k, _| c[(0, k)]);
        let mut z = CVector::from_fn(d, |k, _| if k == 0 { ONE - c[(0, k)] } else { -c[(0, k)] });
        for n in m..len {
            lesser.set(n, m, I * y[0]);
            greater.set(n, m, -I * z[0]);
            if n < s.props.len() {
                y = &s.props[n] * y;
                z = &s.props[n] * z;
            }
        }
    }
    lesser.fill_upper_from_lower();
    greater.fill_upper_from_lower();
    (lesser, greater)
}

/// Impurity Green functions of the non-interacting model with dissipative
/// bath sites.
pub fn solve_noninteracting_lindblad(
    params: &SiamParams,
    bath: &LindbladBathParams,
    grid: &TimeGrid,
) -> Result<SpinGreens> {
    Ok(solve_sectors(params, bath, grid)?.0)
}

fn solve_sectors(params: &SiamParams, bath: &LindbladBathParams, grid: &TimeGrid) -> Result<(SpinGreens, Vec<f64>)> {
    if params.u != 0.0 {
        return Err(Error::Interacting(params.u));
    }
    if params.hybridization.len() + 1 < grid.len() {
        return Err(Error::Dimension {
            expected: grid.len() - 1,
            got: params.hybridization.len(),
        });
    }
    let mut out = SpinGreens::zeros(grid.len());
    let mut occ = [[vec![], vec![]], [vec![], vec![]]];
    for spin in Spin::ALL {
        let s = sector(&params.hybridization, spin, bath, grid);
        let (l, g) = sector_greens(&s, spin, grid.len());
        *out.get_mut(Component::Lesser, spin) = l;
        *out.get_mut(Component::Greater, spin) = g;
        for f in 0..2 {
            occ[spin.index()][f] = s.corr[f].iter().map(|c| c[(0, 0)].re).collect();
        }
    }
    // α: ↑ occupied, ↓ empty; β the reverse; the spin sectors evolve independently
    let (dn, up) = (Spin::Down.index(), Spin::Up.index());
    let double = (0..grid.len())
        .map(|n| 0.5 * (occ[dn][0][n] * occ[up][1][n] + occ[dn][1][n] * occ[up][0][n]))
        .collect();
    Ok((out, double))
}

/// Impurity solver for U = 0 with dissipative bath sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladSolver {
    pub bath: LindbladBathParams,
}

impl ImpuritySolver for LindbladSolver {
    fn solve(&mut self, params: &SiamParams, grid: &TimeGrid) -> Result<ImpuritySolution> {
        let (greens, double_occupancy) = solve_sectors(params, &self.bath, grid)?;
        Ok(ImpuritySolution {
            greens,
            double_occupancy,
            components: Component::ALL.to_vec(),
        })
    }

    fn name(&self) -> &'static str {
        "lindblad"
    }
}

/// Reduced lesser functions `−i g^<` of the occupied and empty bath sites of
/// each pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BathModel {
    pub occupied: CMatrix,
    pub empty: CMatrix,
}

impl BathModel {
    /// Isolated sites: the occupied one contributes 1, the empty one 0.
    pub fn ideal(len: usize) -> Self {
        Self {
            occupied: CMatrix::from_element(len, len, ONE),
            empty: CMatrix::zeros(len, len),
        }
    }

    pub fn dissipative(bath: &LindbladBathParams, grid: &TimeGrid) -> Self {
        Self {
            occupied: bath_green_dissipative(bath, true, grid).lesser,
            empty: bath_green_dissipative(bath, false, grid).lesser,
        }
    }

    pub fn len(&self) -> usize {
        self.occupied.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `Σ_k V_k(n) o(n,m) conj(V_k(m)) + conj(V_k(n)) e(n,m) V_k(m)` for
    /// occupied-site couplings `v` (`L × len`).
    pub fn represent(&self, v: &CMatrix, n: usize, m: usize) -> C64 {
        let (o, e) = (self.occupied[(n, m)], self.empty[(n, m)]);
        (0..v.nrows())
            .map(|k| v[(k, n)] * o * v[(k, m)].conj() + v[(k, n)].conj() * e * v[(k, m)])
            .sum()
    }

    /// Full represented matrix `−iΛ^<`.
    pub fn represent_all(&self, v: &CMatrix) -> CMatrix {
        let len = v.ncols();
        CMatrix::from_fn(len, len, |n, m| self.represent(v, n, m))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Columns (grid indices) below this stay at their initial values.
    pub fixed_before: usize,
    pub max_sweeps: usize,
    pub rel_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            fixed_before: 1,
            max_sweeps: 200,
            rel_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub hybridization: HybridizationSet,
    /// Square root of the weighted objective.
    pub residual: f64,
    /// Objective after each sweep (index 0 is the starting value).
    pub history: Vec<f64>,
    pub sweeps: usize,
}

/// Weighted squared Frobenius objective of a representation against a target.
pub fn fit_objective(target: &CMatrix, model: &BathModel, weights: &DMatrix<f64>, v: &CMatrix) -> f64 {
    let len = v.ncols();
    let mut acc = 0.0;
    for n in 0..len {
        for m in 0..len {
            acc += weights[(n, m)].powi(2) * (model.represent(v, n, m) - target[(n, m)]).norm_sqr();
        }
    }
    acc
}

fn weight_matrix(grid: &TimeGrid, len: usize, mu: f64) -> DMatrix<f64> {
    DMatrix::from_fn(len, len, |n, m| (-mu * (grid.time(n) - grid.time(m)).abs()).exp())
}

/// Part of the objective that involves column `n`.
fn column_objective(target: &CMatrix, model: &BathModel, w: &DMatrix<f64>, v: &CMatrix, n: usize) -> f64 {
    let mut acc = 0.0;
    for m in 0..v.ncols() {
        let r = (model.represent(v, n, m) - target[(n, m)]).norm_sqr();
        acc += if m == n { r * w[(n, n)].powi(2) } else { 2.0 * r * w[(n, m)].powi(2) };
    }
    acc
}

/// One Gauss–Newton step on column `n` with a backtracking line search;
/// never increases the objective.
fn update_column(target: &CMatrix, model: &BathModel, w: &DMatrix<f64>, v: &mut CMatrix, n: usize) {
    let (l, len) = v.shape();
    let rows = 2 * len - 1;
    let mut jac = DMatrix::<f64>::zeros(rows, 2 * l);
    let mut res = DVector::<f64>::zeros(rows);
    let mut r = 0;
    for m in 0..len {
        if m == n {
            continue;
        }
        let wt = std::f64::consts::SQRT_2 * w[(n, m)];
        let (o, e) = (model.occupied[(n, m)], model.empty[(n, m)]);
        for k in 0..l {
            let a = o * v[(k, m)].conj();
            let b = e * v[(k, m)];
            let dx = a + b;
            let dy = I * (a - b);
            jac[(r, k)] = wt * dx.re;
            jac[(r, l + k)] = wt * dy.re;
            jac[(r + 1, k)] = wt * dx.im;
            jac[(r + 1, l + k)] = wt * dy.im;
        }
        let diff = model.represent(v, n, m) - target[(n, m)];
        res[r] = wt * diff.re;
        res[r + 1] = wt * diff.im;
        r += 2;
    }
    let h = (model.occupied[(n, n)] + model.empty[(n, n)]).re;
    let wd = w[(n, n)];
    for k in 0..l {
        jac[(r, k)] = wd * 2.0 * v[(k, n)].re * h;
        jac[(r, l + k)] = wd * 2.0 * v[(k, n)].im * h;
    }
    res[r] = wd * (model.represent(v, n, n) - target[(n, n)]).re;

    let svd = jac.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let Ok(step) = svd.solve(&(-res), (smax * 1e-12).max(1e-300)) else {
        return;
    };
    let before = column_objective(target, model, w, v, n);
    let orig: Vec<C64> = (0..l).map(|k| v[(k, n)]).collect();
    let mut s = 1.0;
    while s > 1e-10 {
        for k in 0..l {
            v[(k, n)] = orig[k] + s * C64::new(step[k], step[l + k]);
        }
        if column_objective(target, model, w, v, n) < before {
            return;
        }
        s *= 0.5;
    }
    for k in 0..l {
        v[(k, n)] = orig[k];
    }
}

/// Couplings minimizing `Σ |f(t,t')|² |Σ_p V_p(t) h_p(t,t') V_p*(t') − (−iΛ^<)(t,t')|²`
/// with `f = exp(−μ|t − t'|)`, by block-coordinate Gauss–Newton sweeps over
/// grid indices. `target` is `−iΛ^<`; `initial` holds the occupied-site
/// couplings (`L × len`).
pub fn fit_hybridizations_noisy(
    target: &CMatrix,
    model: &BathModel,
    mu_fit: f64,
    initial: &CMatrix,
    grid: &TimeGrid,
    options: &FitOptions,
) -> Result<FitResult> {
    let len = target.nrows();
    if target.ncols() != len || model.len() != len || initial.ncols() != len || grid.len() != len {
        return Err(Error::Dimension {
            expected: len,
            got: initial.ncols(),
        });
    }
    let finite = |m: &CMatrix| m.iter().all(|z| z.re.is_finite() && z.im.is_finite());
    if !finite(target) || !finite(initial) || !finite(&model.occupied) || !finite(&model.empty) || !mu_fit.is_finite() {
        return Err(Error::NonFinite("hybridization fit"));
    }
    let w = weight_matrix(grid, len, mu_fit);
    let mut v = initial.clone();
    let mut obj = fit_objective(target, model, &w, &v);
    let mut history = vec![obj];
    let scale = target.iter().map(|z| z.norm_sqr()).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut sweeps = 0;
    while sweeps < options.max_sweeps && obj > 1e-30 * scale {
        for n in options.fixed_before..len {
            update_column(target, model, &w, &mut v, n);
        }
        sweeps += 1;
        let next = fit_objective(target, model, &w, &v);
        history.push(next);
        let change = (obj - next) / obj.max(f64::MIN_POSITIVE);
        obj = next;
        if change < options.rel_tol {
            break;
        }
    }
    Ok(FitResult {
        hybridization: HybridizationSet::from_occupied(&v),
        residual: obj.sqrt(),
        history,
        sweeps,
    })
}

/// Fitted exponential decay of a noisy hybridization function relative to
/// the ideal one.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub eta: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Slope through the origin of `−log |Im Λ_noisy / Im Λ_ideal|` against
/// `|t − t'|` over the strictly lower triangle, restricted to entries where
/// `|Im Λ_ideal|` exceeds `floor_rel · max |Im Λ_ideal|`.
pub fn estimate_decay_rate(
    noisy: &TwoTimeFunction,
    ideal: &TwoTimeFunction,
    grid: &TimeGrid,
    floor_rel: f64,
) -> Result<DecayFit> {
    if noisy.len() != ideal.len() || ideal.len() > grid.len() {
        return Err(Error::Dimension {
            expected: ideal.len(),
            got: noisy.len(),
        });
    }
    let len = ideal.len();
    let max_im = ideal.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let floor = floor_rel * max_im;
    let mut pts = Vec::new();
    for n in 0..len {
        for m in 0..n {
            let (a, b) = (noisy.get(n, m).im, ideal.get(n, m).im);
            if b.abs() > floor && b != 0.0 {
                let ratio = (a / b).abs();
                if ratio > 0.0 && ratio.is_finite() {
                    pts.push(((grid.time(n) - grid.time(m)).abs(), -ratio.ln()));
                }
            }
        }
    }
    if pts.is_empty() {
        return Err(Error::EmptyFitBand);
    }
    let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let mean = pts.iter().map(|(_, y)| y).sum::<f64>() / pts.len() as f64;
    let ss_res: f64 = pts.iter().map(|(x, y)| (y - slope * x).powi(2)).sum();
    let ss_tot: f64 = pts.iter().map(|(_, y)| (y - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res <= 1e-24 {
        1.0
    } else {
        0.0
    };
    Ok(DecayFit {
        eta: slope.max(0.0),
        r_squared,
        points: pts.len(),
    })
}

/// Mean over the grid of `|Λ_a − Λ_b|`.
pub fn mean_abs_difference(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.len().max(1);
    (a - b).iter().map(|z| z.norm()).sum::<f64>() / n as f64
}
