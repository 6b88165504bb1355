//! Dense reference constructions shared by the integration tests. Everything
//! here is built from explicit Kronecker products and eigendecompositions,
//! independent of the amplitude-update code paths under test.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use neqdmft_core::qubit::{Axis, GateSpec, Pauli, PauliString};
use neqdmft_core::{CMatrix, C64};
use rand::Rng;

pub fn pauli_dense(p: Pauli) -> CMatrix {
    let (o, z, i) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 1.0));
    match p {
        Pauli::I => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        Pauli::X => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// Kronecker product with qubit `n-1` leftmost (bit q of the index = qubit q).
pub fn kron_ops(ops: &[CMatrix]) -> CMatrix {
    let mut m = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for op in ops.iter().rev() {
        m = m.kronecker(op);
    }
    m
}

pub fn string_dense(s: &PauliString, n_qubits: usize) -> CMatrix {
    let ops: Vec<CMatrix> = (0..n_qubits).map(|q| pauli_dense(s.on(q))).collect();
    kron_ops(&ops)
}

pub fn single_dense(op: &CMatrix, qubit: usize, n_qubits: usize) -> CMatrix {
    let ops: Vec<CMatrix> = (0..n_qubits)
        .map(|q| if q == qubit { op.clone() } else { pauli_dense(Pauli::I) })
        .collect();
    kron_ops(&ops)
}

/// `exp(i * a * herm)` for a Hermitian matrix via its eigendecomposition.
pub fn exp_i_herm(herm: &CMatrix, a: f64) -> CMatrix {
    let eig = herm.clone().symmetric_eigen();
    let v = eig.eigenvectors.clone();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::from_polar(1.0, a * e)));
    &v * d * v.adjoint()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Distance after removing the best global phase.
pub fn phase_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let ov: C64 = (b.adjoint() * a).trace();
    let ph = if ov.norm() > 0.0 { ov / ov.norm() } else { C64::new(1.0, 0.0) };
    max_abs(&(a - b.map(|z| z * ph)))
}

pub fn random_state<R: Rng>(rng: &mut R, dim: usize) -> Vec<C64> {
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
    v
}

pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    let h = DMatrix::from_fn(dim, dim, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let herm = (&h + h.adjoint()).scale(0.5);
    exp_i_herm(&herm, 1.0)
}

/// SIAM Hamiltonian assembled term by term from the Jordan–Wigner matrices.
pub fn jw_hamiltonian(params: &neqdmft_core::fermi::SiamParams, n: usize) -> CMatrix {
    use neqdmft_core::fermi::{bath_mode, impurity_mode};
    use neqdmft_core::qubit::jw_operator_matrices;
    use neqdmft_core::Spin;
    let c = jw_operator_matrices(params.n_bath());
    let dim = c[0].nrows();
    let id = DMatrix::<C64>::identity(dim, dim);
    let num = |j: usize| c[j].adjoint() * &c[j];
    let half = id.scale(0.5);
    let mut h = (num(impurity_mode(Spin::Up)) - &half) * (num(impurity_mode(Spin::Down)) - &half);
    h = h.scale(params.u);
    for spin in Spin::ALL {
        for p in 1..=params.n_bath() {
            let v = params.hybridization.get(spin, p, n);
            let (a, b) = (impurity_mode(spin), bath_mode(p, spin));
            let hop = c[a].adjoint() * &c[b];
            h += hop.map(|z| z * v) + hop.adjoint().map(|z| z * v.conj());
        }
    }
    h
}

/// Quench-shaped complex couplings for `l` occupied/empty pairs.
pub fn quench_hybridization(l: usize, len: usize, dt: f64) -> neqdmft_core::fermi::HybridizationSet {
    use neqdmft_core::{quench_v, QuenchProfile};
    let q = QuenchProfile::default();
    let occ = CMatrix::from_fn(l, len, |k, n| {
        let t = n as f64 * dt;
        let v = quench_v(t, &q).unwrap();
        C64::from_polar(v * (0.7 - 0.2 * k as f64), 0.3 + 0.8 * t + 0.5 * k as f64)
    });
    neqdmft_core::fermi::HybridizationSet::from_occupied(&occ)
}

/// Annihilators `Z..Z σ⁺` on `n` modes built from explicit Kronecker products.
pub fn dense_annihilators(n: usize) -> Vec<CMatrix> {
    let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    let lower = DMatrix::from_row_slice(2, 2, &[z, o, z, z]);
    (0..n)
        .map(|j| {
            let ops: Vec<CMatrix> = (0..n)
                .map(|q| match q.cmp(&j) {
                    std::cmp::Ordering::Less => pauli_dense(Pauli::Z),
                    std::cmp::Ordering::Equal => lower.clone(),
                    std::cmp::Ordering::Greater => pauli_dense(Pauli::I),
                })
                .collect();
            kron_ops(&ops)
        })
        .collect()
}

/// Density-matrix reference for one spin sector with dissipative bath sites.
/// Mode 0 is the impurity, modes `1..=nb` the bath sites.
pub struct DenseLindblad {
    pub c: Vec<CMatrix>,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub substeps: usize,
}

impl DenseLindblad {
    pub fn new(n_modes: usize, gamma_minus: f64, gamma_plus: f64) -> Self {
        Self {
            c: dense_annihilators(n_modes),
            gamma_minus,
            gamma_plus,
            substeps: 40,
        }
    }

    /// Single-particle Hamiltonian `Σ_p v_p c_0† c_p + h.c.`.
    pub fn hamiltonian(&self, v: &[C64]) -> CMatrix {
        let dim = self.c[0].nrows();
        let mut h = CMatrix::zeros(dim, dim);
        for (p, &vp) in v.iter().enumerate() {
            let hop = self.c[0].adjoint() * &self.c[p + 1];
            h += hop.map(|z| z * vp) + hop.adjoint().map(|z| z * vp.conj());
        }
        h
    }

    /// Generator applied to `x`; `odd` flips the sign of the sandwich term
    /// for fermion-odd operators.
    fn generator(&self, h: &CMatrix, x: &CMatrix, odd: bool) -> CMatrix {
        let i = C64::new(0.0, 1.0);
        let mut out = (h * x - x * h).map(|z| -i * z);
        let sign = if odd { -1.0 } else { 1.0 };
        for c in &self.c[1..] {
            for (l, g) in [(c.clone(), self.gamma_minus), (c.adjoint(), self.gamma_plus)] {
                if g == 0.0 {
                    continue;
                }
                let ll = l.adjoint() * &l;
                out += (&l * x * l.adjoint()).scale(g * sign) - (&ll * x + x * &ll).scale(0.5 * g);
            }
        }
        out
    }

    /// RK4 over one interval of length `dt` with fixed Hamiltonian.
    pub fn step(&self, h: &CMatrix, x: &CMatrix, dt: f64, odd: bool) -> CMatrix {
        let s = dt / self.substeps as f64;
        let mut x = x.clone();
        for _ in 0..self.substeps {
            let k1 = self.generator(h, &x, odd);
            let k2 = self.generator(h, &(&x + k1.scale(0.5 * s)), odd);
            let k3 = self.generator(h, &(&x + k2.scale(0.5 * s)), odd);
            let k4 = self.generator(h, &(&x + k3.scale(s)), odd);
            x += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(s / 6.0);
        }
        x
    }

    /// Fock projector for the given occupations.
    pub fn basis_projector(&self, occupied: &[bool]) -> CMatrix {
        let dim = self.c[0].nrows();
        let idx: usize = occupied.iter().enumerate().filter(|(_, &o)| o).map(|(j, _)| 1 << j).sum();
        let mut rho = CMatrix::zeros(dim, dim);
        rho[(idx, idx)] = C64::new(1.0, 0.0);
        rho
    }

    /// `(G^<, G^>)` of mode `probe` on the lower triangle plus the state
    /// trajectory. `v[k]` holds the couplings during step `k`.
    pub fn greens(&self, rho0: &CMatrix, v: &[Vec<C64>], dt: f64, probe: usize) -> (CMatrix, CMatrix, Vec<CMatrix>) {
        let i = C64::new(0.0, 1.0);
        let hs: Vec<CMatrix> = v.iter().map(|vk| self.hamiltonian(vk)).collect();
        let mut rhos = vec![rho0.clone()];
        for h in &hs {
            let next = self.step(h, rhos.last().unwrap(), dt, false);
            rhos.push(next);
        }
        let len = rhos.len();
        let c = &self.c[probe];
        let cd = c.adjoint();
        let mut lesser = CMatrix::zeros(len, len);
        let mut greater = CMatrix::zeros(len, len);
        for m in 0..len {
            let mut xl = &rhos[m] * &cd;
            let mut xg = &cd * &rhos[m];
            for n in m..len {
                lesser[(n, m)] = i * (c * &xl).trace();
                greater[(n, m)] = -i * (c * &xg).trace();
                if n < hs.len() {
                    xl = self.step(&hs[n], &xl, dt, true);
                    xg = self.step(&hs[n], &xg, dt, true);
                }
            }
        }
        (lesser, greater, rhos)
    }
}

/// Dense MS gate straight from its defining exponential.
pub fn ms_dense(first: usize, last: usize, theta: f64, phi: f64, n: usize) -> CMatrix {
    let dim = 1 << n;
    let mut s = DMatrix::zeros(dim, dim);
    for q in first..=last {
        s += single_dense(&pauli_dense(Pauli::X), q, n).scale(phi.cos())
            + single_dense(&pauli_dense(Pauli::Y), q, n).scale(phi.sin());
    }
    let s2 = &s * &s;
    exp_i_herm(&s2, -theta / 4.0)
}

pub fn gate_dense(g: &GateSpec, n: usize) -> CMatrix {
    match g {
        GateSpec::Rotation { axis, qubit, angle } => {
            let p = match axis {
                Axis::X => Pauli::X,
                Axis::Y => Pauli::Y,
                Axis::Z => Pauli::Z,
            };
            exp_i_herm(&single_dense(&pauli_dense(p), *qubit, n), -angle / 2.0)
        }
        GateSpec::Ms { first, last, theta, phi } => ms_dense(*first, *last, *theta, *phi, n),
        GateSpec::Hadamard { qubit } => {
            let h = (pauli_dense(Pauli::X) + pauli_dense(Pauli::Z)).scale(std::f64::consts::FRAC_1_SQRT_2);
            single_dense(&h, *qubit, n)
        }
        GateSpec::ControlledPauli { control, control_value, string } => {
            let dim = 1 << n;
            let p = string_dense(string, n);
            let mut proj = DMatrix::<C64>::zeros(dim, dim);
            for i in 0..dim {
                if ((i >> control) & 1 == 1) == *control_value {
                    proj[(i, i)] = C64::new(1.0, 0.0);
                }
            }
            let id = DMatrix::<C64>::identity(dim, dim);
            &p * &proj + (&id - &proj)
        }
    }
}

pub fn random_gate<R: Rng>(rng: &mut R, n: usize) -> GateSpec {
    let q = rng.random_range(0..n);
    match rng.random_range(0..4) {
        0 => GateSpec::rotation(Axis::X, q, rng.random_range(-3.0..3.0)),
        1 => GateSpec::rotation(Axis::Y, q, rng.random_range(-3.0..3.0)),
        2 => GateSpec::rotation(Axis::Z, q, rng.random_range(-3.0..3.0)),
        _ => GateSpec::ms(0, n - 1, rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)),
    }
}

pub fn random_string<R: Rng>(rng: &mut R, n: usize) -> PauliString {
    let ps = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    loop {
        let ops: Vec<(usize, Pauli)> =
            (0..n).map(|q| (q, ps[rng.random_range(0..4)])).filter(|(_, p)| *p != Pauli::I).collect();
        if !ops.is_empty() {
            return PauliString::new(ops).unwrap();
        }
    }
}

/// `⟨ψ| U(0→late)† σ_late U(early→late) σ_early U(0→early) |ψ⟩` on the system alone.
pub fn trace_formula(psi: &[C64], steps: &[Vec<GateSpec>], early: usize, late: usize, se: &PauliString, sl: &PauliString, n: usize) -> C64 {
    let dim = 1 << n;
    let span = |a: usize, b: usize| -> CMatrix {
        let mut u = CMatrix::identity(dim, dim);
        for step in &steps[a..b] {
            for g in step {
                u = gate_dense(g, n) * u;
            }
        }
        u
    };
    let v = DVector::from_column_slice(psi);
    let left = span(0, late) * &v;
    let right = string_dense(sl, n) * span(early, late) * string_dense(se, n) * span(0, early) * &v;
    left.dotc(&right)
}

pub fn random_lower<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => C64::new(0.0, 0.0),
        std::cmp::Ordering::Equal => C64::new(rng.random_range(0.5..1.5), 0.0),
        std::cmp::Ordering::Greater => C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
    })
}
