use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;

use super::gates::{Axis, GateSpec};
use super::pauli::{Pauli, PauliString};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, I, ONE, ZERO};

/// Dense amplitude vector; bit `q` of an amplitude index is the value of qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl Statevector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[index] = ONE;
        Self { n_qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::Dimension {
                expected: len.next_power_of_two(),
                got: len,
            });
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Statevector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn check(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            Err(Error::QubitIndex {
                index: qubit,
                qubits: self.n_qubits,
            })
        } else {
            Ok(())
        }
    }

    /// Apply a 2×2 matrix `[[m00, m01], [m10, m11]]` to one qubit.
    pub fn apply_single(&mut self, qubit: usize, m: [C64; 4]) -> Result<()> {
        self.check(qubit)?;
        let mask = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let (a0, a1) = (self.amps[i], self.amps[j]);
                self.amps[i] = m[0] * a0 + m[1] * a1;
                self.amps[j] = m[2] * a0 + m[3] * a1;
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, gate: &GateSpec) -> Result<()> {
        match gate {
            GateSpec::Rotation { axis, qubit, angle } => {
                self.apply_single(*qubit, rotation_matrix(*axis, *angle))
            }
            GateSpec::Hadamard { qubit } => {
                let h = C64::new(FRAC_1_SQRT_2, 0.0);
                self.apply_single(*qubit, [h, h, h, -h])
            }
            GateSpec::Ms {
                first,
                last,
                theta,
                phi,
            } => self.apply_ms(*first, *last, *theta, *phi),
            GateSpec::ControlledPauli {
                control,
                control_value,
                string,
            } => self.apply_controlled_pauli(*control, *control_value, string),
        }
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a GateSpec>) -> Result<()> {
        for g in gates {
            self.apply(g)?;
        }
        Ok(())
    }

    /// MS gate, applied in the product eigenbasis of `cos φ σ^x + sin φ σ^y`
    /// where the collective operator is diagonal.
    fn apply_ms(&mut self, first: usize, last: usize, theta: f64, phi: f64) -> Result<()> {
        let (lo, hi) = (first.min(last), first.max(last));
        self.check(hi)?;
        let k = hi - lo + 1;
        let e = C64::from_polar(1.0, phi);
        let s = C64::new(FRAC_1_SQRT_2, 0.0);
        // columns of b are the ±1 eigenvectors (1, ±e^{iφ})/√2
        let b = [s, s, s * e, -s * e];
        let b_adj = [s, s * e.conj(), s, -s * e.conj()];
        for q in lo..=hi {
            self.apply_single(q, b_adj)?;
        }
        let phases: Vec<C64> = (0..=k)
            .map(|w| {
                let eig = k as f64 - 2.0 * w as f64;
                C64::from_polar(1.0, -theta / 4.0 * eig * eig)
            })
            .collect();
        let range_mask = ((1usize << k) - 1) << lo;
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= phases[(i & range_mask).count_ones() as usize];
        }
        for q in lo..=hi {
            self.apply_single(q, b)?;
        }
        Ok(())
    }

    pub fn apply_controlled_pauli(
        &mut self,
        control: usize,
        control_value: bool,
        string: &PauliString,
    ) -> Result<()> {
        self.check(control)?;
        self.check(string.max_qubit())?;
        if string.contains(control) {
            return Err(Error::ControlOverlap(control));
        }
        let cmask = 1usize << control;
        let want = if control_value { cmask } else { 0 };
        let flip = string.flip_mask();
        let phase = |i: usize| -> C64 {
            let mut ph = ONE;
            for &(q, p) in string.ops() {
                let bit = (i >> q) & 1 == 1;
                match p {
                    Pauli::Y => ph *= if bit { -I } else { I },
                    Pauli::Z if bit => ph = -ph,
                    _ => {}
                }
            }
            ph
        };
        if flip == 0 {
            for i in 0..self.amps.len() {
                if i & cmask == want {
                    self.amps[i] *= phase(i);
                }
            }
            return Ok(());
        }
        let low = flip & flip.wrapping_neg();
        for i in 0..self.amps.len() {
            if i & cmask == want && i & low == 0 {
                let j = i ^ flip;
                let (ai, aj) = (self.amps[i], self.amps[j]);
                self.amps[j] = phase(i) * ai;
                self.amps[i] = phase(j) * aj;
            }
        }
        Ok(())
    }

    /// ⟨σ^z⟩ of one qubit.
    pub fn expect_z(&self, qubit: usize) -> f64 {
        let mask = 1usize << qubit;
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum()
    }

    /// ⟨σ^y⟩ of one qubit.
    pub fn expect_y(&self, qubit: usize) -> f64 {
        let mask = 1usize << qubit;
        let mut acc = ZERO;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                // ⟨ψ|Y|ψ⟩ = 2 Im(conj(a0) a1) with Y = [[0,-i],[i,0]]
                acc += self.amps[i].conj() * self.amps[i | mask];
            }
        }
        2.0 * acc.im
    }

    /// Probability that every qubit in `mask` reads 1.
    pub fn prob_all_set(&self, mask: usize) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == mask)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// `exp(-i angle/2 σ_axis)` as a row-major 2×2 array.
pub fn rotation_matrix(axis: Axis, angle: f64) -> [C64; 4] {
    let c = C64::new((angle / 2.0).cos(), 0.0);
    let s = (angle / 2.0).sin();
    match axis {
        Axis::X => [c, C64::new(0.0, -s), C64::new(0.0, -s), c],
        Axis::Y => [c, C64::new(-s, 0.0), C64::new(s, 0.0), c],
        Axis::Z => [
            C64::from_polar(1.0, -angle / 2.0),
            ZERO,
            ZERO,
            C64::from_polar(1.0, angle / 2.0),
        ],
    }
}

/// Free-function form of [`Statevector::apply`].
pub fn apply_gate(mut state: Statevector, gate: &GateSpec) -> Result<Statevector> {
    state.apply(gate)?;
    Ok(state)
}

pub fn apply_controlled_pauli(
    mut state: Statevector,
    control: usize,
    control_value: bool,
    string: &PauliString,
) -> Result<Statevector> {
    state.apply_controlled_pauli(control, control_value, string)?;
    Ok(state)
}

/// Unitary of a gate sequence on `n_qubits`, assembled column by column.
pub fn program_unitary<'a>(
    gates: impl IntoIterator<Item = &'a GateSpec> + Clone,
    n_qubits: usize,
) -> Result<CMatrix> {
    let dim = 1usize << n_qubits;
    let mut u = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mut sv = Statevector::basis(n_qubits, j);
        sv.apply_all(gates.clone())?;
        for (i, a) in sv.amps.iter().enumerate() {
            u[(i, j)] = *a;
        }
    }
    Ok(u)
}
