//! First-order Trotter compilation of the Jordan–Wigner transformed impurity
//! model into rotations and Mølmer–Sørensen gates.
//!
//! Programs are expressed on system-register qubits (mode `j` on qubit `j`);
//! shift them with [`TrotterStepProgram::shifted`] to make room for a probe.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fermi::{bath_mode, impurity_mode, SiamParams};
use crate::qubit::{Axis, GateSpec, Pauli, PauliString};
use crate::two_time::Spin;

/// Gate sequence realizing `exp(i φ P)` for a Pauli string `P` that covers a
/// contiguous qubit range and contains at least one σ^z.
///
/// The first σ^z becomes the head of an MS–local–MS sandwich; every other
/// qubit is rotated onto the tail axis (σ^x, or σ^y when the last factor is
/// σ^y) before the sandwich and rotated back afterwards.
pub fn compile_pauli_exponent(string: &PauliString, phi: f64) -> Result<Vec<GateSpec>> {
    let (lo, hi) = (string.min_qubit(), string.max_qubit());
    let k = hi - lo + 1;
    if string.ops().len() != k {
        return Err(Error::UnsupportedString(format!("{string} is not contiguous")));
    }
    let head = string
        .ops()
        .iter()
        .find(|(_, p)| *p == Pauli::Z)
        .map(|(q, _)| *q)
        .ok_or_else(|| Error::UnsupportedString(format!("{string} has no σ^z head")))?;

    let tail = if string.on(hi) == Pauli::Y && hi != head {
        Pauli::Y
    } else {
        Pauli::X
    };
    let mut basis_change = Vec::new();
    for &(q, p) in string.ops() {
        if q == head || p == tail {
            continue;
        }
        // rotation C with C σ C† = tail
        let gate = match (tail, p) {
            (Pauli::X, Pauli::Z) => GateSpec::rotation(Axis::Y, q, FRAC_PI_2),
            (Pauli::X, Pauli::Y) => GateSpec::rotation(Axis::Z, q, -FRAC_PI_2),
            (Pauli::Y, Pauli::Z) => GateSpec::rotation(Axis::X, q, -FRAC_PI_2),
            (Pauli::Y, Pauli::X) => GateSpec::rotation(Axis::Z, q, FRAC_PI_2),
            _ => unreachable!("identity factors are never stored"),
        };
        basis_change.push(gate);
    }

    let ms_phase = if tail == Pauli::Y { FRAC_PI_2 } else { 0.0 };
    let local = local_gate(tail, k, head, phi);

    let mut gates = basis_change.clone();
    if k > 1 {
        gates.push(GateSpec::ms(lo, hi, FRAC_PI_2, ms_phase));
    }
    gates.push(local);
    if k > 1 {
        gates.push(GateSpec::ms(lo, hi, -FRAC_PI_2, ms_phase));
    }
    gates.extend(basis_change.iter().rev().map(GateSpec::inverse));
    Ok(gates)
}

/// Single-qubit gate sandwiched between the MS pair, selected by `k mod 4`.
fn local_gate(tail: Pauli, k: usize, head: usize, phi: f64) -> GateSpec {
    // exp(∓iφσ) == rotation by ±2φ
    match (k % 4, tail) {
        (3, _) => GateSpec::rotation(Axis::Z, head, 2.0 * phi),
        (1, _) => GateSpec::rotation(Axis::Z, head, -2.0 * phi),
        (2, Pauli::Y) => GateSpec::rotation(Axis::X, head, -2.0 * phi),
        (0, Pauli::Y) => GateSpec::rotation(Axis::X, head, 2.0 * phi),
        (2, _) => GateSpec::rotation(Axis::Y, head, 2.0 * phi),
        _ => GateSpec::rotation(Axis::Y, head, -2.0 * phi),
    }
}

/// Gates for `exp(-i dt (U/4) σ^z ⊗ σ^z)` on the two impurity qubits; empty for U = 0.
pub fn compile_interaction(u: f64, dt: f64) -> Vec<GateSpec> {
    if u == 0.0 {
        return Vec::new();
    }
    let zz = PauliString::new([
        (impurity_mode(Spin::Down), Pauli::Z),
        (impurity_mode(Spin::Up), Pauli::Z),
    ])
    .expect("two distinct qubits");
    compile_pauli_exponent(&zz, -dt * u / 4.0).expect("zz string is contiguous with a z head")
}

/// Which piece of the Hamiltonian a block of gates realizes.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Interaction,
    Hybridization { p: usize, spin: Spin, string: PauliString },
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Interaction => f.write_str("interaction"),
            Term::Hybridization { p, spin, string } => write!(f, "hyb p={p} {spin} {string}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateBlock {
    pub term: Term,
    /// Coefficient `c` of the Hamiltonian term `c · P`.
    pub coefficient: f64,
    pub gates: Vec<GateSpec>,
}

/// The four Pauli strings of one impurity–bath hopping term with their
/// coefficients: ½Re V (XZ…ZX + YZ…ZY) + ½Im V (YZ…ZX − XZ…ZY).
pub fn hybridization_strings(p: usize, spin: Spin, v: C64) -> Vec<(PauliString, f64)> {
    let (a, b) = (impurity_mode(spin), bath_mode(p, spin));
    let make = |pa: Pauli, pb: Pauli| {
        PauliString::new(
            std::iter::once((a, pa))
                .chain((a + 1..b).map(|q| (q, Pauli::Z)))
                .chain(std::iter::once((b, pb))),
        )
        .expect("distinct qubits")
    };
    vec![
        (make(Pauli::X, Pauli::X), 0.5 * v.re),
        (make(Pauli::Y, Pauli::Y), 0.5 * v.re),
        (make(Pauli::Y, Pauli::X), 0.5 * v.im),
        (make(Pauli::X, Pauli::Y), -0.5 * v.im),
    ]
}

/// Gate blocks for `exp(-i dt (V c†_σ c_pσ + h.c.))`, one block per string
/// with a nonzero coefficient.
pub fn compile_hybridization(p: usize, spin: Spin, v: C64, dt: f64) -> Result<Vec<GateBlock>> {
    if p == 0 {
        return Err(Error::Domain("bath sites are numbered from 1".into()));
    }
    hybridization_strings(p, spin, v)
        .into_iter()
        .filter(|(_, c)| *c != 0.0)
        .map(|(string, c)| {
            let gates = compile_pauli_exponent(&string, -dt * c)?;
            Ok(GateBlock {
                term: Term::Hybridization { p, spin, string },
                coefficient: c,
                gates,
            })
        })
        .collect()
}

/// Gates for one Trotter step `t_n → t_{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrotterStepProgram {
    pub t_index: usize,
    pub blocks: Vec<GateBlock>,
}

impl TrotterStepProgram {
    pub fn gates(&self) -> impl Iterator<Item = &GateSpec> + Clone {
        self.blocks.iter().flat_map(|b| b.gates.iter())
    }

    pub fn gate_count(&self) -> usize {
        self.blocks.iter().map(|b| b.gates.len()).sum()
    }

    pub fn ms_count(&self) -> usize {
        self.gates().filter(|g| g.is_ms()).count()
    }

    pub fn is_identity(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn shifted(&self, offset: usize) -> Self {
        Self {
            t_index: self.t_index,
            blocks: self
                .blocks
                .iter()
                .map(|b| GateBlock {
                    term: b.term.clone(),
                    coefficient: b.coefficient,
                    gates: b.gates.iter().map(|g| g.shifted(offset)).collect(),
                })
                .collect(),
        }
    }
}

impl fmt::Display for TrotterStepProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# trotter step {}", self.t_index)?;
        for b in &self.blocks {
            writeln!(f, "# {} coeff={:.12e}", b.term, b.coefficient)?;
            for g in &b.gates {
                writeln!(f, "{g}")?;
            }
        }
        Ok(())
    }
}

/// Compile the step from `t_n` to `t_{n+1}`: interaction first, then bath
/// sites in ascending order with ↓ strings before ↑ strings.
pub fn compile_trotter_step(params: &SiamParams, n: usize, dt: f64) -> Result<TrotterStepProgram> {
    let hyb = &params.hybridization;
    if n >= hyb.len() {
        return Err(Error::Dimension {
            expected: n + 1,
            got: hyb.len(),
        });
    }
    let mut blocks = Vec::new();
    let interaction = compile_interaction(params.u, dt);
    if !interaction.is_empty() {
        blocks.push(GateBlock {
            term: Term::Interaction,
            coefficient: params.u / 4.0,
            gates: interaction,
        });
    }
    for p in 1..=params.n_bath() {
        for spin in Spin::ALL {
            blocks.extend(compile_hybridization(p, spin, hyb.get(spin, p, n), dt)?);
        }
    }
    Ok(TrotterStepProgram { t_index: n, blocks })
}

/// Programs for steps `0..n_steps`.
pub fn compile_evolution(params: &SiamParams, dt: f64, n_steps: usize) -> Result<Vec<TrotterStepProgram>> {
    (0..n_steps).map(|n| compile_trotter_step(params, n, dt)).collect()
}
