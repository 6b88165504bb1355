use std::fmt;

use super::pauli::{Pauli, PauliString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn pauli(self) -> Pauli {
        match self {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }

    fn symbol(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }
}

/// One gate of a circuit program.
#[derive(Debug, Clone, PartialEq)]
pub enum GateSpec {
    /// `exp(-i * angle / 2 * σ_axis)` on one qubit.
    Rotation { axis: Axis, qubit: usize, angle: f64 },
    /// Mølmer–Sørensen gate `exp(-i θ/4 (cos φ S_x + sin φ S_y)^2)` on qubits `first..=last`.
    Ms {
        first: usize,
        last: usize,
        theta: f64,
        phi: f64,
    },
    Hadamard { qubit: usize },
    /// Pauli string applied where `control` reads `control_value`.
    ControlledPauli {
        control: usize,
        control_value: bool,
        string: PauliString,
    },
}

impl GateSpec {
    pub fn rotation(axis: Axis, qubit: usize, angle: f64) -> Self {
        GateSpec::Rotation { axis, qubit, angle }
    }

    pub fn ms(first: usize, last: usize, theta: f64, phi: f64) -> Self {
        GateSpec::Ms {
            first,
            last,
            theta,
            phi,
        }
    }

    pub fn is_ms(&self) -> bool {
        matches!(self, GateSpec::Ms { .. })
    }

    /// Highest qubit index touched.
    pub fn max_qubit(&self) -> usize {
        match self {
            GateSpec::Rotation { qubit, .. } | GateSpec::Hadamard { qubit } => *qubit,
            GateSpec::Ms { first, last, .. } => *first.max(last),
            GateSpec::ControlledPauli { control, string, .. } => (*control).max(string.max_qubit()),
        }
    }

    /// Copy with every qubit index shifted by `offset`.
    pub fn shifted(&self, offset: usize) -> Self {
        match self {
            GateSpec::Rotation { axis, qubit, angle } => GateSpec::Rotation {
                axis: *axis,
                qubit: qubit + offset,
                angle: *angle,
            },
            GateSpec::Ms {
                first,
                last,
                theta,
                phi,
            } => GateSpec::Ms {
                first: first + offset,
                last: last + offset,
                theta: *theta,
                phi: *phi,
            },
            GateSpec::Hadamard { qubit } => GateSpec::Hadamard {
                qubit: qubit + offset,
            },
            GateSpec::ControlledPauli {
                control,
                control_value,
                string,
            } => GateSpec::ControlledPauli {
                control: control + offset,
                control_value: *control_value,
                string: string.shifted(offset),
            },
        }
    }

    /// Inverse gate (for rotations and MS gates the angle is negated).
    pub fn inverse(&self) -> Self {
        match self {
            GateSpec::Rotation { axis, qubit, angle } => GateSpec::Rotation {
                axis: *axis,
                qubit: *qubit,
                angle: -angle,
            },
            GateSpec::Ms {
                first,
                last,
                theta,
                phi,
            } => GateSpec::Ms {
                first: *first,
                last: *last,
                theta: -theta,
                phi: *phi,
            },
            other => other.clone(),
        }
    }
}

/// One gate per line: kind, qubits, angles.
impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateSpec::Rotation { axis, qubit, angle } => {
                write!(f, "r{} q{} angle={:.12e}", axis.symbol(), qubit, angle)
            }
            GateSpec::Ms {
                first,
                last,
                theta,
                phi,
            } => write!(f, "ms q{}..q{} theta={:.12e} phi={:.12e}", first, last, theta, phi),
            GateSpec::Hadamard { qubit } => write!(f, "h q{qubit}"),
            GateSpec::ControlledPauli {
                control,
                control_value,
                string,
            } => write!(f, "cpauli c{}={} {}", control, u8::from(*control_value), string),
        }
    }
}
