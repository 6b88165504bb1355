//! Statevector emulation of the probe + system register.

pub mod gates;
pub mod jw;
pub mod noise;
pub mod pauli;
pub mod statevector;

pub use gates::{Axis, GateSpec};
pub use jw::{jw_encode, jw_operator_matrices, mode_count};
pub use noise::{noisify, stream_rng, NoiseModel};
pub use pauli::{Pauli, PauliString};
pub use statevector::{apply_controlled_pauli, apply_gate, program_unitary, Statevector};
