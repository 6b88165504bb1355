//! Classical emulation of a hybrid quantum-classical solver for
//! non-equilibrium dynamical mean-field theory on the Bethe lattice.
//!
//! The impurity problem (a single-impurity Anderson model) is compiled to a
//! Trotterized circuit of rotations and Mølmer–Sørensen gates, its two-time
//! Green functions are read out with a simulated probe-qubit Ramsey protocol,
//! and the Bethe self-consistency `Λ(t,t') = v(t) G(t,t') v(t')` is closed
//! classically through a Cholesky / time-slicing extraction of the bath
//! couplings. A Lindblad model of dissipative bath sites supports a
//! noise-aware fit of the couplings.

pub mod compiler;
pub mod dmft;
pub mod error;
pub mod experiment;
pub mod fermi;
pub mod grid;
pub mod interferometry;
pub mod io;
pub mod lindblad;
pub mod linalg;
pub mod qubit;
pub mod two_time;

pub use error::{Error, Result};
pub use grid::{quench_v, QuenchProfile, TimeGrid};
pub use linalg::{CMatrix, CVector};
pub use num_complex::Complex64 as C64;
pub use two_time::{Component, Spin, SpinGreens, TwoTimeFunction};
