//! Exact reference solver for the impurity model.

pub mod ed;
pub mod siam;

pub use ed::{
    build_siam_hamiltonian, double_occupancy_ed, greens_ed, greens_ed_system, propagate_exact,
    EdPropagator, FockState,
};
pub use siam::{
    bath_initially_occupied, bath_mode, impurity_mode, initial_occupations, HybridizationSet,
    InitialImpurity, SiamParams,
};
