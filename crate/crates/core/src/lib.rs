//! Lindblad dynamics of small quantum batteries and diagnostics built on the
//! free energy operator `F = H + beta^{-1} ln rho`.
//!
//! The crate is organized bottom-up:
//!
//! - [`matrix`]: dense complex matrices, Jacobi eigensolver, spectral functions.
//! - [`state`], [`lindblad`], [`propagate`]: density matrices, the GKSL
//!   generator and a fixed-step RK4 propagator.
//! - [`free_energy`]: `F`, `dF`, charging power and the commutator fluctuation `Theta_j`.
//! - [`audit`]: eigenstate scenarios, regularization sweeps and randomized
//!   claim checks producing serializable reports.

pub mod audit;
pub mod error;
pub mod free_energy;
pub mod lindblad;
pub mod matrix;
pub mod propagate;
pub mod random;
pub mod state;
pub mod tolerance;

pub use error::{Error, Result};
pub use free_energy::{
    free_energy_operator, mean_free_energy, power_analytic, power_eigenstate, power_fd,
    theta_eigenstate, theta_index_form, theta_operator_form, vanishing_condition, BatteryContext,
    FreeEnergyDecomposition,
};
pub use lindblad::{dissipator, liouvillian, JumpChannel, LindbladModel};
pub use matrix::{abs_sq, commutator, hermitian_eig, matrix_function, ComplexMatrix, HermitianMatrix, Spectrum, C64};
pub use propagate::{propagate, uniform_grid, Trajectory};
pub use state::{regularize, von_neumann_entropy, DensityMatrix};
pub use tolerance::ToleranceConfig;
