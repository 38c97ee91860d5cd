//! Open-system simulation of two coherently driven qubits coupled to a
//! single-mode cavity.
//!
//! The crate assembles the Lindblad master equation on the truncated
//! `qubit ⊗ qubit ⊗ cavity` space, solves for its steady state, and evaluates
//! the figures of merit of the cavity field: mean photon number, radiance
//! witness, quadrature squeezing, the Klyshko photon-statistics criterion and
//! the Wigner function. The [`dressed`] module exposes the analytic structure
//! of the undriven out-phase Hamiltonian, and [`sweep`] runs deterministic
//! parameter maps.

pub mod dressed;
pub mod error;
pub mod model;
pub mod observables;
pub mod operator;
mod parallel;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
pub use faer::c64;
pub use model::{CouplingPhase, LindbladModel, ModelParams};
pub use operator::{DensityMatrix, Operator, SpaceDescriptor};
pub use parallel::is_parallel;
