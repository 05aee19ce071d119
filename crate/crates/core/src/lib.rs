//! Simulator for an RF SQUID that couples a nanomechanical resonator to an LC
//! resonator, aimed at quantum nondemolition readout of mechanical Fock states.
//!
//! The pipeline runs from SI device parameters to a [`FeasibilityReport`]:
//!
//! 1. [`device`]: dimensionless circuit quantities (β_L, β_C, K, E₀).
//! 2. [`solver`]: the adiabatic double-well eigenproblem on a finite-difference grid.
//! 3. [`two_level`]: extraction of the two-level parameters η and Δ.
//! 4. [`rwa`]: RWA coupling constants Ω₀,₄ / Ω₂,₂ and detectability metrics.
//! 5. [`dynamics`]: independent checks by quartic expansion of the exact
//!    adiabatic surface, the truncated Fock-space Hamiltonian, Lindblad steady
//!    states and the classical equations of motion.
//!
//! [`config`], [`output`], [`sweep`] and [`validate`] back the command-line tool.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod constants;
pub mod device;
pub mod dynamics;
pub mod error;
pub mod output;
pub mod rwa;
pub mod solver;
pub mod sweep;
pub mod two_level;
pub mod units;
pub mod validate;

pub use device::{derive_dimensionless, phi0_of, DeviceParams, DimensionlessCircuit};
pub use error::{Error, ErrorClass, Result};
pub use rwa::{feasibility_report, FeasibilityReport, SolverConfig};
pub use solver::{solve_spectrum, Grid, PotentialSpec, Spectrum};
pub use two_level::TwoLevelModel;

/// Tool version embedded in every emitted file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
