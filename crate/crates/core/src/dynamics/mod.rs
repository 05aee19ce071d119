//! Independent checks on the RWA reduction and the dispersive readout.

pub mod classical;
pub mod hamiltonian;
pub mod lindblad;
pub mod quartic;
pub mod readout;

pub use classical::{classical_trajectory, ClassicalState, Trajectory};
pub use hamiltonian::{build_rwa_hamiltonian, RwaHamiltonian};
pub use lindblad::{lindblad_steady_state, ResponseCurve, SteadyStateResponse};
pub use quartic::{fit_quartic, rwa_coefficients_from_quartic, QuarticFit, RwaExpansion, Surface};
pub use readout::{estimate_tau_m_numeric, TauEstimate};
