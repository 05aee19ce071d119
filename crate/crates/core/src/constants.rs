//! Physical constants (SI, CODATA 2018 exact values).

use std::f64::consts::PI;

/// Planck constant (J·s).
pub const H: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J·s).
pub const HBAR: f64 = H / (2.0 * PI);
/// Elementary charge (C).
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Superconducting flux quantum h/2e (Wb).
pub const PHI0: f64 = H / (2.0 * E_CHARGE);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_quantum_value() {
        assert!((PHI0 - 2.067_833_848e-15).abs() / PHI0 < 1e-9);
    }
}
