//! Numerical measurement-time estimate from a pair of steady-state responses.
//!
//! The signal is the largest steady-state amplitude difference |α₁ − α₀|² over
//! the detuning grid; the noise floor is thermal, n_th = k_BT/ħω_e. The
//! integration time for unit SNR is taken as 8π n_th/(γ_e |Δα|²), which in the
//! small-shift linear regime equals 2πγ_e k_BT/(Ω₂,₂² U₀) with U₀ the on-resonance
//! stored energy.

use serde::Serialize;

use super::lindblad::ResponseCurve;
use crate::constants::{HBAR, K_B};
use crate::units::Seconds;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauEstimate {
    pub tau_m: Seconds,
    /// Detuning of the largest amplitude difference, rad/s.
    pub optimal_detuning: f64,
    /// |α₁ − α₀|² at that detuning.
    pub signal: f64,
    /// Set when the peak shift exceeds γ_e/2 and the analytic comparison does not apply.
    pub regime_warning: Option<String>,
}

/// Drive ε giving `photons` intracavity photons on resonance in the linear cavity.
pub fn drive_for_photon_number(photons: f64, gamma_e: f64) -> f64 {
    photons.sqrt() * gamma_e / 2.0
}

pub fn estimate_tau_m_numeric(r0: &ResponseCurve, r1: &ResponseCurve, gamma_e: f64, temperature: f64, omega_e: f64) -> TauEstimate {
    let n_th = K_B * temperature / (HBAR * omega_e);
    let (k, signal) = r0
        .amplitude
        .iter()
        .zip(&r1.amplitude)
        .map(|(a, b)| (b - a).norm_sqr())
        .enumerate()
        .fold((0, 0.0), |best, (i, s)| if s > best.1 { (i, s) } else { best });
    let tau = if signal > 0.0 {
        8.0 * std::f64::consts::PI * n_th / (gamma_e * signal)
    } else {
        f64::INFINITY
    };
    let shift = (r1.peak - r0.peak).abs();
    let regime_warning = (shift > gamma_e / 2.0).then(|| {
        format!(
            "peak shift {:.3e} rad/s exceeds gamma_e/2 = {:.3e} rad/s: resolved-shift regime, analytic tau_m not comparable",
            shift,
            gamma_e / 2.0
        )
    });
    TauEstimate {
        tau_m: Seconds(tau),
        optimal_detuning: r0.detuning.get(k).copied().unwrap_or(0.0),
        signal,
        regime_warning,
    }
}
