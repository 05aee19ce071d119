//! Device parameters and the dimensionless circuit quantities derived from them.

use serde::Serialize;
use std::f64::consts::PI;

use crate::constants::{E_CHARGE, PHI0};
use crate::error::{Error, Result};
use crate::solver::PotentialSpec;

/// Physical parameters of the SQUID + mechanical + LC device, all SI.
///
/// `omega_e = 1/sqrt(L C)` is derived on demand and never stored.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviceParams {
    /// Effective mass of the flexural mode (kg).
    #[serde(rename = "m")]
    pub mass: f64,
    /// Mechanical angular frequency (rad/s).
    pub omega_m: f64,
    /// Mechanical damping rate (rad/s).
    pub gamma_m: f64,
    /// LC resonator inductance (H).
    #[serde(rename = "L")]
    pub inductance: f64,
    /// LC resonator capacitance (F).
    #[serde(rename = "C")]
    pub capacitance: f64,
    /// LC damping rate, full width of the photon-number resonance (rad/s).
    pub gamma_e: f64,
    /// SQUID loop self-inductance (H).
    #[serde(rename = "Lambda")]
    pub loop_inductance: f64,
    /// Junction capacitance (F).
    #[serde(rename = "C_J")]
    pub junction_capacitance: f64,
    /// Junction critical current (A).
    #[serde(rename = "I_c")]
    pub critical_current: f64,
    /// Mutual inductance between loop and LC inductor (H).
    #[serde(rename = "M")]
    pub mutual_inductance: f64,
    /// Magnetic field normal to the loop at the beam (T).
    #[serde(rename = "B")]
    pub field: f64,
    /// Effective beam length (m).
    #[serde(rename = "l")]
    pub beam_length: f64,
    /// External flux for zero displacement (Wb).
    #[serde(rename = "Phi_e")]
    pub external_flux: f64,
    /// Bath temperature (K).
    #[serde(rename = "T")]
    pub temperature: f64,
    /// Drive current envelope amplitude (A).
    #[serde(rename = "I_in_amp")]
    pub drive_current: f64,
    /// Drive angular frequency (rad/s).
    #[serde(rename = "omega_d")]
    pub drive_frequency: f64,
}

impl DeviceParams {
    /// Parameter set of the carbon-nanotube / microbridge worked example.
    pub fn paper_example() -> Self {
        let capacitance = 3.2e-11;
        let omega_e = 2.0 * PI * 0.22e9;
        let inductance = 1.0 / (omega_e * omega_e * capacitance);
        let loop_inductance = 1.1e-10;
        let omega_m = 2.0 * PI * 0.5e9;
        DeviceParams {
            mass: 1e-19,
            omega_m,
            gamma_m: omega_m / 1e3,
            inductance,
            capacitance,
            gamma_e: omega_e / 1e4,
            loop_inductance,
            junction_capacitance: 1e-16,
            critical_current: 12e-6,
            mutual_inductance: 0.001 * (loop_inductance * inductance).sqrt(),
            field: 0.05,
            beam_length: 1e-6,
            external_flux: PHI0 / 2.0,
            temperature: 0.02,
            drive_current: 0.0,
            drive_frequency: omega_e,
        }
    }

    /// LC resonance 1/sqrt(LC) (rad/s).
    pub fn omega_e(&self) -> f64 {
        1.0 / (self.inductance * self.capacitance).sqrt()
    }

    /// Coupling coefficient K = M/sqrt(Λ L).
    pub fn coupling_k(&self) -> f64 {
        self.mutual_inductance / (self.loop_inductance * self.inductance).sqrt()
    }

    /// B·l (T·m).
    pub fn bl(&self) -> f64 {
        self.field * self.beam_length
    }

    /// Junction plasma frequency sqrt(2π I_c / Φ₀ C_J) / 2π (Hz).
    pub fn plasma_frequency(&self) -> f64 {
        (2.0 * PI * self.critical_current / (PHI0 * self.junction_capacitance)).sqrt() / (2.0 * PI)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("m", self.mass),
            ("omega_m", self.omega_m),
            ("gamma_m", self.gamma_m),
            ("L", self.inductance),
            ("C", self.capacitance),
            ("Lambda", self.loop_inductance),
            ("C_J", self.junction_capacitance),
            ("I_c", self.critical_current),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        let non_negative = [
            ("gamma_e", self.gamma_e),
            ("T", self.temperature),
            ("I_in_amp", self.drive_current),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be >= 0, got {v}")));
            }
        }
        for (name, v) in [
            ("M", self.mutual_inductance),
            ("B", self.field),
            ("l", self.beam_length),
            ("Phi_e", self.external_flux),
            ("omega_d", self.drive_frequency),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        let k = self.coupling_k();
        if !(0.0..1.0).contains(&k) {
            return Err(Error::Overcoupled(k));
        }
        Ok(())
    }
}

/// Dimensionless SQUID quantities entering the adiabatic Schrödinger problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimensionlessCircuit {
    pub beta_l: f64,
    pub beta_c: f64,
    #[serde(rename = "K")]
    pub k: f64,
    /// Energy unit Φ₀²/(8π²Λ) (J).
    #[serde(rename = "E0_J")]
    pub e0: f64,
    /// (2π/Φ₀)(Φ_e − Φ₀/2): the static phase offset at x = 0, varphi = 0.
    pub phi_e_offset: f64,
    /// beta_L (1 − K²) > 1.
    pub double_well: bool,
}

impl DimensionlessCircuit {
    pub fn potential_spec(&self, phi0: f64) -> PotentialSpec {
        PotentialSpec {
            beta_l: self.beta_l,
            beta_c: self.beta_c,
            k: self.k,
            phi0,
        }
    }
}

pub fn derive_dimensionless(p: &DeviceParams) -> Result<DimensionlessCircuit> {
    p.validate()?;
    let k = p.coupling_k();
    let beta_l = 2.0 * PI * p.loop_inductance * p.critical_current / PHI0;
    let e0 = PHI0 * PHI0 / (8.0 * PI * PI * p.loop_inductance);
    let beta_c = 2.0 * E_CHARGE * E_CHARGE / (p.junction_capacitance * e0);
    Ok(DimensionlessCircuit {
        beta_l,
        beta_c,
        k,
        e0,
        phi_e_offset: 2.0 * PI / PHI0 * (p.external_flux - PHI0 / 2.0),
        double_well: beta_l * (1.0 - k * k) > 1.0,
    })
}

/// Phase offset φ₀ for beam displacement `x` (m) and LC flux `varphi` (Wb).
pub fn phi0_of(p: &DeviceParams, x: f64, varphi: f64) -> f64 {
    2.0 * PI / PHI0
        * (p.external_flux - PHI0 / 2.0 + p.bl() * x + p.mutual_inductance * varphi / p.inductance)
}
