//! RWA coupling constants and detectability metrics.
//!
//! With the SQUID in its lower adiabatic level, the mechanical and LC modes see
//!
//! ```text
//! H_RWA = ħω_m N_m + ħω_e N_e − drive + ħΩ₀,₄ N_e² + ħΩ₂,₂ N_m N_e
//! Ω₀,₄ = (3Δ/4ħ) λ_e⁴,   Ω₂,₂ = (3Δ/ħ) λ_m² λ_e²
//! ```
//!
//! where λ_m and λ_e are the zero-point phase excursions of each mode scaled by η/Δ.

use serde::Serialize;
use std::f64::consts::PI;

use crate::constants::{H, HBAR, K_B, PHI0};
use crate::device::{derive_dimensionless, DeviceParams, DimensionlessCircuit};
use crate::dynamics::quartic::{exact_surface, fit_quartic, rwa_coefficients_from_quartic, symmetric_samples, RwaExpansion};
use crate::error::{Error, ErrorClass, Result};
use crate::solver::{adaptive_solve, solve_spectrum, Grid, GridPolicy, Spectrum};
use crate::two_level::{extract_delta, extract_eta, EtaFitOptions, TwoLevelModel};
use crate::units::{Joules, RadPerSec, Seconds};

/// "≫" in the high-temperature premises is taken as a factor of 5.
pub const HIGH_T_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveCouplings {
    /// (η/Δ)(2πBl/Φ₀) sqrt(ħ/2mω_m).
    pub lambda_m: f64,
    /// (η/Δ)(2πM/Φ₀L) sqrt(ħ/2Cω_e).
    pub lambda_e: f64,
    #[serde(rename = "Omega_04_rad_s")]
    pub omega_04: RadPerSec,
    #[serde(rename = "Omega_22_rad_s")]
    pub omega_22: RadPerSec,
}

/// Bare zero-point phase excursions (2πBl/Φ₀)sqrt(ħ/2mω_m) and
/// (2πM/Φ₀L)sqrt(ħ/2Cω_e), before the η/Δ enhancement.
pub fn bare_zero_point_phases(p: &DeviceParams) -> (f64, f64) {
    let m = 2.0 * PI * p.bl() / PHI0 * (HBAR / (2.0 * p.mass * p.omega_m)).sqrt();
    let e = 2.0 * PI * p.mutual_inductance / (PHI0 * p.inductance) * (HBAR / (2.0 * p.capacitance * p.omega_e())).sqrt();
    (m, e)
}

pub fn compute_couplings(p: &DeviceParams, tl: &TwoLevelModel) -> EffectiveCouplings {
    let (bare_m, bare_e) = bare_zero_point_phases(p);
    let ratio = tl.eta_over_delta();
    let lambda_m = ratio * bare_m;
    let lambda_e = ratio * bare_e;
    let delta = tl.delta_joules().0;
    EffectiveCouplings {
        lambda_m,
        lambda_e,
        omega_04: RadPerSec(3.0 * delta / (4.0 * HBAR) * lambda_e.powi(4)),
        omega_22: RadPerSec(3.0 * delta / HBAR * lambda_m * lambda_m * lambda_e * lambda_e),
    }
}

/// ⟨N_e⟩_c = γ_e / (√3 Ω₀,₄), the onset of Kerr bistability.
pub fn critical_photon_number(c: &EffectiveCouplings, gamma_e: f64) -> Result<f64> {
    if c.omega_04.0 == 0.0 {
        return Err(Error::DivergentCritical);
    }
    Ok(gamma_e / (3f64.sqrt() * c.omega_04.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasurementTime {
    pub tau_m: Seconds,
    /// Stored LC energy U₀ = N_e ħω_e.
    pub stored_energy: Joules,
}

/// τ_m = (2πγ_e/Ω₂,₂²)(k_BT/U₀) with U₀ = N_e ħω_e. Infinite when Ω₂,₂ = 0.
pub fn measurement_time(c: &EffectiveCouplings, p: &DeviceParams, n_e: f64, warnings: &mut Vec<String>) -> Result<MeasurementTime> {
    if !(n_e > 0.0) {
        return Err(Error::InvalidPhotonNumber(n_e));
    }
    let omega_e = p.omega_e();
    let u0 = n_e * HBAR * omega_e;
    let kt = K_B * p.temperature;
    if kt < HIGH_T_FACTOR * HBAR * omega_e {
        warnings.push(format!(
            "tau_m assumes k_B T >> hbar omega_e, but k_B T / hbar omega_e = {:.3}",
            kt / (HBAR * omega_e)
        ));
    }
    let w22 = c.omega_22.0;
    let tau = if w22 == 0.0 {
        f64::INFINITY
    } else {
        2.0 * PI * p.gamma_e / (w22 * w22) * kt / u0
    };
    Ok(MeasurementTime {
        tau_m: Seconds(tau),
        stored_energy: Joules(u0),
    })
}

/// Fock-state lifetime t₀ = 1/(γ_m (k_BT/ħω_m)²). Infinite for γ_m = 0 or T = 0.
pub fn fock_lifetime(p: &DeviceParams, warnings: &mut Vec<String>) -> Seconds {
    let ratio = K_B * p.temperature / (HBAR * p.omega_m);
    if ratio < HIGH_T_FACTOR {
        warnings.push(format!("t0 assumes k_B T >> hbar omega_m, but k_B T / hbar omega_m = {ratio:.3}"));
    }
    let rate = p.gamma_m * ratio * ratio;
    if rate == 0.0 {
        warnings.push("Fock lifetime is unbounded (gamma_m = 0 or T = 0)".into());
        return Seconds(f64::INFINITY);
    }
    Seconds(1.0 / rate)
}

/// ζ_max = (12Δ/√3 ħγ_m) λ_m⁴ (ħω_m/k_BT)² (ħω_e/k_BT).
pub fn zeta_max(p: &DeviceParams, tl: &TwoLevelModel) -> f64 {
    let (bare_m, _) = bare_zero_point_phases(p);
    let lambda_m = tl.eta_over_delta() * bare_m;
    let kt = K_B * p.temperature;
    let delta = tl.delta_joules().0;
    12.0 * delta / (3f64.sqrt() * HBAR * p.gamma_m)
        * lambda_m.powi(4)
        * (HBAR * p.omega_m / kt).powi(2)
        * (HBAR * p.omega_e() / kt)
}

/// The same figure in engineering units, with its 2.8×10⁻¹⁵ prefactor:
/// Δ/h in GHz, B in T, l in µm, m in 1e-19 kg, T in K.
pub fn zeta_max_engineering(p: &DeviceParams, tl: &TwoLevelModel) -> f64 {
    let ghz = 1e9;
    let delta_ghz = tl.delta_joules().0 / H / ghz;
    let group = tl.eta_over_delta() * p.field * (p.beam_length / 1e-6);
    2.8e-15 * delta_ghz * (p.omega_m / p.gamma_m) * group.powi(4) * (p.omega_e() / (2.0 * PI * ghz))
        / ((p.omega_m / (2.0 * PI * ghz)) * (p.mass / 1e-19).powi(2) * p.temperature.powi(3))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Adiabaticity {
    /// Γ_c = (2πM/Φ₀L) sqrt(2⟨N_e⟩_c ħω_e / C).
    #[serde(rename = "Gamma_c_per_s")]
    pub gamma_c: f64,
    /// πΔ²/(ηħΓ_c); Zener transitions are unlikely when this is ≳ 1.
    pub ratio: f64,
}

pub fn adiabaticity(p: &DeviceParams, tl: &TwoLevelModel, c: &EffectiveCouplings) -> Result<Adiabaticity> {
    let n_crit = critical_photon_number(c, p.gamma_e)?;
    let gamma_c = 2.0 * PI * p.mutual_inductance / (PHI0 * p.inductance)
        * (2.0 * n_crit * HBAR * p.omega_e() / p.capacitance).sqrt();
    let delta = tl.delta_joules().0;
    let ratio = if gamma_c == 0.0 {
        f64::INFINITY
    } else {
        PI * delta * delta / (tl.eta_joules().0 * HBAR * gamma_c)
    };
    Ok(Adiabaticity { gamma_c, ratio })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectabilityMetrics {
    #[serde(rename = "N_e_crit")]
    pub n_e_crit: f64,
    pub tau_m: Seconds,
    pub t0: Seconds,
    /// t₀/τ_m evaluated at ⟨N_e⟩_c.
    pub zeta: f64,
    pub zeta_max: f64,
    pub zeta_max_engineering: f64,
    #[serde(rename = "Gamma_c_per_s")]
    pub gamma_c: f64,
    pub adiabaticity_ratio: f64,
    #[serde(rename = "U0")]
    pub u0: Joules,
}

pub fn detectability(p: &DeviceParams, tl: &TwoLevelModel, c: &EffectiveCouplings, warnings: &mut Vec<String>) -> Result<DetectabilityMetrics> {
    let n_e_crit = critical_photon_number(c, p.gamma_e)?;
    let t0 = fock_lifetime(p, warnings);
    let tm = measurement_time(c, p, n_e_crit, warnings)?;
    let adia = adiabaticity(p, tl, c)?;
    Ok(DetectabilityMetrics {
        n_e_crit,
        tau_m: tm.tau_m,
        t0,
        zeta: t0.0 / tm.tau_m.0,
        zeta_max: zeta_max(p, tl),
        zeta_max_engineering: zeta_max_engineering(p, tl),
        gamma_c: adia.gamma_c,
        adiabaticity_ratio: adia.ratio,
        u0: tm.stored_energy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Flags {
    pub double_well: bool,
    pub two_level_valid: bool,
    /// Δ > k_BT.
    pub delta_gt_kt: bool,
    /// k_BT ≥ 5ħω_e.
    pub high_t_e: bool,
    /// k_BT ≥ 5ħω_m.
    pub high_t_m: bool,
    /// ζ_max ≥ 1.
    pub single_phonon: bool,
    /// πΔ²/(ηħΓ_c) ≥ 1.
    pub adiabatic: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageError {
    pub stage: &'static str,
    pub message: String,
    #[serde(skip)]
    pub class: ErrorClass,
}

impl StageError {
    pub fn to_error(&self) -> Error {
        Error::Stage {
            stage: self.stage,
            message: self.message.clone(),
            class: self.class,
        }
    }

    fn new(stage: &'static str, e: &Error) -> Self {
        StageError {
            stage,
            message: e.to_string(),
            class: e.class(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedQuantities {
    pub omega_e_rad_s: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub plasma_frequency_hz: f64,
    /// k_BT/ħω_e.
    pub thermal_ratio_e: f64,
    /// k_BT/ħω_m.
    pub thermal_ratio_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverSummary {
    pub n_points: usize,
    pub half_width: f64,
    pub convergence_estimate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    pub params: DeviceParams,
    pub derived: DerivedQuantities,
    pub circuit: Option<DimensionlessCircuit>,
    pub solver: Option<SolverSummary>,
    pub two_level: Option<TwoLevelModel>,
    pub couplings: Option<EffectiveCouplings>,
    pub rwa_expansion: Option<RwaExpansion>,
    pub metrics: Option<DetectabilityMetrics>,
    pub t0: Seconds,
    pub flags: Flags,
    pub warnings: Vec<String>,
    pub errors: Vec<StageError>,
}

impl FeasibilityReport {
    pub fn is_complete(&self) -> bool {
        self.errors.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub policy: GridPolicy,
    pub eta: EtaFitOptions,
    /// Fixed (half width, n_points) instead of the adaptive search.
    pub grid_override: Option<(f64, usize)>,
    /// Quartic expansion of the exact ε₋ surface (Ω₂,₀, Ω₀,₂, Ω₄,₀ magnitudes).
    pub expansion: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            policy: GridPolicy::default(),
            eta: EtaFitOptions::default(),
            grid_override: None,
            expansion: true,
        }
    }
}

/// Symmetric-point spectrum honouring the grid override.
pub fn symmetric_spectrum(circuit: &DimensionlessCircuit, cfg: &SolverConfig) -> Result<Spectrum> {
    let spec = circuit.potential_spec(0.0);
    match cfg.grid_override {
        Some((half_width, n)) => {
            let s = solve_spectrum(&spec, &Grid::centered(0.0, half_width, n)?, 4)?;
            let tol = cfg.policy.tolerance * s.eps(0).abs().max(1.0);
            s.ensure_converged(tol)
        }
        None => adaptive_solve(&spec, 4, &cfg.policy),
    }
}

/// Full pipeline; errors are collected per stage and independent stages still run.
pub fn feasibility_report(p: &DeviceParams, cfg: &SolverConfig) -> FeasibilityReport {
    let mut warnings = Vec::new();
    let mut errors = Vec::new();
    let omega_e = p.omega_e();
    let kt = K_B * p.temperature;
    let derived = DerivedQuantities {
        omega_e_rad_s: omega_e,
        k: p.coupling_k(),
        plasma_frequency_hz: p.plasma_frequency(),
        thermal_ratio_e: kt / (HBAR * omega_e),
        thermal_ratio_m: kt / (HBAR * p.omega_m),
    };
    let t0 = fock_lifetime(p, &mut warnings);

    let circuit = match derive_dimensionless(p) {
        Ok(c) => Some(c),
        Err(e) => {
            errors.push(StageError::new("device-model", &e));
            None
        }
    };

    let mut solver = None;
    let mut two_level = None;
    if let Some(c) = circuit.as_ref() {
        if c.phi_e_offset.abs() > 1e-12 {
            warnings.push(format!(
                "external flux is off the symmetric bias (phase offset {:.3e}); couplings assume Phi_e = Phi0/2",
                c.phi_e_offset
            ));
        }
        if !c.double_well {
            warnings.push(format!(
                "beta_L (1 - K^2) = {:.4} <= 1: single-well potential, two-level stage skipped",
                c.beta_l * (1.0 - c.k * c.k)
            ));
        } else {
            match symmetric_spectrum(c, cfg).and_then(|s| {
                let d = extract_delta(&s)?;
                let model = extract_eta(&s.spec, &s.grid, &d, c.e0, &cfg.eta)?;
                Ok((s, model))
            }) {
                Ok((s, model)) => {
                    solver = Some(SolverSummary {
                        n_points: s.grid.n_points,
                        half_width: s.grid.half_width(),
                        convergence_estimate: s.convergence_estimate,
                    });
                    if model.unresolved {
                        warnings.push("tunnel splitting below solver resolution; Delta is an upper bound".into());
                    }
                    if !model.valid {
                        warnings.push(format!("two-level fit residual {:.3e} exceeds bound", model.fit_residual));
                    }
                    two_level = Some((s, model));
                }
                Err(e) => errors.push(StageError::new("two-level", &e)),
            }
        }
    }

    let mut couplings = None;
    let mut metrics = None;
    let mut rwa_expansion = None;
    if let (Some(c), Some((s, model))) = (circuit.as_ref(), two_level.as_ref()) {
        let cpl = compute_couplings(p, model);
        couplings = Some(cpl);
        match detectability(p, model, &cpl, &mut Vec::new()) {
            Ok(m) => metrics = Some(m),
            Err(e) => errors.push(StageError::new("rwa-effective", &e)),
        }
        if kt < HIGH_T_FACTOR * HBAR * omega_e {
            warnings.push(format!(
                "tau_m assumes k_B T >> hbar omega_e, but k_B T / hbar omega_e = {:.3}",
                kt / (HBAR * omega_e)
            ));
        }
        if cfg.expansion {
            let half = 0.8 * model.delta / model.eta;
            match exact_surface(&s.spec, &s.grid, &symmetric_samples(half, 41), model.fit_window.1)
                .and_then(|surf| fit_quartic(&surf))
                .map(|fit| rwa_coefficients_from_quartic(&fit, p, c.e0))
            {
                Ok(x) => rwa_expansion = Some(x),
                Err(e) => errors.push(StageError::new("dynamics-oracle", &e)),
            }
        }
    }

    let model = two_level.as_ref().map(|(_, m)| m.clone());
    let flags = Flags {
        double_well: circuit.map(|c| c.double_well).unwrap_or(false),
        two_level_valid: model.as_ref().map(|m| m.valid).unwrap_or(false),
        delta_gt_kt: model.as_ref().map(|m| m.delta_joules().0 > kt).unwrap_or(false),
        high_t_e: kt >= HIGH_T_FACTOR * HBAR * omega_e,
        high_t_m: kt >= HIGH_T_FACTOR * HBAR * p.omega_m,
        single_phonon: metrics.map(|m| m.zeta_max >= 1.0).unwrap_or(false),
        adiabatic: metrics.map(|m| m.adiabaticity_ratio >= 1.0).unwrap_or(false),
    };

    FeasibilityReport {
        params: p.clone(),
        derived,
        circuit,
        solver,
        two_level: model,
        couplings,
        rwa_expansion,
        metrics,
        t0,
        flags,
        warnings,
        errors,
    }
}
