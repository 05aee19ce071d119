//! Quartic expansion of the lower adiabatic surface ε₋(φ₀) and the RWA
//! coefficients it implies.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::HBAR;
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::rwa::bare_zero_point_phases;
use crate::solver::{solve_spectrum, Grid, PotentialSpec};
use crate::two_level::TwoLevelModel;
use crate::units::RadPerSec;

/// Even polynomial terms used by the least-squares fit (φ₀⁰ … φ₀¹²).
const FIT_TERMS: usize = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct Surface {
    pub phi0: Vec<f64>,
    /// ε₋ in units of E₀.
    pub eps: Vec<f64>,
}

/// `n` evenly spaced points on [−half, half]; `n` is forced odd so φ₀ = 0 is sampled.
pub fn symmetric_samples(half: f64, n: usize) -> Vec<f64> {
    let n = n | 1;
    let m = (n / 2) as f64;
    (0..n).map(|i| half * (i as f64 - m) / m).collect()
}

fn check_window(phi0: &[f64], limit: f64) -> Result<()> {
    match phi0.iter().find(|p| p.abs() > limit) {
        Some(&p) => Err(Error::WindowViolation { phi0: p, limit }),
        None => Ok(()),
    }
}

/// −√(η²φ₀² + Δ²) on the given points.
pub fn analytic_surface(tl: &TwoLevelModel, phi0: &[f64]) -> Result<Surface> {
    check_window(phi0, tl.fit_window.1)?;
    let eps = phi0.iter().map(|p| -(tl.eta * tl.eta * p * p + tl.delta * tl.delta).sqrt()).collect();
    Ok(Surface { phi0: phi0.to_vec(), eps })
}

/// Ground level of the full eigenproblem at each φ₀, on a fixed grid.
pub fn exact_surface(spec: &PotentialSpec, grid: &Grid, phi0: &[f64], window: f64) -> Result<Surface> {
    check_window(phi0, window)?;
    let eps = phi0
        .par_iter()
        .map(|&p| solve_spectrum(&spec.with_phi0(p), grid, 2).map(|s| s.eps(0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Surface { phi0: phi0.to_vec(), eps })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuarticFit {
    pub c0: f64,
    pub c2: f64,
    pub c4: f64,
    pub fit_domain: (f64, f64),
    /// RMS residual of the fit, units of E₀.
    pub residual: f64,
}

/// Least squares on an even polynomial in φ₀/h, h the half width of the domain,
/// truncated at φ₀¹²; c0, c2, c4 are the leading Taylor coefficients.
pub fn fit_quartic(s: &Surface) -> Result<QuarticFit> {
    let n = s.phi0.len();
    if n < FIT_TERMS || s.eps.len() != n {
        return Err(Error::IllConditionedFit(format!("need at least {FIT_TERMS} samples, got {n}")));
    }
    let half = s.phi0.iter().fold(0.0f64, |a, p| a.max(p.abs()));
    let lo = s.phi0.iter().cloned().fold(f64::INFINITY, f64::min);
    let asymmetric = s.phi0.iter().zip(s.phi0.iter().rev()).any(|(a, b)| (a + b).abs() > 1e-12 * half);
    if half == 0.0 || asymmetric {
        return Err(Error::IllConditionedFit("fit grid must be symmetric about 0".into()));
    }
    let scale = s.eps.iter().fold(0.0f64, |a, e| a.max(e.abs()));
    let lo_e = s.eps.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi_e = s.eps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi_e - lo_e < 1e3 * f64::EPSILON * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::IllConditionedFit(format!(
            "surface varies by {:.3e} over the domain, below the noise floor",
            hi_e - lo_e
        )));
    }
    let terms = FIT_TERMS.min(n / 2 + 1);
    let a = DMatrix::from_fn(n, terms, |i, j| (s.phi0[i] / half).powi(2 * j as i32));
    let b = DVector::from_column_slice(&s.eps);
    let svd = a.clone().svd(true, true);
    let coef = svd
        .solve(&b, 1e-13)
        .map_err(|e| Error::IllConditionedFit(e.to_string()))?;
    let r = &a * &coef - &b;
    Ok(QuarticFit {
        c0: coef[0],
        c2: coef[1] / (half * half),
        c4: coef[2] / half.powi(4),
        fit_domain: (lo, half),
        residual: (r.norm_squared() / n as f64).sqrt(),
    })
}

/// Number-conserving coefficients from φ₀ = λ̄_m(b+b†) + λ̄_e(a+a†), rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RwaExpansion {
    pub c2: f64,
    pub c4: f64,
    pub lambda_bar_m: f64,
    pub lambda_bar_e: f64,
    #[serde(rename = "Omega_20_rad_s")]
    pub omega_20: RadPerSec,
    #[serde(rename = "Omega_02_rad_s")]
    pub omega_02: RadPerSec,
    #[serde(rename = "Omega_40_rad_s")]
    pub omega_40: RadPerSec,
    #[serde(rename = "Omega_04_rad_s")]
    pub omega_04: RadPerSec,
    #[serde(rename = "Omega_22_rad_s")]
    pub omega_22: RadPerSec,
}

/// (b+b†)² → 2N+1, (b+b†)⁴ → 6N²+6N+3 and the cross term
/// 6λ̄_m²λ̄_e²(2N_m+1)(2N_e+1); constants dropped.
pub fn rwa_coefficients_from_quartic(fit: &QuarticFit, p: &DeviceParams, e0: f64) -> RwaExpansion {
    let (lm, le) = bare_zero_point_phases(p);
    let (lm2, le2) = (lm * lm, le * le);
    let to_rate = |x: f64| RadPerSec(x * e0 / HBAR);
    RwaExpansion {
        c2: fit.c2,
        c4: fit.c4,
        lambda_bar_m: lm,
        lambda_bar_e: le,
        omega_20: to_rate(2.0 * fit.c2 * lm2 + fit.c4 * (6.0 * lm2 * lm2 + 12.0 * lm2 * le2)),
        omega_02: to_rate(2.0 * fit.c2 * le2 + fit.c4 * (6.0 * le2 * le2 + 12.0 * lm2 * le2)),
        omega_40: to_rate(6.0 * fit.c4 * lm2 * lm2),
        omega_04: to_rate(6.0 * fit.c4 * le2 * le2),
        omega_22: to_rate(24.0 * fit.c4 * lm2 * le2),
    }
}
