//! Two-level reduction of the SQUID: in the basis of the left/right well
//! states the local Hamiltonian is `[[η φ₀, Δ], [Δ, −η φ₀]]`, so the lowest two
//! levels are `±sqrt(η² φ₀² + Δ²)`.
//!
//! Δ is read off the gap at the symmetry point; η is then fitted to the gap
//! `ε₁ − ε₀` over a window of φ₀ in which the third level stays well separated.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::device::DimensionlessCircuit;
use crate::error::{Error, Result};
use crate::solver::{adaptive_solve, solve_spectrum, Grid, GridPolicy, PotentialSpec, Spectrum};
use crate::units::{Hertz, Joules};

/// Relative RMS residual above which the fitted model is flagged invalid.
pub const MAX_FIT_RESIDUAL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaEstimate {
    /// Δ/E₀.
    pub delta: f64,
    /// Absolute uncertainty in units of E₀ (the spectrum's convergence estimate).
    pub uncertainty: f64,
    pub unresolved: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaFitOptions {
    /// Number of Chebyshev–Lobatto samples in the window (>= 9).
    pub samples: usize,
    /// Required (ε₂ − ε₁)/(ε₁ − ε₀) at every sample.
    pub margin_ratio: f64,
}

impl Default for EtaFitOptions {
    fn default() -> Self {
        EtaFitOptions {
            samples: 13,
            margin_ratio: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoLevelModel {
    /// η in units of E₀ per unit φ₀.
    pub eta: f64,
    /// Δ in units of E₀.
    pub delta: f64,
    pub delta_uncertainty: f64,
    /// E₀ (J), for unit conversion.
    pub e0: f64,
    /// φ₀ range of the fit.
    pub fit_window: (f64, f64),
    /// Relative RMS residual of the gap fit.
    pub fit_residual: f64,
    /// Smallest (ε₂ − ε₁)/(ε₁ − ε₀) over the fit samples.
    pub third_level_margin: f64,
    pub valid: bool,
    /// The splitting is below the solver's resolution.
    pub unresolved: bool,
}

impl TwoLevelModel {
    pub fn eta_joules(&self) -> Joules {
        Joules(self.eta * self.e0)
    }

    pub fn delta_joules(&self) -> Joules {
        Joules(self.delta * self.e0)
    }

    pub fn delta_over_h(&self) -> Hertz {
        self.delta_joules().to_hertz()
    }

    /// η/Δ, dimensionless.
    pub fn eta_over_delta(&self) -> f64 {
        self.eta / self.delta
    }
}

impl Serialize for TwoLevelModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("TwoLevelModel", 8)?;
        s.serialize_field("eta_over_E0", &self.eta)?;
        s.serialize_field("delta_over_E0", &self.delta)?;
        s.serialize_field("delta_over_h_Hz", &self.delta_over_h().0)?;
        s.serialize_field("delta_uncertainty_over_E0", &self.delta_uncertainty)?;
        s.serialize_field("fit_residual", &self.fit_residual)?;
        s.serialize_field("third_level_margin", &self.third_level_margin)?;
        s.serialize_field("window", &[self.fit_window.0, self.fit_window.1])?;
        s.serialize_field("valid", &self.valid)?;
        s.end()
    }
}

/// Δ = (ε₁ − ε₀)/2 from a spectrum solved at φ₀ = 0.
pub fn extract_delta(s: &Spectrum) -> Result<DeltaEstimate> {
    if s.spec.phi0 != 0.0 {
        return Err(Error::NotSymmetric(s.spec.phi0));
    }
    Ok(DeltaEstimate {
        delta: 0.5 * s.gap(),
        uncertainty: s.convergence_estimate,
        unresolved: s.unresolved,
    })
}

struct GapSample {
    phi0: f64,
    gap: f64,
    margin: f64,
}

fn gap_sample(spec: &PotentialSpec, grid: &Grid, phi0: f64) -> Result<GapSample> {
    let s = solve_spectrum(&spec.with_phi0(phi0), grid, 3)?;
    let gap = s.gap();
    Ok(GapSample {
        phi0,
        gap,
        margin: (s.eps(2) - s.eps(1)) / gap,
    })
}

/// Largest φ₀ up to which the third-level margin holds, by doubling then bisection.
fn window_edge(spec: &PotentialSpec, grid: &Grid, ratio: f64) -> Result<f64> {
    let at_zero = gap_sample(spec, grid, 0.0)?;
    if !(at_zero.margin > ratio) {
        return Err(Error::WindowCollapse {
            margin: at_zero.margin,
            phi0: 0.0,
        });
    }
    let mut lo = 0.0;
    let mut hi = 0.01;
    let limit = std::f64::consts::PI;
    loop {
        if gap_sample(spec, grid, hi)?.margin > ratio {
            lo = hi;
            if hi >= limit {
                return Ok(limit);
            }
            hi = (2.0 * hi).min(limit);
        } else {
            break;
        }
    }
    for _ in 0..60 {
        if hi - lo <= 1e-6 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if gap_sample(spec, grid, mid)?.margin > ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo <= 0.0 {
        let s = gap_sample(spec, grid, hi)?;
        return Err(Error::WindowCollapse {
            margin: s.margin,
            phi0: hi,
        });
    }
    Ok(lo)
}

fn lobatto_nodes(max: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let t = std::f64::consts::PI * j as f64 / (n - 1) as f64;
            0.5 * max * (1.0 - t.cos())
        })
        .collect()
}

fn relative_residuals(eta: f64, delta: f64, samples: &[GapSample]) -> Vec<f64> {
    samples
        .iter()
        .map(|s| (2.0 * (eta * eta * s.phi0 * s.phi0 + delta * delta).sqrt() - s.gap) / s.gap)
        .collect()
}

/// Gauss–Newton on the relative gap residuals with Δ held fixed.
fn fit_eta(delta: f64, samples: &[GapSample]) -> f64 {
    let last = samples.last().expect("non-empty window");
    let mut eta = last.gap / (2.0 * last.phi0);
    for _ in 0..100 {
        let mut num = 0.0;
        let mut den = 0.0;
        for s in samples {
            let root = (eta * eta * s.phi0 * s.phi0 + delta * delta).sqrt();
            let r = (2.0 * root - s.gap) / s.gap;
            let j = 2.0 * eta * s.phi0 * s.phi0 / (root * s.gap);
            num += r * j;
            den += j * j;
        }
        if den == 0.0 {
            break;
        }
        let step = num / den;
        eta -= step;
        if step.abs() <= 1e-15 * eta.abs() {
            break;
        }
    }
    eta.abs()
}

/// Fits η with Δ fixed; samples are solved on `grid` (centred on the symmetry point).
pub fn extract_eta(
    spec: &PotentialSpec,
    grid: &Grid,
    delta: &DeltaEstimate,
    e0: f64,
    options: &EtaFitOptions,
) -> Result<TwoLevelModel> {
    if options.samples < 9 {
        return Err(Error::InvalidArgument(format!("need >= 9 fit samples, got {}", options.samples)));
    }
    let spec = spec.with_phi0(0.0);
    let mut edge = window_edge(&spec, grid, options.margin_ratio)?;
    let samples = loop {
        let samples = lobatto_nodes(edge, options.samples)
            .into_iter()
            .map(|phi0| gap_sample(&spec, grid, phi0))
            .collect::<Result<Vec<_>>>()?;
        if samples.iter().all(|s| s.margin > options.margin_ratio) {
            break samples;
        }
        edge *= 0.95;
        if edge < 1e-9 {
            return Err(Error::WindowCollapse {
                margin: samples.iter().map(|s| s.margin).fold(f64::MAX, f64::min),
                phi0: edge,
            });
        }
    };
    let eta = fit_eta(delta.delta, &samples[1..]);
    let residuals = relative_residuals(eta, delta.delta, &samples);
    let fit_residual = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    Ok(TwoLevelModel {
        eta,
        delta: delta.delta,
        delta_uncertainty: delta.uncertainty,
        e0,
        fit_window: (0.0, edge),
        fit_residual,
        third_level_margin: samples.iter().map(|s| s.margin).fold(f64::MAX, f64::min),
        valid: fit_residual < MAX_FIT_RESIDUAL && eta > 0.0 && delta.delta > 0.0,
        unresolved: delta.unresolved,
    })
}

/// Slope estimate η ≈ ½ |d(ε₁ − ε₀)/dφ₀| by central differences.
pub fn eta_from_slope(spec: &PotentialSpec, grid: &Grid, phi0: f64, step: f64) -> Result<f64> {
    let plus = gap_sample(spec, grid, phi0 + step)?.gap;
    let minus = gap_sample(spec, grid, phi0 - step)?.gap;
    Ok(0.25 * ((plus - minus) / step).abs())
}

/// (ε₋, ε₊) = ∓ sqrt(η² φ₀² + Δ²), units of E₀.
pub fn two_level_energies(model: &TwoLevelModel, phi0: f64) -> (f64, f64) {
    let e = (model.eta * model.eta * phi0 * phi0 + model.delta * model.delta).sqrt();
    (-e, e)
}

/// Symmetric-point spectrum together with the fitted model.
#[derive(Debug, Clone)]
pub struct TwoLevelFit {
    pub symmetric: Spectrum,
    pub model: TwoLevelModel,
}

/// Adaptive solve at φ₀ = 0, Δ extraction and η fit in one go.
pub fn fit_two_level(circuit: &DimensionlessCircuit, policy: &GridPolicy, options: &EtaFitOptions) -> Result<TwoLevelFit> {
    let spec = circuit.potential_spec(0.0);
    let symmetric = adaptive_solve(&spec, 4, policy)?;
    let delta = extract_delta(&symmetric)?;
    let model = extract_eta(&spec, &symmetric.grid, &delta, circuit.e0, options)?;
    Ok(TwoLevelFit { symmetric, model })
}
