//! Adiabatic eigenproblem of the SQUID phase,
//!
//! ```text
//! −β_C ∂²ϑ/∂φ² + u(φ) ϑ = (ε/E₀) ϑ,   u(φ) = (φ − φ₀)²/(1 − K²) + 2β_L cos φ
//! ```
//!
//! discretised with second-order central differences and Dirichlet walls.
//! Eigenvalues are Richardson-extrapolated from the grid and its every-other-node
//! subgrid; the same extrapolation one level coarser gives the convergence
//! estimate. Wavefunctions come from the finest grid.

mod tridiag;

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::output::fmt_sig;
use tridiag::LaplacianPlusDiagonal;

/// Largest |ψ| allowed on the outermost interior nodes.
pub const BOUNDARY_LEAK_LIMIT: f64 = 1e-10;

/// Splittings below this (in units of E₀) are flagged as unresolved.
pub const UNRESOLVED_SPLITTING: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialSpec {
    pub beta_l: f64,
    pub beta_c: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub phi0: f64,
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta_c > 0.0 && self.beta_c.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta_C must be > 0, got {}", self.beta_c)));
        }
        if !(0.0..1.0).contains(&self.k) {
            return Err(Error::Overcoupled(self.k));
        }
        if !self.beta_l.is_finite() || !self.phi0.is_finite() {
            return Err(Error::InvalidArgument("beta_L and phi0 must be finite".into()));
        }
        Ok(())
    }

    pub fn with_phi0(&self, phi0: f64) -> Self {
        PotentialSpec { phi0, ..*self }
    }

    pub fn potential(&self, phi: f64) -> f64 {
        let d = phi - self.phi0;
        d * d / (1.0 - self.k * self.k) + 2.0 * self.beta_l * phi.cos()
    }

    /// ∂u/∂φ₀ at `phi`.
    pub fn potential_phi0_derivative(&self, phi: f64) -> f64 {
        -2.0 * (phi - self.phi0) / (1.0 - self.k * self.k)
    }
}

/// Uniform grid including both Dirichlet end nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub phi_min: f64,
    pub phi_max: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(phi_min: f64, phi_max: f64, n_points: usize) -> Result<Self> {
        if !(phi_min < phi_max) || !phi_min.is_finite() || !phi_max.is_finite() {
            return Err(Error::InvalidGrid(format!("need phi_min < phi_max, got [{phi_min}, {phi_max}]")));
        }
        if n_points < 3 || n_points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("n_points must be odd and >= 3, got {n_points}")));
        }
        Ok(Grid { phi_min, phi_max, n_points })
    }

    pub fn centered(center: f64, half_width: f64, n_points: usize) -> Result<Self> {
        Grid::new(center - half_width, center + half_width, n_points)
    }

    pub fn spacing(&self) -> f64 {
        (self.phi_max - self.phi_min) / (self.n_points - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        // symmetric evaluation keeps grids centred on 0 exactly mirror-symmetric
        let n = (self.n_points - 1) as f64;
        let t = i as f64;
        (self.phi_min * (n - t) + self.phi_max * t) / n
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.node(i)).collect()
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.phi_max - self.phi_min)
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.phi_min + self.phi_max)
    }

    /// Same width and resolution, re-centred.
    pub fn recentered(&self, center: f64) -> Self {
        let w = self.half_width();
        Grid {
            phi_min: center - w,
            phi_max: center + w,
            n_points: self.n_points,
        }
    }

    /// Grid with `2n − 1` points on the same domain.
    pub fn refined(&self) -> Self {
        Grid {
            n_points: 2 * self.n_points - 1,
            ..*self
        }
    }

    fn supports_richardson(&self) -> bool {
        self.n_points >= 9 && (self.n_points - 1).is_multiple_of(4)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    /// ε/E₀ (Richardson extrapolated).
    pub eps: f64,
    /// L²-normalised on the grid, Dirichlet zeros included.
    pub wavefunction: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub levels: Vec<Level>,
    pub spec: PotentialSpec,
    pub grid: Grid,
    /// |ε₀ᴿ(n, n/2) − ε₀ᴿ(n/2, n/4)|, units of E₀.
    pub convergence_estimate: f64,
    /// Un-extrapolated eigenvalues of the finest finite-difference matrix.
    pub raw_eps: Vec<f64>,
    /// ε₁ − ε₀ below [`UNRESOLVED_SPLITTING`].
    pub unresolved: bool,
}

impl Spectrum {
    pub fn eps(&self, level: usize) -> f64 {
        self.levels[level].eps
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.eps).collect()
    }

    /// ε₁ − ε₀.
    pub fn gap(&self) -> f64 {
        self.eps(1) - self.eps(0)
    }

    /// Trapezoid-rule ⟨ψ_i|ψ_j⟩.
    pub fn overlap(&self, i: usize, j: usize) -> f64 {
        let h = self.grid.spacing();
        trapezoid(h, self.levels[i].wavefunction.iter().zip(&self.levels[j].wavefunction).map(|(a, b)| a * b))
    }

    /// Trapezoid-rule ⟨ψ_i| f(φ) |ψ_i⟩.
    pub fn expectation(&self, level: usize, f: impl Fn(f64) -> f64) -> f64 {
        let h = self.grid.spacing();
        let psi = &self.levels[level].wavefunction;
        trapezoid(h, (0..self.grid.n_points).map(|i| psi[i] * psi[i] * f(self.grid.node(i))))
    }

    pub fn ensure_converged(self, tolerance: f64) -> Result<Self> {
        if self.convergence_estimate <= tolerance {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                estimate: self.convergence_estimate,
                tolerance,
            })
        }
    }

    /// CSV with columns `phi,u,psi_0,…`, preceded by `header` verbatim.
    pub fn wavefunction_csv(&self, header: &str) -> String {
        let mut out = String::from(header);
        out.push_str(&format!(
            "# beta_L={} beta_C={} K={} phi0={} n_points={} convergence_estimate={}\n",
            fmt_sig(self.spec.beta_l),
            fmt_sig(self.spec.beta_c),
            fmt_sig(self.spec.k),
            fmt_sig(self.spec.phi0),
            self.grid.n_points,
            fmt_sig(self.convergence_estimate)
        ));
        out.push_str("phi,u");
        for i in 0..self.levels.len() {
            out.push_str(&format!(",psi_{i}"));
        }
        out.push('\n');
        let u = build_potential(&self.spec, &self.grid);
        for (i, (phi, ui)) in self.grid.nodes().into_iter().zip(u).enumerate() {
            out.push_str(&fmt_sig(phi));
            out.push(',');
            out.push_str(&fmt_sig(ui));
            for l in &self.levels {
                out.push(',');
                out.push_str(&fmt_sig(l.wavefunction[i]));
            }
            out.push('\n');
        }
        out
    }
}

fn trapezoid(h: f64, values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[n - 1]))
}

/// u(φ) sampled at every grid node.
pub fn build_potential(spec: &PotentialSpec, grid: &Grid) -> Vec<f64> {
    grid.nodes().into_iter().map(|phi| spec.potential(phi)).collect()
}

fn interior_eigenvalues(u: &[f64], stride: usize, beta_c: f64, h: f64, n_levels: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = u.iter().step_by(stride).cloned().collect();
    let interior = &v[1..v.len() - 1];
    if interior.len() < n_levels {
        return Err(Error::InvalidGrid(format!(
            "{} interior nodes cannot hold {n_levels} levels",
            interior.len()
        )));
    }
    let hs = h * stride as f64;
    Ok(LaplacianPlusDiagonal::new(beta_c / (hs * hs), interior).lowest_eigenvalues(n_levels))
}

/// Lowest `n_levels` eigenpairs on `grid`.
///
/// Fails with [`Error::BoundaryLeak`] when any returned state is not negligible
/// on the outermost interior nodes. `grid.n_points` must satisfy
/// `(n − 1) % 4 == 0` so that the two nested subgrids exist.
pub fn solve_spectrum(spec: &PotentialSpec, grid: &Grid, n_levels: usize) -> Result<Spectrum> {
    spec.validate()?;
    if n_levels < 2 {
        return Err(Error::InvalidArgument(format!("n_levels must be >= 2, got {n_levels}")));
    }
    if !grid.supports_richardson() {
        return Err(Error::InvalidGrid(format!(
            "n_points = {} must be >= 9 with (n - 1) divisible by 4",
            grid.n_points
        )));
    }
    let h = grid.spacing();
    let u = build_potential(spec, grid);
    let fine = interior_eigenvalues(&u, 1, spec.beta_c, h, n_levels)?;
    let half = interior_eigenvalues(&u, 2, spec.beta_c, h, n_levels)?;
    let quarter = interior_eigenvalues(&u, 4, spec.beta_c, h, n_levels)?;

    let extrapolate = |f: f64, c: f64| (4.0 * f - c) / 3.0;
    let eps: Vec<f64> = fine.iter().zip(&half).map(|(&f, &c)| extrapolate(f, c)).collect();
    let coarse0 = extrapolate(half[0], quarter[0]);
    let convergence_estimate = (eps[0] - coarse0).abs();

    let interior = &u[1..u.len() - 1];
    let t = LaplacianPlusDiagonal::new(spec.beta_c / (h * h), interior);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(n_levels);
    for &lam in &fine {
        let x = t.eigenvector(lam, &vectors);
        vectors.push(x);
    }

    let norm = 1.0 / h.sqrt();
    let mut levels = Vec::with_capacity(n_levels);
    for (e, x) in eps.iter().zip(&vectors) {
        let mut psi = Vec::with_capacity(grid.n_points);
        psi.push(0.0);
        psi.extend(x.iter().map(|v| v * norm));
        psi.push(0.0);
        fix_sign(&mut psi);
        let leak = psi[1].abs().max(psi[grid.n_points - 2].abs());
        if !(leak < BOUNDARY_LEAK_LIMIT) {
            return Err(Error::BoundaryLeak {
                leak,
                phi_min: grid.phi_min,
                phi_max: grid.phi_max,
            });
        }
        levels.push(Level {
            eps: *e,
            wavefunction: psi,
        });
    }

    Ok(Spectrum {
        unresolved: eps[1] - eps[0] < UNRESOLVED_SPLITTING,
        levels,
        spec: *spec,
        grid: *grid,
        convergence_estimate,
        raw_eps: fine,
    })
}

fn fix_sign(psi: &mut [f64]) {
    let mut best = 0;
    for (i, v) in psi.iter().enumerate() {
        if v.abs() > psi[best].abs() * (1.0 + 1e-9) {
            best = i;
        }
    }
    if psi[best] < 0.0 {
        psi.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Adaptive grid selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPolicy {
    pub initial_half_width: f64,
    pub initial_points: usize,
    pub max_doublings: usize,
    /// Accept when the convergence estimate is below `tolerance · max(1, |ε₀|)`.
    pub tolerance: f64,
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy {
            initial_half_width: 2.0 * PI,
            initial_points: 2001,
            max_doublings: 6,
            tolerance: 1e-9,
        }
    }
}

/// Widens the domain until no state leaks, then refines until the nested-grid
/// estimate passes; returns the accepted spectrum.
pub fn adaptive_solve(spec: &PotentialSpec, n_levels: usize, policy: &GridPolicy) -> Result<Spectrum> {
    let mut half_width = policy.initial_half_width;
    let mut spectrum = None;
    for _ in 0..=policy.max_doublings {
        let grid = Grid::centered(spec.phi0, half_width, policy.initial_points)?;
        match solve_spectrum(spec, &grid, n_levels) {
            Ok(s) => {
                spectrum = Some(s);
                break;
            }
            Err(Error::BoundaryLeak { .. }) => half_width *= 2.0,
            Err(e) => return Err(e),
        }
    }
    let mut spectrum = spectrum.ok_or(Error::FailedToConverge {
        what: "domain width",
        doublings: policy.max_doublings,
    })?;
    for doubling in 0..=policy.max_doublings {
        let tol = policy.tolerance * spectrum.eps(0).abs().max(1.0);
        if spectrum.convergence_estimate < tol {
            return Ok(spectrum);
        }
        if doubling == policy.max_doublings {
            break;
        }
        spectrum = solve_spectrum(spec, &spectrum.grid.refined(), n_levels)?;
    }
    Err(Error::FailedToConverge {
        what: "grid resolution",
        doublings: policy.max_doublings,
    })
}

/// Grid accepted by [`adaptive_solve`].
pub fn default_grid(spec: &PotentialSpec, n_levels: usize) -> Result<Grid> {
    adaptive_solve(spec, n_levels, &GridPolicy::default()).map(|s| s.grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(beta_c: f64, phi0: f64) -> PotentialSpec {
        PotentialSpec {
            beta_l: 0.0,
            beta_c,
            k: 0.0,
            phi0,
        }
    }

    fn example_spec(phi0: f64) -> PotentialSpec {
        PotentialSpec {
            beta_l: 3.9,
            beta_c: 1.0,
            k: 0.001,
            phi0,
        }
    }

    #[test]
    fn parabola_values() {
        let g = Grid::new(-PI, PI, 9).unwrap();
        let u = build_potential(&harmonic(1.0, 0.0), &g);
        assert!(u[4].abs() < 1e-15);
        assert!((u[8] - PI * PI).abs() < 1e-12);
    }

    #[test]
    fn double_well_shape() {
        let g = Grid::new(-2.0 * PI, 2.0 * PI, 4001).unwrap();
        let u = build_potential(&example_spec(0.0), &g);
        assert!((u[2000] - 7.8).abs() < 1e-12);
        let minima: Vec<usize> = (1..u.len() - 1).filter(|&i| u[i] < u[i - 1] && u[i] < u[i + 1]).collect();
        assert_eq!(minima.len(), 2);
        assert!(minima.iter().all(|&i| u[i] < u[2000]));
        for i in 0..u.len() {
            assert!((u[i] - u[u.len() - 1 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn parabola_translation_invariance() {
        let a = harmonic(1.0, 0.3);
        let b = harmonic(1.0, 1.3);
        for phi in [-2.0, -0.1, 0.7, 3.0] {
            assert!((a.potential(phi) - b.potential(phi + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn harmonic_spectrum() {
        let s = adaptive_solve(&harmonic(1.0, 0.0), 4, &GridPolicy::default()).unwrap();
        for (n, e) in s.eigenvalues().iter().enumerate() {
            assert!((e - (2 * n + 1) as f64).abs() < 1e-6, "level {n}: {e}");
        }
        assert!((s.eps(0) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn harmonic_scaling_with_beta_c() {
        let s = adaptive_solve(&harmonic(0.25, 0.0), 3, &GridPolicy::default()).unwrap();
        for (n, e) in s.eigenvalues().iter().enumerate() {
            assert!((e - 0.5 * (2 * n + 1) as f64).abs() < 1e-6);
        }
    }

    #[test]
    fn shifted_parabola_same_spectrum() {
        let a = adaptive_solve(&harmonic(1.0, 0.0), 3, &GridPolicy::default()).unwrap();
        let b = adaptive_solve(&harmonic(1.0, 2.5), 3, &GridPolicy::default()).unwrap();
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn rounded_beta_splitting_magnitude() {
        let s = adaptive_solve(&example_spec(0.0), 4, &GridPolicy::default()).unwrap();
        let delta = s.gap() / 2.0;
        // rounded betas; the exact device betas are exercised in two_level
        assert!(delta > 1.0e-3 && delta < 1.8e-3, "Delta = {delta}");
    }

    #[test]
    fn normalization_and_orthogonality() {
        let s = adaptive_solve(&example_spec(0.0), 4, &GridPolicy::default()).unwrap();
        for i in 0..4 {
            assert!((s.overlap(i, i) - 1.0).abs() < 1e-10);
            for j in 0..i {
                assert!(s.overlap(i, j).abs() < 1e-8, "<{i}|{j}> = {}", s.overlap(i, j));
            }
        }
        assert!(s.eigenvalues().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn parity_at_symmetry_point() {
        let s = adaptive_solve(&example_spec(0.0), 4, &GridPolicy::default()).unwrap();
        let n = s.grid.n_points;
        for (k, level) in s.levels.iter().enumerate() {
            let psi = &level.wavefunction;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let worst = (0..n).map(|i| (psi[i] - sign * psi[n - 1 - i]).abs()).fold(0.0, f64::max);
            assert!(worst < 1e-8, "level {k}: parity defect {worst}");
        }
    }

    #[test]
    fn narrow_domain_leaks() {
        let g = Grid::centered(0.0, 3.0, 1001).unwrap();
        assert!(matches!(
            solve_spectrum(&example_spec(0.0), &g, 2),
            Err(Error::BoundaryLeak { .. })
        ));
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(1.0, 0.0, 11).is_err());
        assert!(Grid::new(0.0, 1.0, 10).is_err());
        let g = Grid::new(-1.0, 1.0, 11).unwrap();
        assert!(matches!(solve_spectrum(&harmonic(1.0, 0.0), &g, 2), Err(Error::InvalidGrid(_))));
        assert!(matches!(
            solve_spectrum(&harmonic(-1.0, 0.0), &Grid::new(-1.0, 1.0, 9).unwrap(), 2),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn not_converged_surfaces() {
        let g = Grid::centered(0.0, 4.0 * PI, 201).unwrap();
        let s = solve_spectrum(&example_spec(0.0), &g, 2).unwrap();
        assert!(matches!(s.ensure_converged(1e-12), Err(Error::NotConverged { .. })));
    }

    #[test]
    fn raw_fd_energies_converge_from_below() {
        let spec = harmonic(1.0, 0.0);
        let mut prev = f64::MIN;
        let mut n = 401;
        while n <= 12801 {
            let g = Grid::centered(0.0, 4.0 * PI, n).unwrap();
            let e = solve_spectrum(&spec, &g, 2).unwrap().raw_eps[0];
            assert!(e >= prev - 1e-10, "n = {n}: {e} < {prev}");
            prev = e;
            n = 2 * n - 1;
        }
    }

    #[test]
    fn near_classical_does_not_lie() {
        let spec = PotentialSpec {
            beta_l: 3.9,
            beta_c: 1e-8,
            k: 0.001,
            phi0: 0.0,
        };
        match adaptive_solve(&spec, 2, &GridPolicy::default()) {
            Err(Error::FailedToConverge { .. }) => {}
            Err(e) => panic!("unexpected error {e}"),
            Ok(s) => {
                // harmonic approximation about the well bottom
                let mut phi_w: f64 = 2.5;
                for _ in 0..50 {
                    let d1 = 2.0 * phi_w / (1.0 - 1e-6) - 2.0 * 3.9 * phi_w.sin();
                    let d2 = 2.0 / (1.0 - 1e-6) - 2.0 * 3.9 * phi_w.cos();
                    phi_w -= d1 / d2;
                }
                let curvature = 2.0 / (1.0 - 1e-6) - 2.0 * 3.9 * phi_w.cos();
                let expected = spec.potential(phi_w) + (1e-8 * curvature / 2.0).sqrt();
                assert!((s.eps(0) - expected).abs() < 1e-6, "{} vs {expected}", s.eps(0));
                assert!(s.unresolved);
            }
        }
    }
}
