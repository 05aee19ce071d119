//! Damped, driven LC mode: Lindblad steady states per mechanical block and
//! full two-mode evolution.
//!
//! Dissipator D[C]ρ = CρC† − ½{C†C, ρ} with C = sqrt(γ_e(n_th+1)) a and, for
//! n_th > 0, sqrt(γ_e n_th) a†. With this convention the linear-cavity photon
//! number is |ε|²/(δ² + γ_e²/4), a Lorentzian of full width γ_e.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::hamiltonian::{annihilation, RwaHamiltonian, C64};
use crate::error::{Error, Result};

/// Largest admissible population of the top retained Fock level.
pub const TRUNCATION_LIMIT: f64 = 1e-6;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Column-stacked superoperator: vec(AρB) = (Bᵀ ⊗ A) vec(ρ).
pub fn liouvillian(h: &DMatrix<C64>, collapse: &[DMatrix<C64>]) -> DMatrix<C64> {
    let d = h.nrows();
    let id = DMatrix::<C64>::identity(d, d);
    let mi = C64::new(0.0, -1.0);
    let mut l = (id.kronecker(h) - h.transpose().kronecker(&id)) * mi;
    for c in collapse {
        let cdc = c.adjoint() * c;
        l += c.conjugate().kronecker(c);
        l -= (id.kronecker(&cdc) + cdc.transpose().kronecker(&id)) * C64::new(0.5, 0.0);
    }
    l
}

pub fn cavity_collapse(n_max: usize, gamma_e: f64, n_thermal: f64) -> Vec<DMatrix<C64>> {
    let a = annihilation(n_max);
    let mut ops = vec![&a * C64::new((gamma_e * (n_thermal + 1.0)).sqrt(), 0.0)];
    if n_thermal > 0.0 {
        ops.push(a.adjoint() * C64::new((gamma_e * n_thermal).sqrt(), 0.0));
    }
    ops
}

/// Solves L vec(ρ) = 0 with the first equation replaced by Tr ρ = 1.
pub fn steady_state(h: &DMatrix<C64>, collapse: &[DMatrix<C64>]) -> Result<DMatrix<C64>> {
    let d = h.nrows();
    let mut l = liouvillian(h, collapse);
    for j in 0..d * d {
        l[(0, j)] = ZERO;
    }
    for i in 0..d {
        l[(0, i * d + i)] = ONE;
    }
    let mut rhs = DVector::from_element(d * d, ZERO);
    rhs[0] = ONE;
    let x = l.lu().solve(&rhs).ok_or(Error::SingularLiouvillian)?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularLiouvillian);
    }
    let rho = DMatrix::from_column_slice(d, d, x.as_slice());
    Ok((&rho + rho.adjoint()) * C64::new(0.5, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyPoint {
    pub photon_number: f64,
    /// ⟨a⟩.
    pub amplitude: C64,
}

/// Steady state of one cavity block (H/ħ in rad/s); rates are scaled by γ_e
/// before solving.
pub fn cavity_steady_state(block: &DMatrix<C64>, gamma_e: f64, n_thermal: f64) -> Result<SteadyPoint> {
    if !(gamma_e > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma_e must be positive, got {gamma_e}")));
    }
    let n_max = block.nrows() - 1;
    let h = block * C64::new(1.0 / gamma_e, 0.0);
    let rho = steady_state(&h, &cavity_collapse(n_max, 1.0, n_thermal))?;
    let top = rho[(n_max, n_max)].re;
    if top > TRUNCATION_LIMIT {
        return Err(Error::Truncation {
            population: top,
            limit: TRUNCATION_LIMIT,
        });
    }
    let photon_number = (0..=n_max).map(|n| n as f64 * rho[(n, n)].re).sum();
    let amplitude = (0..n_max).map(|n| rho[(n + 1, n)] * (n as f64 + 1.0).sqrt()).sum();
    Ok(SteadyPoint {
        photon_number,
        amplitude,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseCurve {
    pub n_m: usize,
    /// ω_d − ω_e, rad/s.
    pub detuning: Vec<f64>,
    pub photon_number: Vec<f64>,
    pub amplitude: Vec<C64>,
    /// Detuning of maximum photon number, refined between samples.
    pub peak: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateResponse {
    pub curves: Vec<ResponseCurve>,
}

impl SteadyStateResponse {
    pub fn peaks(&self) -> Vec<f64> {
        self.curves.iter().map(|c| c.peak).collect()
    }

    /// Peak shift from block n_m to n_m + 1.
    pub fn peak_shift(&self, n_m: usize) -> f64 {
        self.curves[n_m + 1].peak - self.curves[n_m].peak
    }
}

fn block_at(h: &RwaHamiltonian, n_m: usize, detuning: f64) -> DMatrix<C64> {
    let mut b = h.cavity_block(n_m);
    for n in 0..=h.n_e_max {
        b[(n, n)].re += (h.detuning - detuning) * n as f64;
    }
    b
}

fn refine_peak(h: &RwaHamiltonian, n_m: usize, gamma_e: f64, n_thermal: f64, detuning: &[f64], photons: &[f64]) -> Result<f64> {
    let k = photons
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > photons[best] { i } else { best });
    if k == 0 || k + 1 == photons.len() {
        return Ok(detuning[k]);
    }
    let f = |d: f64| cavity_steady_state(&block_at(h, n_m, d), gamma_e, n_thermal).map(|s| s.photon_number);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (detuning[k - 1], detuning[k + 1]);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..80 {
        if (b - a).abs() <= 1e-9 * gamma_e {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// Response of every mechanical block of `h` over the detuning grid; the
/// detuning stored in `h` is replaced by each grid value.
pub fn lindblad_steady_state(h: &RwaHamiltonian, gamma_e: f64, n_thermal: f64, detunings: &[f64]) -> Result<SteadyStateResponse> {
    let jobs: Vec<(usize, f64)> = (0..=h.n_m_max)
        .flat_map(|m| detunings.iter().map(move |&d| (m, d)))
        .collect();
    let points = jobs
        .par_iter()
        .map(|&(m, d)| cavity_steady_state(&block_at(h, m, d), gamma_e, n_thermal))
        .collect::<Result<Vec<_>>>()?;
    let curves = (0..=h.n_m_max)
        .into_par_iter()
        .map(|m| {
            let pts = &points[m * detunings.len()..(m + 1) * detunings.len()];
            let photon_number: Vec<f64> = pts.iter().map(|p| p.photon_number).collect();
            let peak = refine_peak(h, m, gamma_e, n_thermal, detunings, &photon_number)?;
            Ok(ResponseCurve {
                n_m: m,
                detuning: detunings.to_vec(),
                photon_number,
                amplitude: pts.iter().map(|p| p.amplitude).collect(),
                peak,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SteadyStateResponse { curves })
}

/// Evenly spaced detunings on [lo, hi].
pub fn detuning_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn lindblad_rhs(h: &DMatrix<C64>, ops: &[(DMatrix<C64>, DMatrix<C64>, DMatrix<C64>)], rho: &DMatrix<C64>) -> DMatrix<C64> {
    let mi = C64::new(0.0, -1.0);
    let mut out = (h * rho - rho * h) * mi;
    for (c, cd, cdc) in ops {
        out += c * rho * cd - (cdc * rho + rho * cdc) * C64::new(0.5, 0.0);
    }
    out
}

/// Full two-mode Lindblad evolution with classical RK4 (rates in rad/s).
pub fn evolve(h: &RwaHamiltonian, gamma_e: f64, n_thermal: f64, rho0: &DMatrix<C64>, duration: f64, steps: usize) -> DMatrix<C64> {
    let a = h.cavity_lowering();
    let mut ops = vec![&a * C64::new((gamma_e * (n_thermal + 1.0)).sqrt(), 0.0)];
    if n_thermal > 0.0 {
        ops.push(a.adjoint() * C64::new((gamma_e * n_thermal).sqrt(), 0.0));
    }
    let ops: Vec<_> = ops
        .into_iter()
        .map(|c| {
            let cd = c.adjoint();
            let cdc = &cd * &c;
            (c, cd, cdc)
        })
        .collect();
    let dt = duration / steps as f64;
    let half = C64::new(dt / 2.0, 0.0);
    let full = C64::new(dt, 0.0);
    let mut rho = rho0.clone();
    for _ in 0..steps {
        let k1 = lindblad_rhs(&h.matrix, &ops, &rho);
        let k2 = lindblad_rhs(&h.matrix, &ops, &(&rho + &k1 * half));
        let k3 = lindblad_rhs(&h.matrix, &ops, &(&rho + &k2 * half));
        let k4 = lindblad_rhs(&h.matrix, &ops, &(&rho + &k3 * full));
        rho += (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);
    }
    rho
}

/// P(n_m) = Σ_{n_e} ρ_{(n_m,n_e),(n_m,n_e)}.
pub fn mechanical_populations(h: &RwaHamiltonian, rho: &DMatrix<C64>) -> Vec<f64> {
    let de = h.n_e_max + 1;
    (0..=h.n_m_max)
        .map(|m| (0..de).map(|e| rho[(m * de + e, m * de + e)].re).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const GAMMA: f64 = 2.0 * PI * 22e3;

    #[test]
    fn linear_cavity_matches_closed_form() {
        let eps = 0.1 * GAMMA;
        for &delta in &[0.0, 0.3 * GAMMA, -1.7 * GAMMA, 5.0 * GAMMA] {
            let h = RwaHamiltonian::new(0.0, 0.0, 2, 12, delta, eps).unwrap();
            let s = cavity_steady_state(&h.cavity_block(0), GAMMA, 0.0).unwrap();
            let want = eps * eps / (delta * delta + GAMMA * GAMMA / 4.0);
            assert!((s.photon_number / want - 1.0).abs() < 1e-8, "{} vs {want}", s.photon_number);
            assert!((s.amplitude.norm_sqr() / want - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn linear_cavity_width_is_gamma() {
        let eps = 0.05 * GAMMA;
        let h = RwaHamiltonian::new(0.0, 0.0, 2, 10, 0.0, eps).unwrap();
        let n = |d: f64| cavity_steady_state(&block_at(&h, 0, d), GAMMA, 0.0).unwrap().photon_number;
        assert!((n(GAMMA / 2.0) / n(0.0) - 0.5).abs() < 1e-8);
        assert!((n(-GAMMA / 2.0) / n(0.0) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn thermal_bath_without_drive() {
        let h = RwaHamiltonian::new(0.0, 0.0, 2, 22, 0.0, 0.0).unwrap();
        let s = cavity_steady_state(&h.cavity_block(0), GAMMA, 0.3).unwrap();
        assert!((s.photon_number - 0.3).abs() < 1e-6);
        assert!(s.amplitude.norm() < 1e-12);
    }

    #[test]
    fn truncation_failure_is_reported() {
        let h = RwaHamiltonian::new(0.0, 0.0, 2, 4, 0.0, 2.0 * GAMMA).unwrap();
        assert!(matches!(
            cavity_steady_state(&h.cavity_block(0), GAMMA, 0.0),
            Err(Error::Truncation { .. })
        ));
    }

    #[test]
    fn undamped_liouvillian_is_singular() {
        let h = RwaHamiltonian::new(0.0, 0.0, 2, 3, 0.0, 0.0).unwrap();
        let r = steady_state(&h.cavity_block(0), &[]);
        assert!(matches!(r, Err(Error::SingularLiouvillian)));
    }

    #[test]
    fn peak_shift_is_linear_in_phonon_number() {
        let w22 = 0.5 * GAMMA;
        let h = RwaHamiltonian::new(0.002 * GAMMA, w22, 2, 10, 0.0, 0.02 * GAMMA).unwrap();
        let grid = detuning_grid(-2.0 * GAMMA, 3.0 * GAMMA, 101);
        let r = lindblad_steady_state(&h, GAMMA, 0.0, &grid).unwrap();
        assert!((r.peak_shift(0) / w22 - 1.0).abs() < 1e-3);
        assert!(((r.peaks()[2] - r.peaks()[0]) / (2.0 * w22) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_coupling_gives_identical_curves() {
        let h = RwaHamiltonian::new(0.0, 0.0, 3, 8, 0.0, 0.05 * GAMMA).unwrap();
        let r = lindblad_steady_state(&h, GAMMA, 0.0, &detuning_grid(-GAMMA, GAMMA, 21)).unwrap();
        for c in &r.curves[1..] {
            assert_eq!(c.photon_number, r.curves[0].photon_number);
        }
    }

    #[test]
    fn evolution_conserves_mechanical_populations() {
        let h = RwaHamiltonian::new(0.01 * GAMMA, 0.7 * GAMMA, 2, 8, 0.2 * GAMMA, 0.3 * GAMMA).unwrap();
        let de = h.n_e_max + 1;
        let dim = h.dim();
        // mechanical superposition with weights 0.5, 0.3, 0.2, LC vacuum
        let amps = [0.5f64.sqrt(), 0.3f64.sqrt(), 0.2f64.sqrt()];
        let psi = DVector::from_fn(dim, |i, _| if i % de == 0 { C64::new(amps[i / de], 0.0) } else { ZERO });
        let rho0 = &psi * psi.adjoint();
        let rho = evolve(&h, GAMMA, 0.0, &rho0, 10.0 / GAMMA, 4000);
        let p = mechanical_populations(&h, &rho);
        for (m, a) in amps.iter().enumerate() {
            assert!((p[m] - a * a).abs() < 1e-10, "P({m}) = {}", p[m]);
        }
        let n_e: f64 = (0..dim).map(|i| (i % de) as f64 * rho[(i, i)].re).sum();
        assert!(n_e > 1e-3);
    }
}
