//! H_RWA on a truncated two-mode Fock space, in the frame rotating at the drive.
//!
//! ```text
//! H/ħ = −δ N_e + Ω₀,₄ N_e² + Ω₂,₂ N_m N_e + ε (a + a†),   δ = ω_d − ω_e
//! ```
//!
//! The free mechanical term commutes with every retained term and is dropped.
//! Basis index of |n_m, n_e⟩ is n_m (n_e_max + 1) + n_e.

use nalgebra::{Complex, DMatrix};

use crate::constants::HBAR;
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::rwa::EffectiveCouplings;

pub type C64 = Complex<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct RwaHamiltonian {
    pub n_m_max: usize,
    pub n_e_max: usize,
    /// ω_d − ω_e, rad/s.
    pub detuning: f64,
    /// rad/s.
    pub drive_strength: f64,
    pub omega_04: f64,
    pub omega_22: f64,
    /// H/ħ in rad/s.
    pub matrix: DMatrix<C64>,
}

/// I_in sqrt(ħ/2Cω_e)/ħ for the drive envelope amplitude.
pub fn drive_strength_from_current(p: &DeviceParams) -> f64 {
    p.drive_current * (HBAR / (2.0 * p.capacitance * p.omega_e())).sqrt() / HBAR
}

/// Lowering operator on n_max + 1 levels.
pub fn annihilation(n_max: usize) -> DMatrix<C64> {
    let d = n_max + 1;
    DMatrix::from_fn(d, d, |i, j| if j == i + 1 { C64::new((j as f64).sqrt(), 0.0) } else { C64::new(0.0, 0.0) })
}

pub fn number(n_max: usize) -> DMatrix<C64> {
    DMatrix::from_fn(n_max + 1, n_max + 1, |i, j| C64::new(if i == j { i as f64 } else { 0.0 }, 0.0))
}

impl RwaHamiltonian {
    pub fn new(
        omega_04: f64,
        omega_22: f64,
        n_m_max: usize,
        n_e_max: usize,
        detuning: f64,
        drive_strength: f64,
    ) -> Result<Self> {
        if n_m_max < 2 || n_e_max < 2 {
            return Err(Error::InvalidArgument(format!(
                "Fock truncations must be >= 2 (got n_m_max = {n_m_max}, n_e_max = {n_e_max})"
            )));
        }
        let de = n_e_max + 1;
        let dim = (n_m_max + 1) * de;
        let mut h = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        for nm in 0..=n_m_max {
            for ne in 0..=n_e_max {
                let i = nm * de + ne;
                let (m, e) = (nm as f64, ne as f64);
                h[(i, i)] = C64::new(-detuning * e + omega_04 * e * e + omega_22 * m * e, 0.0);
                if ne < n_e_max {
                    let v = C64::new(drive_strength * (e + 1.0).sqrt(), 0.0);
                    h[(i, i + 1)] = v;
                    h[(i + 1, i)] = v;
                }
            }
        }
        Ok(RwaHamiltonian {
            n_m_max,
            n_e_max,
            detuning,
            drive_strength,
            omega_04,
            omega_22,
            matrix: h,
        })
    }

    pub fn dim(&self) -> usize {
        (self.n_m_max + 1) * (self.n_e_max + 1)
    }

    /// N_m on the two-mode space.
    pub fn mechanical_number(&self) -> DMatrix<C64> {
        number(self.n_m_max).kronecker(&DMatrix::identity(self.n_e_max + 1, self.n_e_max + 1))
    }

    /// a ⊗ on the LC mode.
    pub fn cavity_lowering(&self) -> DMatrix<C64> {
        DMatrix::<C64>::identity(self.n_m_max + 1, self.n_m_max + 1).kronecker(&annihilation(self.n_e_max))
    }

    /// max |H − H†|.
    pub fn hermiticity_error(&self) -> f64 {
        let d = &self.matrix - self.matrix.adjoint();
        d.iter().fold(0.0f64, |a, z| a.max(z.norm()))
    }

    /// Frobenius norm of [H, N_m].
    pub fn commutator_norm(&self) -> f64 {
        let n = self.mechanical_number();
        (&self.matrix * &n - &n * &self.matrix).norm()
    }

    /// Single-mode cavity block H/ħ for mechanical Fock number n_m.
    pub fn cavity_block(&self, n_m: usize) -> DMatrix<C64> {
        let de = self.n_e_max + 1;
        self.matrix.view((n_m * de, n_m * de), (de, de)).into_owned()
    }
}

pub fn build_rwa_hamiltonian(
    c: &EffectiveCouplings,
    p: &DeviceParams,
    n_m_max: usize,
    n_e_max: usize,
    detuning: f64,
) -> Result<RwaHamiltonian> {
    RwaHamiltonian::new(c.omega_04.0, c.omega_22.0, n_m_max, n_e_max, detuning, drive_strength_from_current(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::RadPerSec;

    fn couplings() -> EffectiveCouplings {
        EffectiveCouplings {
            lambda_m: 0.1,
            lambda_e: 0.02,
            omega_04: RadPerSec(2.0 * std::f64::consts::PI * 938.0),
            omega_22: RadPerSec(2.0 * std::f64::consts::PI * 196.4e3),
        }
    }

    #[test]
    fn undriven_is_diagonal_with_closed_form_levels() {
        let mut p = DeviceParams::paper_example();
        p.drive_current = 0.0;
        let c = couplings();
        let delta = 2.0e5;
        let h = build_rwa_hamiltonian(&c, &p, 3, 5, delta).unwrap();
        for i in 0..h.dim() {
            for j in 0..h.dim() {
                if i != j {
                    assert_eq!(h.matrix[(i, j)].norm(), 0.0);
                }
            }
            let (m, e) = ((i / 6) as f64, (i % 6) as f64);
            let want = -delta * e + c.omega_04.0 * e * e + c.omega_22.0 * m * e;
            assert!((h.matrix[(i, i)].re - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn hermitian_and_qnd() {
        let mut p = DeviceParams::paper_example();
        p.drive_current = 1e-12;
        let h = build_rwa_hamiltonian(&couplings(), &p, 4, 12, -3e5).unwrap();
        let scale = h.matrix.norm();
        assert!(h.hermiticity_error() <= 1e-12 * scale);
        assert!(h.commutator_norm() < 1e-14 * scale);
        assert!(drive_strength_from_current(&p) > 0.0);
    }

    #[test]
    fn blocks_differ_only_by_dispersive_shift() {
        let h = RwaHamiltonian::new(10.0, 100.0, 2, 4, 0.0, 1.0).unwrap();
        let d = h.cavity_block(1) - h.cavity_block(0);
        for i in 0..5 {
            assert!((d[(i, i)].re - 100.0 * i as f64).abs() < 1e-12);
        }
        assert_eq!(h.cavity_lowering().nrows(), 15);
    }

    #[test]
    fn truncation_must_be_at_least_two() {
        assert!(RwaHamiltonian::new(1.0, 1.0, 1, 5, 0.0, 0.0).is_err());
        assert!(RwaHamiltonian::new(1.0, 1.0, 2, 1, 0.0, 0.0).is_err());
    }
}
