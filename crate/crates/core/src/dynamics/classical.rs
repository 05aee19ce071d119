//! Classical equations of motion for the beam displacement x, the LC flux φ
//! and the SQUID flux Φ.
//!
//! ```text
//! U = ½mω_m²x² + φ²/2L + (Φ − Φ_e − Blx − Mφ/L)²/2Λ(1−K²) − (I_cΦ₀/2π) cos(2πΦ/Φ₀) − I_in φ
//! ```
//!
//! with masses m, C and C_J. The supercurrent is I_s = (Φ − Φ_e − Blx − Mφ/L)/Λ(1−K²).

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::Serialize;
use std::f64::consts::PI;

use crate::constants::PHI0;
use crate::device::DeviceParams;
use crate::error::{Error, Result};

/// Relative energy drift (I_in = 0) above which a run is declared unstable.
pub const DRIFT_LIMIT: f64 = 1e-3;
/// Required time steps per plasma period.
pub const MIN_STEPS_PER_PLASMA_PERIOD: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalState {
    pub x: f64,
    pub x_dot: f64,
    pub phi: f64,
    pub phi_dot: f64,
    #[serde(rename = "Phi")]
    pub flux: f64,
    #[serde(rename = "Phi_dot")]
    pub flux_dot: f64,
}

impl ClassicalState {
    pub fn at_rest(q: [f64; 3]) -> Self {
        ClassicalState {
            x: q[0],
            x_dot: 0.0,
            phi: q[1],
            phi_dot: 0.0,
            flux: q[2],
            flux_dot: 0.0,
        }
    }

    pub fn positions(&self) -> [f64; 3] {
        [self.x, self.phi, self.flux]
    }
}

struct Model {
    k_m: f64,
    inv_l: f64,
    m_over_l: f64,
    bl: f64,
    inv_d: f64,
    phi_e: f64,
    i_c: f64,
    e_j: f64,
    masses: [f64; 3],
}

impl Model {
    fn new(p: &DeviceParams) -> Result<Self> {
        p.validate()?;
        let k = p.coupling_k();
        if k >= 1.0 {
            return Err(Error::Overcoupled(k));
        }
        Ok(Model {
            k_m: p.mass * p.omega_m * p.omega_m,
            inv_l: 1.0 / p.inductance,
            m_over_l: p.mutual_inductance / p.inductance,
            bl: p.bl(),
            inv_d: 1.0 / (p.loop_inductance * (1.0 - k * k)),
            phi_e: p.external_flux,
            i_c: p.critical_current,
            e_j: p.critical_current * PHI0 / (2.0 * PI),
            masses: [p.mass, p.capacitance, p.junction_capacitance],
        })
    }

    fn supercurrent(&self, q: &[f64; 3]) -> f64 {
        (q[2] - self.phi_e - self.bl * q[0] - self.m_over_l * q[1]) * self.inv_d
    }

    fn potential(&self, q: &[f64; 3]) -> f64 {
        let s = q[2] - self.phi_e - self.bl * q[0] - self.m_over_l * q[1];
        0.5 * self.k_m * q[0] * q[0] + 0.5 * self.inv_l * q[1] * q[1] + 0.5 * s * s * self.inv_d
            - self.e_j * (2.0 * PI * q[2] / PHI0).cos()
    }

    /// −∇U without the drive.
    fn force(&self, q: &[f64; 3]) -> [f64; 3] {
        let i_s = self.supercurrent(q);
        [
            -self.k_m * q[0] + self.bl * i_s,
            -self.inv_l * q[1] + self.m_over_l * i_s,
            -i_s - self.i_c * (2.0 * PI * q[2] / PHI0).sin(),
        ]
    }

    fn hessian(&self, q: &[f64; 3]) -> Matrix3<f64> {
        let (b, r, d) = (self.bl, self.m_over_l, self.inv_d);
        let j = self.i_c * 2.0 * PI / PHI0 * (2.0 * PI * q[2] / PHI0).cos();
        Matrix3::new(
            self.k_m + b * b * d,
            b * r * d,
            -b * d,
            b * r * d,
            self.inv_l + r * r * d,
            -r * d,
            -b * d,
            -r * d,
            d + j,
        )
    }

    /// Minimizing x and φ for fixed Φ.
    fn slave(&self, flux: f64) -> [f64; 3] {
        let (b, r, d) = (self.bl, self.m_over_l, self.inv_d);
        let a = Matrix2::new(self.k_m + b * b * d, b * r * d, b * r * d, self.inv_l + r * r * d);
        let rhs = Vector2::new(b, r) * (flux - self.phi_e) * d;
        let s = a.lu().solve(&rhs).unwrap_or_else(Vector2::zeros);
        [s[0], s[1], flux]
    }

    fn kinetic(&self, s: &ClassicalState) -> f64 {
        0.5 * (self.masses[0] * s.x_dot * s.x_dot + self.masses[1] * s.phi_dot * s.phi_dot + self.masses[2] * s.flux_dot * s.flux_dot)
    }
}

/// Total energy with I_in = 0.
pub fn energy(p: &DeviceParams, s: &ClassicalState) -> Result<f64> {
    let m = Model::new(p)?;
    Ok(m.kinetic(s) + m.potential(&s.positions()))
}

/// Local minimum of U (I_in = 0) on the side `well` (−1 or +1) of Φ_e.
pub fn relax(p: &DeviceParams, well: i32) -> Result<[f64; 3]> {
    let m = Model::new(p)?;
    let n = 4000;
    let side = if well < 0 { -1.0 } else { 1.0 };
    let mut best = (f64::INFINITY, p.external_flux);
    for i in 1..=n {
        let flux = p.external_flux + side * PHI0 * i as f64 / n as f64;
        let u = m.potential(&m.slave(flux));
        if u < best.0 {
            best = (u, flux);
        }
    }
    let mut q = m.slave(best.1);
    for _ in 0..50 {
        let f = m.force(&q);
        let step = match m.hessian(&q).lu().solve(&Vector3::from(f)) {
            Some(s) => s,
            None => break,
        };
        for k in 0..3 {
            q[k] += step[k];
        }
        if step[2].abs() < 1e-15 * PHI0 {
            break;
        }
    }
    Ok(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub phi: f64,
    #[serde(rename = "Phi")]
    pub flux: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub final_state: ClassicalState,
    /// Energy above the relaxed equilibrium of the initial well.
    pub excitation_energy: f64,
    /// Largest |E − E(0)| / excitation energy over recorded samples (I_in = 0 runs).
    pub max_relative_drift: f64,
}

impl Trajectory {
    pub fn to_csv(&self, header: &str) -> String {
        use crate::output::fmt_sig;
        let mut out = String::from(header);
        out.push_str("t,x,phi,Phi,energy\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_sig(s.t),
                fmt_sig(s.x),
                fmt_sig(s.phi),
                fmt_sig(s.flux),
                fmt_sig(s.energy)
            ));
        }
        out
    }
}

/// Velocity-Verlet integration. `drive` is I_in(t) in A, `None` for an
/// undriven (energy-conserving) run. A sample is stored every `record_every`
/// steps plus the final step.
pub fn classical_trajectory(
    p: &DeviceParams,
    initial: ClassicalState,
    drive: Option<&dyn Fn(f64) -> f64>,
    duration: f64,
    dt: f64,
    record_every: usize,
) -> Result<Trajectory> {
    let m = Model::new(p)?;
    let f_p = p.plasma_frequency();
    if !(dt > 0.0) || dt > 1.0 / (MIN_STEPS_PER_PLASMA_PERIOD * f_p) * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "dt = {dt:e} s does not resolve the plasma frequency {f_p:e} Hz (need dt <= {:e} s)",
            1.0 / (MIN_STEPS_PER_PLASMA_PERIOD * f_p)
        )));
    }
    if !(duration >= 0.0) {
        return Err(Error::InvalidArgument(format!("duration must be non-negative, got {duration}")));
    }
    let record_every = record_every.max(1);
    let steps = (duration / dt).round() as u64;
    let well = if initial.flux < p.external_flux { -1 } else { 1 };
    let eq = relax(p, well)?;
    let e_eq = m.potential(&eq);
    let e_of = |s: &ClassicalState| m.kinetic(s) + m.potential(&s.positions());
    let e0 = e_of(&initial);
    let excitation = e0 - e_eq;
    let floor = 1e-9 * m.e_j;
    let inv_m = [1.0 / m.masses[0], 1.0 / m.masses[1], 1.0 / m.masses[2]];

    let accel = |q: &[f64; 3], t: f64| {
        let mut f = m.force(q);
        if let Some(d) = drive {
            f[1] += d(t);
        }
        [f[0] * inv_m[0], f[1] * inv_m[1], f[2] * inv_m[2]]
    };

    let mut q = initial.positions();
    let mut v = [initial.x_dot, initial.phi_dot, initial.flux_dot];
    let mut a = accel(&q, 0.0);
    let mut samples = Vec::with_capacity((steps / record_every as u64 + 2) as usize);
    let mut max_drift = 0.0f64;
    let state = |q: &[f64; 3], v: &[f64; 3]| ClassicalState {
        x: q[0],
        x_dot: v[0],
        phi: q[1],
        phi_dot: v[1],
        flux: q[2],
        flux_dot: v[2],
    };
    samples.push(Sample {
        t: 0.0,
        x: q[0],
        phi: q[1],
        flux: q[2],
        energy: e0,
    });
    for step in 1..=steps {
        let t = step as f64 * dt;
        for k in 0..3 {
            v[k] += 0.5 * dt * a[k];
            q[k] += dt * v[k];
        }
        a = accel(&q, t);
        for k in 0..3 {
            v[k] += 0.5 * dt * a[k];
        }
        if step % record_every as u64 == 0 || step == steps {
            let s = state(&q, &v);
            let e = e_of(&s);
            if !e.is_finite() {
                return Err(Error::Unstable { drift: f64::INFINITY });
            }
            if drive.is_none() {
                let drift = (e - e0).abs() / excitation.max(floor);
                max_drift = max_drift.max(drift);
                if drift > DRIFT_LIMIT {
                    return Err(Error::Unstable { drift });
                }
            }
            samples.push(Sample {
                t,
                x: q[0],
                phi: q[1],
                flux: q[2],
                energy: e,
            });
        }
    }
    Ok(Trajectory {
        samples,
        final_state: state(&q, &v),
        excitation_energy: excitation,
        max_relative_drift: max_drift,
    })
}
