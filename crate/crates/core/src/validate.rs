//! Invariant and oracle checks run by the `validate` command.

use std::f64::consts::PI;

use crate::config::RunConfig;
use crate::device::derive_dimensionless;
use crate::dynamics::hamiltonian::{RwaHamiltonian, C64};
use crate::dynamics::lindblad::{cavity_steady_state, evolve, mechanical_populations};
use crate::dynamics::quartic::{analytic_surface, exact_surface, fit_quartic, rwa_coefficients_from_quartic, symmetric_samples};
use crate::error::Result;
use crate::rwa::{compute_couplings, detectability, symmetric_spectrum};
use crate::solver::{adaptive_solve, solve_spectrum, PotentialSpec, Spectrum};
use crate::two_level::{extract_delta, extract_eta, TwoLevelModel};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{}  {:<34} {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            ));
        }
        out.push_str(&format!("{} checks, {} failed\n", self.checks.len(), self.failures()));
        out
    }
}

fn check(name: &'static str, r: Result<(bool, String)>) -> Check {
    match r {
        Ok((passed, detail)) => Check { name, passed, detail },
        Err(e) => Check {
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn skipped(name: &'static str) -> Check {
    Check {
        name,
        passed: false,
        detail: "skipped: symmetric spectrum unavailable".into(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn harmonic_limit(beta_c: f64) -> Result<(bool, String)> {
    let spec = PotentialSpec {
        beta_l: 0.0,
        beta_c,
        k: 0.0,
        phi0: 0.0,
    };
    let s = adaptive_solve(&spec, 4, &Default::default())?;
    let worst = (0..4)
        .map(|n| rel(s.eps(n), (2 * n + 1) as f64 * beta_c.sqrt()))
        .fold(0.0, f64::max);
    Ok((worst < 1e-6, format!("max rel err {worst:.2e} (limit 1e-6)")))
}

fn parity(s: &Spectrum) -> (bool, String) {
    let n = s.grid.n_points;
    let mut worst = 0.0f64;
    for (k, l) in s.levels.iter().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let peak = l.wavefunction.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..n / 2 {
            worst = worst.max((l.wavefunction[i] - sign * l.wavefunction[n - 1 - i]).abs() / peak);
        }
    }
    (worst < 1e-6, format!("max parity defect {worst:.2e} (limit 1e-6)"))
}

fn hellmann_feynman(s: &Spectrum, phi0: f64) -> Result<(bool, String)> {
    let h = 1e-4 * phi0.abs().max(1e-3);
    let at = |p: f64| solve_spectrum(&s.spec.with_phi0(p), &s.grid, 2);
    let (lo, mid, hi) = (at(phi0 - h)?, at(phi0)?, at(phi0 + h)?);
    let fd = (hi.raw_eps[0] - lo.raw_eps[0]) / (2.0 * h);
    let spec = mid.spec;
    let hf = mid.expectation(0, |x| spec.potential_phi0_derivative(x)) / mid.overlap(0, 0);
    let e = rel(hf, fd);
    Ok((e < 1e-6, format!("d eps0/d phi0 = {fd:.9e}, <du/d phi0> = {hf:.9e}, rel {e:.2e}")))
}

fn quartic_analytic(tl: &TwoLevelModel) -> Result<(bool, String)> {
    let window = TwoLevelModel {
        fit_window: (0.0, f64::INFINITY),
        ..tl.clone()
    };
    let s = analytic_surface(&window, &symmetric_samples(0.8 * tl.delta / tl.eta, 41))?;
    let f = fit_quartic(&s)?;
    let e2 = rel(f.c2, -tl.eta * tl.eta / (2.0 * tl.delta));
    let e4 = rel(f.c4, tl.eta.powi(4) / (8.0 * tl.delta.powi(3)));
    Ok((e2 < 0.01 && e4 < 0.01, format!("c2 rel {e2:.2e}, c4 rel {e4:.2e} (limit 1e-2)")))
}

fn quartic_exact(cfg: &RunConfig, s: &Spectrum, tl: &TwoLevelModel) -> Result<(bool, String)> {
    let surf = exact_surface(&s.spec, &s.grid, &symmetric_samples(0.8 * tl.delta / tl.eta, 41), tl.fit_window.1)?;
    let x = rwa_coefficients_from_quartic(&fit_quartic(&surf)?, &cfg.device, tl.e0);
    let c = compute_couplings(&cfg.device, tl);
    let e04 = rel(x.omega_04.0, c.omega_04.0);
    let e22 = rel(x.omega_22.0, c.omega_22.0);
    Ok((e04 < 0.05 && e22 < 0.05, format!("Omega_04 rel {e04:.2e}, Omega_22 rel {e22:.2e} (limit 5e-2)")))
}

fn linear_cavity(gamma_e: f64) -> Result<(bool, String)> {
    let eps = 0.1 * gamma_e;
    let mut worst = 0.0f64;
    for delta in [0.0, 0.5 * gamma_e, -2.0 * gamma_e] {
        let h = RwaHamiltonian::new(0.0, 0.0, 2, 12, delta, eps)?;
        let n = cavity_steady_state(&h.cavity_block(0), gamma_e, 0.0)?.photon_number;
        worst = worst.max(rel(n, eps * eps / (delta * delta + gamma_e * gamma_e / 4.0)));
    }
    Ok((worst < 1e-8, format!("max rel err {worst:.2e} (limit 1e-8)")))
}

fn qnd_blocks(omega_04: f64, omega_22: f64, gamma_e: f64) -> Result<(bool, String)> {
    let h = RwaHamiltonian::new(omega_04, omega_22, 2, 8, 0.0, 0.3 * gamma_e)?;
    let comm = h.commutator_norm() / h.matrix.norm();
    let de = h.n_e_max + 1;
    let w: [f64; 3] = [0.6, 0.3, 0.1];
    let rho0 = nalgebra::DMatrix::from_fn(h.dim(), h.dim(), |i, j| {
        if i % de == 0 && j % de == 0 {
            C64::new((w[i / de] * w[j / de]).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let rho = evolve(&h, gamma_e, 0.0, &rho0, 5.0 / gamma_e, 2000);
    let drift = mechanical_populations(&h, &rho)
        .iter()
        .zip(w)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    Ok((
        comm < 1e-14 && drift < 1e-10,
        format!("|[H,N_m]|/|H| = {comm:.1e}, population drift {drift:.1e}"),
    ))
}

pub fn run_validation(cfg: &RunConfig) -> ValidationReport {
    let mut checks = Vec::new();
    let circuit = derive_dimensionless(&cfg.device);
    checks.push(check(
        "device model",
        circuit.as_ref().map(|c| (true, format!("beta_L = {:.6}, beta_C = {:.6}", c.beta_l, c.beta_c))).map_err(|e| {
            crate::error::Error::InvalidParams(e.to_string())
        }),
    ));
    let beta_c = circuit.as_ref().map(|c| c.beta_c).unwrap_or(1.0);
    checks.push(check("harmonic limit", harmonic_limit(beta_c)));

    let sym = circuit.as_ref().ok().map(|c| symmetric_spectrum(c, &cfg.solver));
    let sym = match sym {
        Some(Ok(s)) => {
            checks.push(Check {
                name: "symmetric spectrum",
                passed: true,
                detail: format!("n = {}, estimate {:.2e}", s.grid.n_points, s.convergence_estimate),
            });
            Some(s)
        }
        Some(Err(e)) => {
            checks.push(Check {
                name: "symmetric spectrum",
                passed: false,
                detail: format!("error: {e}"),
            });
            None
        }
        None => {
            checks.push(skipped("symmetric spectrum"));
            None
        }
    };

    let model = sym.as_ref().map(|s| {
        extract_delta(s).and_then(|d| extract_eta(&s.spec, &s.grid, &d, circuit.as_ref().unwrap().e0, &cfg.solver.eta))
    });
    match (&sym, &model) {
        (Some(s), Some(Ok(tl))) => {
            checks.push(Check {
                name: "two-level fit",
                passed: tl.valid,
                detail: format!("eta/E0 = {:.6}, Delta/E0 = {:.6e}, residual {:.2e}", tl.eta, tl.delta, tl.fit_residual),
            });
            let (ok, detail) = parity(s);
            checks.push(Check { name: "parity", passed: ok, detail });
            checks.push(check("Hellmann-Feynman", hellmann_feynman(s, 0.5 * tl.fit_window.1)));
            checks.push(check("quartic fit (analytic surface)", quartic_analytic(tl)));
            checks.push(check("quartic fit (exact surface)", quartic_exact(cfg, s, tl)));
            let c = compute_couplings(&cfg.device, tl);
            checks.push(check("linear cavity limit", linear_cavity(cfg.device.gamma_e)));
            checks.push(check("QND block structure", qnd_blocks(c.omega_04.0, c.omega_22.0, cfg.device.gamma_e)));
            match detectability(&cfg.device, tl, &c, &mut Vec::new()) {
                Ok(m) => {
                    let e = rel(m.zeta_max, 2.0 * PI * m.zeta);
                    checks.push(Check {
                        name: "zeta_max vs 2 pi t0/tau_m(N_c)",
                        passed: e < 1e-9,
                        detail: format!("rel {e:.2e} (limit 1e-9)"),
                    });
                    let e = rel(m.zeta_max_engineering, m.zeta_max);
                    checks.push(Check {
                        name: "zeta_max symbolic vs engineering",
                        passed: e < 0.02,
                        detail: format!(
                            "symbolic {:.4}, engineering {:.4}, rel {e:.3} (limit 0.02)",
                            m.zeta_max, m.zeta_max_engineering
                        ),
                    });
                }
                Err(e) => checks.push(Check {
                    name: "detectability metrics",
                    passed: false,
                    detail: format!("error: {e}"),
                }),
            }
        }
        (_, Some(Err(e))) => checks.push(Check {
            name: "two-level fit",
            passed: false,
            detail: format!("error: {e}"),
        }),
        _ => {
            for name in ["two-level fit", "parity", "Hellmann-Feynman", "quartic fit (exact surface)"] {
                checks.push(skipped(name));
            }
        }
    }
    ValidationReport { checks }
}
