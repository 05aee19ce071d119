//! Parameter sweeps over one device parameter.

use rayon::prelude::*;

use crate::config::{set_parameter, RunConfig, SweepSpec};
use crate::error::Result;
use crate::output::fmt_sig;
use crate::rwa::{feasibility_report, FeasibilityReport, Flags, SolverConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// `ok`, or the first failing stage and its message.
    pub status: String,
    pub zeta_max: f64,
    pub zeta_max_engineering: f64,
    /// Ω₂,₂/2π (Hz).
    pub omega_22_hz: f64,
    pub delta_over_h_hz: f64,
    pub eta_over_e0: f64,
    pub delta_over_e0: f64,
    pub adiabaticity_ratio: f64,
    pub tau_m: f64,
    pub t0: f64,
    pub n_e_crit: f64,
    pub flags: Flags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub parameter: String,
    pub rows: Vec<SweepRow>,
}

fn row_from(value: f64, r: &FeasibilityReport) -> SweepRow {
    let nan = f64::NAN;
    let status = match r.errors.first() {
        Some(e) => format!("{}: {}", e.stage, e.message),
        None if r.metrics.is_none() => "skipped: no two-level model".to_string(),
        None => "ok".to_string(),
    };
    let m = r.metrics;
    let tl = r.two_level.as_ref();
    SweepRow {
        value,
        status,
        zeta_max: m.map_or(nan, |m| m.zeta_max),
        zeta_max_engineering: m.map_or(nan, |m| m.zeta_max_engineering),
        omega_22_hz: r.couplings.map_or(nan, |c| c.omega_22.to_hertz().0),
        delta_over_h_hz: tl.map_or(nan, |t| t.delta_over_h().0),
        eta_over_e0: tl.map_or(nan, |t| t.eta),
        delta_over_e0: tl.map_or(nan, |t| t.delta),
        adiabaticity_ratio: m.map_or(nan, |m| m.adiabaticity_ratio),
        tau_m: m.map_or(nan, |m| m.tau_m.0),
        t0: r.t0.0,
        n_e_crit: m.map_or(nan, |m| m.n_e_crit),
        flags: r.flags,
    }
}

/// Evaluates every point independently; rows come back in swept order.
pub fn run_sweep(cfg: &RunConfig, spec: &SweepSpec) -> Result<SweepResult> {
    let solver = SolverConfig {
        expansion: false,
        ..cfg.solver
    };
    let values = spec.values();
    let mut params = Vec::with_capacity(values.len());
    for &v in &values {
        let mut p = cfg.device.clone();
        set_parameter(&mut p, &spec.parameter, v)?;
        params.push(p);
    }
    let rows = values
        .par_iter()
        .zip(params.par_iter())
        .map(|(&v, p)| row_from(v, &feasibility_report(p, &solver)))
        .collect();
    Ok(SweepResult {
        parameter: spec.parameter.clone(),
        rows,
    })
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

impl SweepResult {
    pub fn to_csv(&self, header: &str) -> String {
        let mut out = String::from(header);
        out.push_str(&format!(
            "{},status,zeta_max,zeta_max_engineering,Omega_22_Hz,Delta_over_h_Hz,eta_over_E0,Delta_over_E0,\
             adiabaticity_ratio,tau_m_s,t0_s,N_e_crit,double_well,two_level_valid,delta_gt_kT,high_T_e,high_T_m,\
             single_phonon,adiabatic\n",
            self.parameter
        ));
        for r in &self.rows {
            let nums = [
                r.zeta_max,
                r.zeta_max_engineering,
                r.omega_22_hz,
                r.delta_over_h_hz,
                r.eta_over_e0,
                r.delta_over_e0,
                r.adiabaticity_ratio,
                r.tau_m,
                r.t0,
                r.n_e_crit,
            ];
            let f = r.flags;
            let status = r.status.replace([',', '\n'], ";");
            out.push_str(&fmt_sig(r.value));
            out.push(',');
            out.push_str(&status);
            for x in nums {
                out.push(',');
                out.push_str(&fmt_sig(x));
            }
            for b in [
                f.double_well,
                f.two_level_valid,
                f.delta_gt_kt,
                f.high_t_e,
                f.high_t_m,
                f.single_phonon,
                f.adiabatic,
            ] {
                out.push(',');
                out.push_str(flag(b));
            }
            out.push('\n');
        }
        out
    }
}
