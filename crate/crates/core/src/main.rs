use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use rfsquid_qnd::config::RunConfig;
use rfsquid_qnd::constants::PHI0;
use rfsquid_qnd::dynamics::classical::{classical_trajectory, relax, ClassicalState};
use rfsquid_qnd::dynamics::hamiltonian::RwaHamiltonian;
use rfsquid_qnd::dynamics::lindblad::{detuning_grid, lindblad_steady_state};
use rfsquid_qnd::dynamics::readout::{drive_for_photon_number, estimate_tau_m_numeric, TauEstimate};
use rfsquid_qnd::error::{Error, Result};
use rfsquid_qnd::output::{csv_header, fmt_sig, json_document, resolve_out_dir, write_file};
use rfsquid_qnd::rwa::{feasibility_report, measurement_time, symmetric_spectrum, SolverConfig};
use rfsquid_qnd::solver::solve_spectrum;
use rfsquid_qnd::sweep::run_sweep;
use rfsquid_qnd::validate::run_validation;
use rfsquid_qnd::derive_dimensionless;

#[derive(Parser)]
#[command(name = "rfsquid-qnd", version, about = "RF-SQUID mediated QND readout of nanomechanical Fock states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Config file; `paper_example` or no flag selects the bundled worked example.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the environment and the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Suppress progress messages.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Full feasibility report (report.json).
    Report,
    /// Sweep one parameter (sweep.csv).
    Sweep,
    /// Eigenvalues versus phi0 and symmetric-point wavefunctions.
    Spectrum,
    /// Steady-state LC response per mechanical Fock number.
    Dispersive,
    /// Classical equations of motion (trajectory.csv).
    Trajectory,
    /// Invariant and oracle checks.
    Validate,
}

struct Ctx {
    cfg: RunConfig,
    /// Resolved config, embedded in every emitted file.
    config_text: String,
    /// `#`-comment form of the same for CSV files.
    header: String,
    out: PathBuf,
    quiet: bool,
}

impl Ctx {
    fn say(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        let path = write_file(&self.out, name, contents)?;
        self.say(&format!("wrote {}", path.display()));
        Ok(())
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        None => Ok(RunConfig::paper_example()),
        Some(p) if p == Path::new("paper_example") && !p.exists() => Ok(RunConfig::paper_example()),
        Some(p) => RunConfig::load(p),
    }
}

fn cmd_report(ctx: &Ctx) -> Result<()> {
    ctx.say("running feasibility pipeline");
    let r = feasibility_report(&ctx.cfg.device, &ctx.cfg.solver);
    ctx.write("report.json", &json_document(&ctx.config_text, &r))?;
    for w in &r.warnings {
        ctx.say(&format!("warning: {w}"));
    }
    if let Some(m) = r.metrics {
        ctx.say(&format!(
            "zeta_max = {:.4} (engineering form {:.4}), adiabaticity ratio = {:.4}",
            m.zeta_max, m.zeta_max_engineering, m.adiabaticity_ratio
        ));
    }
    for e in r.errors.iter().skip(1) {
        eprintln!("error: {}: {}", e.stage, e.message);
    }
    match r.errors.first() {
        None => Ok(()),
        Some(e) => Err(e.to_error()),
    }
}

fn cmd_sweep(ctx: &Ctx) -> Result<()> {
    let spec = ctx
        .cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::config(None, "the sweep command needs a [sweep] section"))?;
    ctx.say(&format!("sweeping {} over {} points", spec.parameter, spec.points));
    let r = run_sweep(&ctx.cfg, spec)?;
    ctx.write("sweep.csv", &r.to_csv(&ctx.header))
}

fn cmd_spectrum(ctx: &Ctx) -> Result<()> {
    let c = derive_dimensionless(&ctx.cfg.device)?;
    let sym = symmetric_spectrum(&c, &ctx.cfg.solver)?;
    let n_levels = sym.levels.len();
    let phi0_max = 0.05;
    let points = 11;
    let phis: Vec<f64> = (0..points).map(|i| phi0_max * i as f64 / (points - 1) as f64).collect();
    let rows = {
        use rayon::prelude::*;
        phis.par_iter()
            .map(|&p| solve_spectrum(&sym.spec.with_phi0(p), &sym.grid, n_levels))
            .collect::<Result<Vec<_>>>()?
    };
    let mut csv = ctx.header.clone();
    csv.push_str("phi0");
    for i in 0..n_levels {
        csv.push_str(&format!(",eps_{i}"));
    }
    csv.push('\n');
    for (p, s) in phis.iter().zip(&rows) {
        csv.push_str(&fmt_sig(*p));
        for i in 0..n_levels {
            csv.push(',');
            csv.push_str(&fmt_sig(s.eps(i)));
        }
        csv.push('\n');
    }
    ctx.write("spectrum.csv", &csv)?;
    ctx.write("wavefunctions.csv", &sym.wavefunction_csv(&ctx.header))
}

#[derive(Serialize)]
struct DispersiveSummary {
    drive_photons: f64,
    drive_strength_rad_s: f64,
    #[serde(rename = "Omega_22_rad_s")]
    omega_22: f64,
    #[serde(rename = "Omega_04_rad_s")]
    omega_04: f64,
    peaks_rad_s: Vec<f64>,
    peak_shift_rad_s: Vec<f64>,
    tau_m_numeric: Option<TauEstimate>,
    tau_m_analytic_s: f64,
}

fn cmd_dispersive(ctx: &Ctx) -> Result<()> {
    let p = &ctx.cfg.device;
    let d = &ctx.cfg.dynamics;
    let solver = SolverConfig {
        expansion: false,
        ..ctx.cfg.solver
    };
    let r = feasibility_report(p, &solver);
    if let Some(e) = r.errors.first() {
        return Err(e.to_error());
    }
    let (c, m) = match (r.couplings, r.metrics) {
        (Some(c), Some(m)) => (c, m),
        _ => return Err(Error::InvalidArgument("no two-level model for this device (single well)".into())),
    };
    let photons = d.drive_fraction * m.n_e_crit;
    let eps = drive_for_photon_number(photons, p.gamma_e);
    let w22 = c.omega_22.0;
    let lo = d.detuning_min.unwrap_or(-2.0 * p.gamma_e);
    let hi = d.detuning_max.unwrap_or(w22 * d.n_m_max as f64 + 2.0 * p.gamma_e + 2.0 * c.omega_04.0 * photons);
    let grid = detuning_grid(lo, hi, d.detuning_points);
    ctx.say(&format!("solving {} steady states", grid.len() * (d.n_m_max + 1)));
    let h = RwaHamiltonian::new(c.omega_04.0, w22, d.n_m_max, d.n_e_max, 0.0, eps)?;
    let resp = lindblad_steady_state(&h, p.gamma_e, d.n_thermal, &grid)?;

    let mut csv = ctx.header.clone();
    csv.push_str("detuning_Hz,n_m,photon_number,re_amp,im_amp\n");
    for curve in &resp.curves {
        for i in 0..curve.detuning.len() {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_sig(curve.detuning[i] / (2.0 * std::f64::consts::PI)),
                curve.n_m,
                fmt_sig(curve.photon_number[i]),
                fmt_sig(curve.amplitude[i].re),
                fmt_sig(curve.amplitude[i].im)
            ));
        }
    }
    ctx.write("dispersive.csv", &csv)?;

    let tau = estimate_tau_m_numeric(&resp.curves[0], &resp.curves[1], p.gamma_e, p.temperature, p.omega_e());
    if let Some(w) = &tau.regime_warning {
        ctx.say(&format!("warning: {w}"));
    }
    let analytic = if photons > 0.0 {
        measurement_time(&c, p, photons, &mut Vec::new())?.tau_m.0
    } else {
        f64::INFINITY
    };
    let summary = DispersiveSummary {
        drive_photons: photons,
        drive_strength_rad_s: eps,
        omega_22: w22,
        omega_04: c.omega_04.0,
        peaks_rad_s: resp.peaks(),
        peak_shift_rad_s: (0..d.n_m_max).map(|n| resp.peak_shift(n)).collect(),
        tau_m_numeric: Some(tau),
        tau_m_analytic_s: analytic,
    };
    ctx.write("dispersive.json", &json_document(&ctx.config_text, &summary))
}

fn cmd_trajectory(ctx: &Ctx) -> Result<()> {
    let p = &ctx.cfg.device;
    let d = &ctx.cfg.dynamics;
    let f_p = p.plasma_frequency();
    let q = relax(p, d.well)?;
    let mut s = ClassicalState::at_rest(q);
    s.flux += d.initial_dphi;
    s.x += d.initial_dx;
    let dt = d.dt.unwrap_or(1.0 / (400.0 * f_p));
    let duration = d.duration.unwrap_or(100.0 / f_p);
    ctx.say(&format!(
        "integrating {:.3e} s with dt = {:.3e} s (initial dPhi = {:.3e} Phi0)",
        duration,
        dt,
        d.initial_dphi / PHI0
    ));
    let (amp, wd) = (p.drive_current, p.drive_frequency);
    let drive = move |t: f64| amp * (wd * t).cos();
    let drive_ref: Option<&dyn Fn(f64) -> f64> = if amp != 0.0 { Some(&drive) } else { None };
    let tr = classical_trajectory(p, s, drive_ref, duration, dt, d.record_every)?;
    ctx.write("trajectory.csv", &tr.to_csv(&ctx.header))
}

fn cmd_validate(ctx: &Ctx) -> Result<()> {
    let r = run_validation(&ctx.cfg);
    let table = r.to_table();
    if !ctx.quiet {
        print!("{table}");
    }
    ctx.write("validate.txt", &format!("{}{table}", ctx.header))?;
    if r.all_passed() {
        Ok(())
    } else {
        Err(Error::Validation(format!("{} of {} checks failed", r.failures(), r.checks.len())))
    }
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    let cfg = load_config(cli.config.as_deref())?;
    let out = resolve_out_dir(cli.out.as_deref(), &cfg.output_dir);
    let config_text = cfg.render();
    let ctx = Ctx {
        header: csv_header(&config_text),
        config_text,
        cfg,
        out,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Report => cmd_report(&ctx),
        Command::Sweep => cmd_sweep(&ctx),
        Command::Spectrum => cmd_spectrum(&ctx),
        Command::Dispersive => cmd_dispersive(&ctx),
        Command::Trajectory => cmd_trajectory(&ctx),
        Command::Validate => cmd_validate(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.class().exit_code() as u8)
        }
    }
}
