//! Run configuration: an INI-style file with explicit units.
//!
//! ```text
//! [device]
//! m       = 1e-19 kg
//! omega_m = 0.5   GHz     # angular rates accept rad/s or Hz (x 2π)
//! Phi_e   = 0.5   Phi0
//! ```
//!
//! Sections: `[device]`, `[solver]`, `[sweep]`, `[dynamics]`, `[output]`.
//! Comments start with `#` or `;`. Unknown keys, duplicate keys, missing or
//! wrong units are errors carrying the offending line number.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write;

use crate::constants::PHI0;
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::output::fmt_sig;
use crate::rwa::SolverConfig;

/// The worked-example configuration shipped with the tool.
pub const PAPER_EXAMPLE: &str = include_str!("../configs/paper_example.conf");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Mass,
    Rate,
    Inductance,
    Capacitance,
    Current,
    Field,
    Length,
    Flux,
    Temperature,
    Time,
    FieldLength,
    Number,
    Integer,
    Bool,
    Text,
}

impl Kind {
    fn base_units(self) -> &'static [(&'static str, f64)] {
        match self {
            Kind::Mass => &[("g", 1e-3)],
            Kind::Rate => &[("rad/s", 1.0), ("Hz", 2.0 * PI)],
            Kind::Inductance => &[("H", 1.0)],
            Kind::Capacitance => &[("F", 1.0)],
            Kind::Current => &[("A", 1.0)],
            Kind::Field => &[("T", 1.0)],
            Kind::Length => &[("m", 1.0)],
            Kind::Flux => &[("Wb", 1.0), ("Phi0", PHI0)],
            Kind::Temperature => &[("K", 1.0)],
            Kind::Time => &[("s", 1.0)],
            Kind::FieldLength => &[("T*m", 1.0), ("T*um", 1e-6)],
            _ => &[],
        }
    }

    fn si_unit(self) -> &'static str {
        match self {
            Kind::Mass => "kg",
            Kind::Rate => "rad/s",
            Kind::Inductance => "H",
            Kind::Capacitance => "F",
            Kind::Current => "A",
            Kind::Field => "T",
            Kind::Length => "m",
            Kind::Flux => "Wb",
            Kind::Temperature => "K",
            Kind::Time => "s",
            Kind::FieldLength => "T*m",
            _ => "",
        }
    }

    fn dimensional(self) -> bool {
        !self.base_units().is_empty()
    }
}

const PREFIXES: &[(&str, f64)] = &[
    ("a", 1e-18),
    ("f", 1e-15),
    ("p", 1e-12),
    ("n", 1e-9),
    ("u", 1e-6),
    ("µ", 1e-6),
    ("m", 1e-3),
    ("c", 1e-2),
    ("k", 1e3),
    ("M", 1e6),
    ("G", 1e9),
    ("T", 1e12),
];

fn unit_factor(kind: Kind, unit: &str) -> Option<f64> {
    for &(base, f) in kind.base_units() {
        if unit == base {
            return Some(f);
        }
    }
    for &(base, f) in kind.base_units() {
        if base == "Phi0" || base.contains('*') {
            continue;
        }
        if let Some(prefix) = unit.strip_suffix(base) {
            if let Some(&(_, p)) = PREFIXES.iter().find(|(s, _)| *s == prefix) {
                return Some(p * f);
            }
        }
    }
    None
}

const DEVICE_KEYS: &[(&str, Kind)] = &[
    ("m", Kind::Mass),
    ("omega_m", Kind::Rate),
    ("gamma_m", Kind::Rate),
    ("L", Kind::Inductance),
    ("omega_e", Kind::Rate),
    ("C", Kind::Capacitance),
    ("gamma_e", Kind::Rate),
    ("Lambda", Kind::Inductance),
    ("C_J", Kind::Capacitance),
    ("I_c", Kind::Current),
    ("M", Kind::Inductance),
    ("K", Kind::Number),
    ("B", Kind::Field),
    ("l", Kind::Length),
    ("Phi_e", Kind::Flux),
    ("T", Kind::Temperature),
    ("I_in_amp", Kind::Current),
    ("omega_d", Kind::Rate),
];

const SOLVER_KEYS: &[(&str, Kind)] = &[
    ("initial_half_width", Kind::Number),
    ("initial_points", Kind::Integer),
    ("max_doublings", Kind::Integer),
    ("tolerance", Kind::Number),
    ("fixed_half_width", Kind::Number),
    ("fixed_points", Kind::Integer),
    ("eta_samples", Kind::Integer),
    ("margin_ratio", Kind::Number),
    ("expansion", Kind::Bool),
];

const SWEEP_KEYS: &[(&str, Kind)] = &[
    ("parameter", Kind::Text),
    ("start", Kind::Text),
    ("stop", Kind::Text),
    ("points", Kind::Integer),
    ("scale", Kind::Text),
];

const DYNAMICS_KEYS: &[(&str, Kind)] = &[
    ("n_m_max", Kind::Integer),
    ("n_e_max", Kind::Integer),
    ("detuning_min", Kind::Rate),
    ("detuning_max", Kind::Rate),
    ("detuning_points", Kind::Integer),
    ("drive_fraction", Kind::Number),
    ("n_thermal", Kind::Number),
    ("duration", Kind::Time),
    ("dt", Kind::Time),
    ("record_every", Kind::Integer),
    ("initial_dPhi", Kind::Flux),
    ("initial_dx", Kind::Length),
    ("well", Kind::Integer),
];

const OUTPUT_KEYS: &[(&str, Kind)] = &[("dir", Kind::Text)];

/// Parameters that a sweep may vary: every device field plus the product Bl.
pub const SWEEPABLE: &[&str] = &[
    "m", "omega_m", "gamma_m", "L", "C", "gamma_e", "Lambda", "C_J", "I_c", "M", "B", "l", "Phi_e", "T", "I_in_amp", "omega_d", "Bl",
];

fn sweep_kind(name: &str) -> Option<Kind> {
    if name == "Bl" {
        return Some(Kind::FieldLength);
    }
    DEVICE_KEYS
        .iter()
        .find(|(k, _)| *k == name && *k != "omega_e" && *k != "K")
        .map(|&(_, kind)| kind)
}

/// Sets a sweepable parameter (SI value); `Bl` rescales B at fixed l.
pub fn set_parameter(p: &mut DeviceParams, name: &str, v: f64) -> Result<()> {
    match name {
        "m" => p.mass = v,
        "omega_m" => p.omega_m = v,
        "gamma_m" => p.gamma_m = v,
        "L" => p.inductance = v,
        "C" => p.capacitance = v,
        "gamma_e" => p.gamma_e = v,
        "Lambda" => p.loop_inductance = v,
        "C_J" => p.junction_capacitance = v,
        "I_c" => p.critical_current = v,
        "M" => p.mutual_inductance = v,
        "B" => p.field = v,
        "l" => p.beam_length = v,
        "Phi_e" => p.external_flux = v,
        "T" => p.temperature = v,
        "I_in_amp" => p.drive_current = v,
        "omega_d" => p.drive_frequency = v,
        "Bl" => p.field = v / p.beam_length,
        _ => return Err(Error::config(None, format!("unknown sweep parameter `{name}`"))),
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: String,
    /// SI.
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: Scale,
}

impl SweepSpec {
    /// Swept values in order; a single point yields `start`.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.start];
        }
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => self.start + f * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + f * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsConfig {
    pub n_m_max: usize,
    pub n_e_max: usize,
    /// rad/s; `None` picks a window around the expected peaks.
    pub detuning_min: Option<f64>,
    pub detuning_max: Option<f64>,
    pub detuning_points: usize,
    /// On-resonance photon number as a fraction of ⟨N_e⟩_c.
    pub drive_fraction: f64,
    pub n_thermal: f64,
    /// s; `None` means 100 plasma periods.
    pub duration: Option<f64>,
    /// s; `None` means 1/(400 f_p).
    pub dt: Option<f64>,
    pub record_every: usize,
    /// Initial SQUID flux displacement from the relaxed well (Wb).
    pub initial_dphi: f64,
    pub initial_dx: f64,
    pub well: i32,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            n_m_max: 2,
            n_e_max: 16,
            detuning_min: None,
            detuning_max: None,
            detuning_points: 121,
            drive_fraction: 0.1,
            n_thermal: 0.0,
            duration: None,
            dt: None,
            record_every: 40,
            initial_dphi: 1e-3 * PHI0,
            initial_dx: 0.0,
            well: -1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub device: DeviceParams,
    pub solver: SolverConfig,
    pub sweep: Option<SweepSpec>,
    pub dynamics: DynamicsConfig,
    pub output_dir: String,
}

struct Entry {
    line: usize,
    value: String,
    unit: String,
}

type Sections = BTreeMap<String, BTreeMap<String, Entry>>;

fn keys_of(section: &str) -> Option<&'static [(&'static str, Kind)]> {
    match section {
        "device" => Some(DEVICE_KEYS),
        "solver" => Some(SOLVER_KEYS),
        "sweep" => Some(SWEEP_KEYS),
        "dynamics" => Some(DYNAMICS_KEYS),
        "output" => Some(OUTPUT_KEYS),
        _ => None,
    }
}

fn lex(text: &str) -> Result<Sections> {
    let mut sections: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::config(Some(n), "unterminated section header"))?
                .trim();
            if keys_of(name).is_none() {
                return Err(Error::config(Some(n), format!("unknown section [{name}]")));
            }
            if sections.contains_key(name) {
                return Err(Error::config(Some(n), format!("duplicate section [{name}]")));
            }
            sections.insert(name.to_string(), BTreeMap::new());
            current = Some(name.to_string());
            continue;
        }
        let section = current
            .as_ref()
            .ok_or_else(|| Error::config(Some(n), "key outside of any section"))?;
        let (key, rest) = line
            .split_once('=')
            .ok_or_else(|| Error::config(Some(n), format!("expected `key = value [unit]`, got `{line}`")))?;
        let key = key.trim();
        let kind = keys_of(section)
            .unwrap()
            .iter()
            .find(|(k, _)| *k == key)
            .map(|&(_, kind)| kind)
            .ok_or_else(|| Error::config(Some(n), format!("unknown key `{key}` in [{section}]")))?;
        let rest = rest.trim();
        let (value, unit) = if kind == Kind::Text && section != "sweep" {
            (rest.to_string(), String::new())
        } else {
            let mut parts = rest.splitn(2, char::is_whitespace);
            let v = parts.next().unwrap_or("").to_string();
            (v, parts.next().unwrap_or("").trim().to_string())
        };
        if value.is_empty() {
            return Err(Error::config(Some(n), format!("missing value for `{key}`")));
        }
        let entries = sections.get_mut(section).unwrap();
        if entries.contains_key(key) {
            return Err(Error::config(Some(n), format!("duplicate key `{key}` in [{section}]")));
        }
        entries.insert(key.to_string(), Entry { line: n, value, unit });
    }
    Ok(sections)
}

fn quantity(e: &Entry, key: &str, kind: Kind) -> Result<f64> {
    let v: f64 = e
        .value
        .parse()
        .map_err(|_| Error::config(Some(e.line), format!("`{key}`: cannot parse `{}` as a number", e.value)))?;
    if !v.is_finite() {
        return Err(Error::config(Some(e.line), format!("`{key}` must be finite")));
    }
    if !kind.dimensional() {
        if !e.unit.is_empty() {
            return Err(Error::config(Some(e.line), format!("`{key}` is dimensionless, unexpected unit `{}`", e.unit)));
        }
        return Ok(v);
    }
    if e.unit.is_empty() {
        return Err(Error::config(Some(e.line), format!("`{key}` needs a unit ({})", kind.si_unit())));
    }
    unit_factor(kind, &e.unit)
        .map(|f| v * f)
        .ok_or_else(|| Error::config(Some(e.line), format!("`{key}`: unit `{}` is not a {} unit", e.unit, kind.si_unit())))
}

fn integer(e: &Entry, key: &str) -> Result<i64> {
    if !e.unit.is_empty() {
        return Err(Error::config(Some(e.line), format!("`{key}` takes no unit")));
    }
    e.value
        .parse()
        .map_err(|_| Error::config(Some(e.line), format!("`{key}`: expected an integer, got `{}`", e.value)))
}

fn count(e: &Entry, key: &str) -> Result<usize> {
    let v = integer(e, key)?;
    usize::try_from(v).map_err(|_| Error::config(Some(e.line), format!("`{key}` must be non-negative")))
}

struct Section<'a> {
    name: &'static str,
    entries: Option<&'a BTreeMap<String, Entry>>,
}

impl<'a> Section<'a> {
    fn get(&self, key: &str) -> Option<&'a Entry> {
        self.entries.and_then(|m| m.get(key))
    }

    fn kind(&self, key: &str) -> Kind {
        keys_of(self.name).unwrap().iter().find(|(k, _)| *k == key).unwrap().1
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|e| quantity(e, key, self.kind(key))).transpose()
    }

    fn f64_req(&self, key: &str) -> Result<f64> {
        self.f64_opt(key)?
            .ok_or_else(|| Error::config(None, format!("missing required key `{key}` in [{}]", self.name)))
    }

    fn usize_opt(&self, key: &str) -> Result<Option<usize>> {
        self.get(key).map(|e| count(e, key)).transpose()
    }
}

fn parse_device(s: &Section) -> Result<DeviceParams> {
    let c = s.f64_req("C")?;
    let inductance = match (s.f64_opt("L")?, s.f64_opt("omega_e")?) {
        (Some(l), None) => l,
        (None, Some(w)) => 1.0 / (w * w * c),
        (Some(_), Some(_)) => {
            return Err(Error::config(s.get("omega_e").map(|e| e.line), "give either `L` or `omega_e`, not both"))
        }
        (None, None) => return Err(Error::config(None, "missing required key `L` (or `omega_e`) in [device]")),
    };
    let lambda = s.f64_req("Lambda")?;
    let mutual = match (s.f64_opt("M")?, s.f64_opt("K")?) {
        (Some(m), None) => m,
        (None, Some(k)) => k * (lambda * inductance).sqrt(),
        (Some(_), Some(_)) => return Err(Error::config(s.get("K").map(|e| e.line), "give either `M` or `K`, not both")),
        (None, None) => return Err(Error::config(None, "missing required key `M` (or `K`) in [device]")),
    };
    let p = DeviceParams {
        mass: s.f64_req("m")?,
        omega_m: s.f64_req("omega_m")?,
        gamma_m: s.f64_req("gamma_m")?,
        inductance,
        capacitance: c,
        gamma_e: s.f64_req("gamma_e")?,
        loop_inductance: lambda,
        junction_capacitance: s.f64_req("C_J")?,
        critical_current: s.f64_req("I_c")?,
        mutual_inductance: mutual,
        field: s.f64_req("B")?,
        beam_length: s.f64_req("l")?,
        external_flux: s.f64_req("Phi_e")?,
        temperature: s.f64_req("T")?,
        drive_current: s.f64_opt("I_in_amp")?.unwrap_or(0.0),
        drive_frequency: s.f64_opt("omega_d")?.unwrap_or(1.0 / (inductance * c).sqrt()),
    };
    p.validate().map_err(|e| Error::config(None, e.to_string()))?;
    Ok(p)
}

fn parse_solver(s: &Section) -> Result<SolverConfig> {
    let mut cfg = SolverConfig::default();
    if let Some(v) = s.f64_opt("initial_half_width")? {
        cfg.policy.initial_half_width = v;
    }
    if let Some(v) = s.usize_opt("initial_points")? {
        cfg.policy.initial_points = v;
    }
    if let Some(v) = s.usize_opt("max_doublings")? {
        cfg.policy.max_doublings = v;
    }
    if let Some(v) = s.f64_opt("tolerance")? {
        if !(v > 0.0) {
            return Err(Error::config(s.get("tolerance").map(|e| e.line), "`tolerance` must be positive"));
        }
        cfg.policy.tolerance = v;
    }
    if let Some(v) = s.usize_opt("eta_samples")? {
        cfg.eta.samples = v;
    }
    if let Some(v) = s.f64_opt("margin_ratio")? {
        cfg.eta.margin_ratio = v;
    }
    if let Some(e) = s.get("expansion") {
        cfg.expansion = match e.value.as_str() {
            "true" => true,
            "false" => false,
            other => return Err(Error::config(Some(e.line), format!("`expansion`: expected true or false, got `{other}`"))),
        };
    }
    match (s.f64_opt("fixed_half_width")?, s.usize_opt("fixed_points")?) {
        (Some(w), Some(n)) => cfg.grid_override = Some((w, n)),
        (None, None) => {}
        _ => return Err(Error::config(None, "`fixed_half_width` and `fixed_points` must be given together")),
    }
    Ok(cfg)
}

fn parse_sweep(s: &Section) -> Result<Option<SweepSpec>> {
    let Some(entries) = s.entries else {
        return Ok(None);
    };
    let par = entries
        .get("parameter")
        .ok_or_else(|| Error::config(None, "missing required key `parameter` in [sweep]"))?;
    if !par.unit.is_empty() {
        return Err(Error::config(Some(par.line), "`parameter` takes a single name"));
    }
    let kind = sweep_kind(&par.value).ok_or_else(|| {
        Error::config(
            Some(par.line),
            format!("`{}` is not a sweepable parameter (one of {})", par.value, SWEEPABLE.join(", ")),
        )
    })?;
    let bound = |key: &str| -> Result<(f64, usize)> {
        let e = entries
            .get(key)
            .ok_or_else(|| Error::config(None, format!("missing required key `{key}` in [sweep]")))?;
        Ok((quantity(e, key, kind)?, e.line))
    };
    let (start, _) = bound("start")?;
    let (stop, stop_line) = bound("stop")?;
    let points = s.usize_opt("points")?.unwrap_or(1);
    if points == 0 {
        return Err(Error::config(s.get("points").map(|e| e.line), "`points` must be at least 1"));
    }
    let scale = match s.get("scale") {
        None => Scale::Linear,
        Some(e) => match (e.value.as_str(), e.unit.is_empty()) {
            ("linear", true) => Scale::Linear,
            ("log", true) => Scale::Log,
            _ => return Err(Error::config(Some(e.line), "`scale` must be `linear` or `log`")),
        },
    };
    if stop < start {
        return Err(Error::config(Some(stop_line), "sweep range must be ordered (start <= stop)"));
    }
    if scale == Scale::Log && !(start > 0.0) {
        return Err(Error::config(Some(stop_line), "log sweep needs a positive range"));
    }
    Ok(Some(SweepSpec {
        parameter: par.value.clone(),
        start,
        stop,
        points,
        scale,
    }))
}

fn parse_dynamics(s: &Section) -> Result<DynamicsConfig> {
    let mut d = DynamicsConfig::default();
    if let Some(v) = s.usize_opt("n_m_max")? {
        d.n_m_max = v;
    }
    if let Some(v) = s.usize_opt("n_e_max")? {
        d.n_e_max = v;
    }
    d.detuning_min = s.f64_opt("detuning_min")?;
    d.detuning_max = s.f64_opt("detuning_max")?;
    if let (Some(a), Some(b)) = (d.detuning_min, d.detuning_max) {
        if !(a < b) {
            return Err(Error::config(s.get("detuning_max").map(|e| e.line), "detuning range must be ordered"));
        }
    }
    if let Some(v) = s.usize_opt("detuning_points")? {
        d.detuning_points = v;
    }
    if let Some(v) = s.f64_opt("drive_fraction")? {
        d.drive_fraction = v;
    }
    if let Some(v) = s.f64_opt("n_thermal")? {
        d.n_thermal = v;
    }
    d.duration = s.f64_opt("duration")?;
    d.dt = s.f64_opt("dt")?;
    if let Some(v) = s.usize_opt("record_every")? {
        d.record_every = v.max(1);
    }
    if let Some(v) = s.f64_opt("initial_dPhi")? {
        d.initial_dphi = v;
    }
    if let Some(v) = s.f64_opt("initial_dx")? {
        d.initial_dx = v;
    }
    if let Some(e) = s.get("well") {
        d.well = match integer(e, "well")? {
            -1 => -1,
            1 => 1,
            _ => return Err(Error::config(Some(e.line), "`well` must be -1 or 1")),
        };
    }
    Ok(d)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let sections = lex(text)?;
        let section = |name: &'static str| Section {
            name,
            entries: sections.get(name),
        };
        for (name, entries) in &sections {
            for (key, e) in entries {
                match keys_of(name).unwrap().iter().find(|(k, _)| k == key).unwrap().1 {
                    Kind::Integer => {
                        integer(e, key)?;
                    }
                    Kind::Bool | Kind::Text => {}
                    kind => {
                        quantity(e, key, kind)?;
                    }
                }
            }
        }
        if !sections.contains_key("device") {
            return Err(Error::config(None, "missing [device] section"));
        }
        Ok(RunConfig {
            device: parse_device(&section("device"))?,
            solver: parse_solver(&section("solver"))?,
            sweep: parse_sweep(&section("sweep"))?,
            dynamics: parse_dynamics(&section("dynamics"))?,
            output_dir: section("output")
                .get("dir")
                .map(|e| e.value.clone())
                .unwrap_or_else(|| "out".to_string()),
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(None, format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn paper_example() -> Self {
        Self::parse(PAPER_EXAMPLE).expect("bundled config parses")
    }

    /// Canonical SI rendering of every resolved value except the output
    /// directory, used as the header of emitted files.
    pub fn render(&self) -> String {
        let p = &self.device;
        let mut s = String::from("[device]\n");
        let dev = [
            ("m", p.mass, "kg"),
            ("omega_m", p.omega_m, "rad/s"),
            ("gamma_m", p.gamma_m, "rad/s"),
            ("L", p.inductance, "H"),
            ("C", p.capacitance, "F"),
            ("gamma_e", p.gamma_e, "rad/s"),
            ("Lambda", p.loop_inductance, "H"),
            ("C_J", p.junction_capacitance, "F"),
            ("I_c", p.critical_current, "A"),
            ("M", p.mutual_inductance, "H"),
            ("B", p.field, "T"),
            ("l", p.beam_length, "m"),
            ("Phi_e", p.external_flux, "Wb"),
            ("T", p.temperature, "K"),
            ("I_in_amp", p.drive_current, "A"),
            ("omega_d", p.drive_frequency, "rad/s"),
        ];
        for (k, v, u) in dev {
            let _ = writeln!(s, "{k} = {} {u}", fmt_sig(v));
        }
        let c = &self.solver;
        s.push_str("[solver]\n");
        let _ = writeln!(s, "initial_half_width = {}", fmt_sig(c.policy.initial_half_width));
        let _ = writeln!(s, "initial_points = {}", c.policy.initial_points);
        let _ = writeln!(s, "max_doublings = {}", c.policy.max_doublings);
        let _ = writeln!(s, "tolerance = {}", fmt_sig(c.policy.tolerance));
        if let Some((w, n)) = c.grid_override {
            let _ = writeln!(s, "fixed_half_width = {}", fmt_sig(w));
            let _ = writeln!(s, "fixed_points = {n}");
        }
        let _ = writeln!(s, "eta_samples = {}", c.eta.samples);
        let _ = writeln!(s, "margin_ratio = {}", fmt_sig(c.eta.margin_ratio));
        let _ = writeln!(s, "expansion = {}", c.expansion);
        if let Some(sw) = &self.sweep {
            let unit = sweep_kind(&sw.parameter).map(Kind::si_unit).unwrap_or("");
            s.push_str("[sweep]\n");
            let _ = writeln!(s, "parameter = {}", sw.parameter);
            let _ = writeln!(s, "start = {} {unit}", fmt_sig(sw.start));
            let _ = writeln!(s, "stop = {} {unit}", fmt_sig(sw.stop));
            let _ = writeln!(s, "points = {}", sw.points);
            let _ = writeln!(s, "scale = {}", if sw.scale == Scale::Log { "log" } else { "linear" });
        }
        let d = &self.dynamics;
        s.push_str("[dynamics]\n");
        let _ = writeln!(s, "n_m_max = {}", d.n_m_max);
        let _ = writeln!(s, "n_e_max = {}", d.n_e_max);
        if let Some(v) = d.detuning_min {
            let _ = writeln!(s, "detuning_min = {} rad/s", fmt_sig(v));
        }
        if let Some(v) = d.detuning_max {
            let _ = writeln!(s, "detuning_max = {} rad/s", fmt_sig(v));
        }
        let _ = writeln!(s, "detuning_points = {}", d.detuning_points);
        let _ = writeln!(s, "drive_fraction = {}", fmt_sig(d.drive_fraction));
        let _ = writeln!(s, "n_thermal = {}", fmt_sig(d.n_thermal));
        if let Some(v) = d.duration {
            let _ = writeln!(s, "duration = {} s", fmt_sig(v));
        }
        if let Some(v) = d.dt {
            let _ = writeln!(s, "dt = {} s", fmt_sig(v));
        }
        let _ = writeln!(s, "record_every = {}", d.record_every);
        let _ = writeln!(s, "initial_dPhi = {} Wb", fmt_sig(d.initial_dphi));
        let _ = writeln!(s, "initial_dx = {} m", fmt_sig(d.initial_dx));
        let _ = writeln!(s, "well = {}", d.well);
        s
    }
}
