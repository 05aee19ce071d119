//! Deterministic number formatting and file emission.

use serde_json::{Map, Value};
use std::path::{Path, PathBuf};

use crate::error::Result;

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "RFSQUID_QND_OUT";

fn round_sig(x: f64, digits: usize) -> f64 {
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

fn shortest(r: f64) -> String {
    if r == 0.0 {
        return "0".to_string();
    }
    let a = r.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// 12 significant digits, shortest round-trip representation of the rounded value.
pub fn fmt_sig(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    shortest(round_sig(x, 12))
}

/// Rounds every float in a JSON tree to 9 significant digits. Non-finite
/// numbers become the strings "inf", "-inf" or "nan".
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => float_value(x),
            _ => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

fn float_value(x: f64) -> Value {
    if x.is_finite() {
        serde_json::Number::from_f64(round_sig(x, 9))
            .map(Value::Number)
            .unwrap_or(Value::Null)
    } else {
        Value::String(fmt_sig(x))
    }
}

/// Serialises `body` with a leading `_meta` object (tool version + resolved config).
pub fn json_document<T: serde::Serialize>(config_text: &str, body: &T) -> String {
    let mut meta = Map::new();
    meta.insert("tool".into(), Value::String(format!("rfsquid-qnd {}", crate::VERSION)));
    meta.insert("config".into(), Value::String(config_text.to_string()));
    let mut doc = Map::new();
    doc.insert("_meta".into(), Value::Object(meta));
    match round_json(serde_json::to_value(body).expect("report types serialise")) {
        Value::Object(o) => doc.extend(o),
        other => {
            doc.insert("data".into(), other);
        }
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json");
    s.push('\n');
    s
}

/// `#`-comment header for CSV files.
pub fn csv_header(config_text: &str) -> String {
    let mut out = format!("# rfsquid-qnd {}\n", crate::VERSION);
    for line in config_text.lines() {
        out.push_str("# | ");
        out.push_str(line);
        out.push('\n');
    }
    out
}

/// Resolution order: `--out` flag, environment override, config value.
pub fn resolve_out_dir(flag: Option<&Path>, config_dir: &str) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Ok(env) = std::env::var(OUT_DIR_ENV) {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    PathBuf::from(config_dir)
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}
