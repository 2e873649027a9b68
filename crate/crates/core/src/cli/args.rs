use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

use super::config::parse_config_value;
use super::run::run_to_exit_code;

/// Kinetic simulation of a ruler, citizens and a competing group, plus
/// scans of the innovation function.
///
/// Any config key can be overridden with a dotted flag such as
/// `--params.beta=0.2`, `--integration.method=euler` or `--case=I`.
#[derive(Debug, Parser)]
#[command(name = "kinetic-blocking", version)]
struct Args {
    /// JSON config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// ar-scan, simulate, case-study or sweep.
    #[arg(long)]
    mode: Option<String>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
}

/// Sets the value at a dotted key path, creating objects on the way.
/// Numeric segments index into existing arrays.
pub fn apply_override(root: &mut Value, key: &str, value: Value) -> Result<()> {
    let segments: Vec<&str> = key.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(Error::config(key, "empty segment in key path"));
    }
    let mut cur = root;
    for seg in segments {
        if cur.is_null() {
            *cur = Value::Object(Map::new());
        }
        cur = match cur {
            Value::Object(m) => m.entry(seg.to_string()).or_insert(Value::Null),
            Value::Array(a) => {
                let n = a.len();
                match seg.parse::<usize>() {
                    Ok(i) if i < n => &mut a[i],
                    _ => {
                        return Err(Error::config(
                            key,
                            format!("`{seg}` is not an index below {n}"),
                        ))
                    }
                }
            }
            _ => return Err(Error::config(key, format!("cannot descend into `{seg}`"))),
        };
    }
    *cur = value;
    Ok(())
}

fn override_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

const CLAP_FLAGS: [&str; 4] = ["config", "mode", "out", "format"];

/// Splits `--key.path=value` overrides from the arguments clap handles.
fn split_overrides(args: Vec<OsString>) -> (Vec<OsString>, Vec<(String, Value)>) {
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    for a in args {
        if let Some(s) = a.to_str() {
            if let Some((k, v)) = s.strip_prefix("--").and_then(|b| b.split_once('=')) {
                if !CLAP_FLAGS.contains(&k) && !k.is_empty() {
                    overrides.push((k.to_string(), override_value(v)));
                    continue;
                }
            }
        }
        rest.push(a);
    }
    (rest, overrides)
}

fn build(args: Args, overrides: Vec<(String, Value)>) -> Result<Value> {
    let mut doc = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| Error::config("<document>", e.to_string()))?
        }
        None => Value::Object(Map::new()),
    };
    if let Some(m) = args.mode {
        apply_override(&mut doc, "mode", Value::String(m))?;
    }
    if let Some(o) = args.out {
        apply_override(
            &mut doc,
            "output.path",
            Value::String(o.to_string_lossy().into_owned()),
        )?;
    }
    if let Some(f) = args.format {
        apply_override(&mut doc, "output.format", Value::String(f))?;
    }
    for (k, v) in overrides {
        apply_override(&mut doc, &k, v)?;
    }
    Ok(doc)
}

/// Entry point of the binary; returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let (rest, overrides) = split_overrides(argv.into_iter().map(Into::into).collect());
    let args = match Args::try_parse_from(rest) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let config = build(args, overrides).and_then(parse_config_value);
    match config {
        Ok(cfg) => run_to_exit_code(&cfg),
        Err(e) => {
            eprintln!("error: {e}");
            super::exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn dotted_overrides() {
        let mut v = json!({"params": {"eta": [1, 1, 1]}});
        apply_override(&mut v, "params.beta", json!(0.2)).unwrap();
        apply_override(&mut v, "params.eta.1", json!(0.5)).unwrap();
        apply_override(&mut v, "output.format", json!("json")).unwrap();
        assert_eq!(
            v,
            json!({"params": {"eta": [1, 0.5, 1], "beta": 0.2}, "output": {"format": "json"}})
        );
        assert!(apply_override(&mut v, "params.eta.7", json!(1)).is_err());
        assert!(apply_override(&mut v, "params..x", json!(1)).is_err());
        assert!(apply_override(&mut v, "params.beta.x", json!(1)).is_err());
    }

    #[test]
    fn split_leaves_clap_flags() {
        let argv: Vec<OsString> = [
            "bin",
            "--mode",
            "simulate",
            "--params.beta=0.2",
            "--integration.method=euler",
            "--out=x.csv",
            "--case=I",
        ]
        .iter()
        .map(Into::into)
        .collect();
        let (rest, ov) = split_overrides(argv);
        assert_eq!(rest.len(), 4);
        assert_eq!(ov[2], ("case".to_string(), json!("I")));
        assert_eq!(ov[0], ("params.beta".to_string(), json!(0.2)));
        assert_eq!(ov[1], ("integration.method".to_string(), json!("euler")));
    }
}
