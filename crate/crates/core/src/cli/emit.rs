use std::io::{self, Write};

use serde::Serialize;
use serde_json::{json, Value};

use crate::ar::{MuInterval, Raster};
use crate::integrator::Trajectory;
use crate::scenarios::{ratio_f, ratio_g};

pub const TRAJECTORY_COLUMNS: [&str; 9] = [
    "t", "E1_u", "E1_nu", "E2_u", "E2_nu", "E3_u", "E3_nu", "F", "G",
];

const SIG_DIGITS: usize = 12;

/// Rounds to 12 significant digits. Non-finite values pass through.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Shortest decimal text of `x` rounded to 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        "0".to_string()
    } else if !r.is_finite() || (1e-5..1e16).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn json_num(x: f64) -> Value {
    serde_json::Number::from_f64(round_sig(x) + 0.0).map_or(Value::Null, Value::Number)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    /// `[E1_u, E1_nu, E2_u, E2_nu, E3_u, E3_nu]`
    pub means: [f64; 6],
    /// `None` when the competing group's power is too small for a ratio.
    pub f: Option<f64>,
    pub g: Option<f64>,
}

pub fn trajectory_rows(traj: &Trajectory) -> Vec<TrajectoryRow> {
    traj.samples
        .iter()
        .map(|s| {
            let m = &s.moments;
            TrajectoryRow {
                t: s.t,
                means: [
                    m[0].e_u, m[0].e_nu, m[1].e_u, m[1].e_nu, m[2].e_u, m[2].e_nu,
                ],
                f: ratio_f(m).ok(),
                g: ratio_g(m).ok(),
            }
        })
        .collect()
}

/// Writes sampled moments and ratios. CSV leaves F and G empty when the
/// guard trips; JSON writes `null`.
pub fn emit_trajectory<W: Write>(
    traj: &Trajectory,
    format: super::Format,
    out: &mut W,
) -> io::Result<()> {
    let rows = trajectory_rows(traj);
    match format {
        super::Format::Csv => {
            writeln!(out, "{}", TRAJECTORY_COLUMNS.join(","))?;
            for r in &rows {
                let mut cells = vec![fmt_num(r.t)];
                cells.extend(r.means.iter().map(|&x| fmt_num(x)));
                cells.push(r.f.map(fmt_num).unwrap_or_default());
                cells.push(r.g.map(fmt_num).unwrap_or_default());
                writeln!(out, "{}", cells.join(","))?;
            }
        }
        super::Format::Json => {
            let samples: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let mut o = serde_json::Map::new();
                    o.insert("t".into(), json_num(r.t));
                    for (k, &x) in TRAJECTORY_COLUMNS[1..7].iter().zip(&r.means) {
                        o.insert((*k).into(), json_num(x));
                    }
                    o.insert("F".into(), r.f.map_or(Value::Null, json_num));
                    o.insert("G".into(), r.g.map_or(Value::Null, json_num));
                    Value::Object(o)
                })
                .collect();
            let crossings: Vec<Value> = traj
                .crossings
                .iter()
                .map(|c| {
                    json!({
                        "t": json_num(c.t),
                        "step": c.step,
                        "subsystem": c.subsystem,
                        "component": c.component,
                        "rising": c.rising,
                    })
                })
                .collect();
            let doc = json!({ "samples": samples, "crossings": crossings });
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn emit_raster<W: Write>(
    raster: &Raster,
    format: super::Format,
    out: &mut W,
) -> io::Result<()> {
    match format {
        super::Format::Csv => {
            writeln!(out, "mu,gamma,F")?;
            for p in &raster.points {
                writeln!(
                    out,
                    "{},{},{}",
                    fmt_num(p.mu),
                    fmt_num(p.gamma),
                    fmt_num(p.f)
                )?;
            }
        }
        super::Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &raster_json(raster))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn raster_json(raster: &Raster) -> Value {
    let points: Vec<Value> = raster
        .points
        .iter()
        .map(|p| json!({ "mu": json_num(p.mu), "gamma": json_num(p.gamma), "F": json_num(p.f) }))
        .collect();
    json!({
        "alpha": json_num(raster.alpha),
        "n_mu": raster.n_mu,
        "n_gamma": raster.n_gamma,
        "points": points,
    })
}

pub fn emit_intervals<W: Write>(intervals: &[MuInterval], out: &mut W) -> io::Result<()> {
    writeln!(out, "mu_lo,mu_hi")?;
    for iv in intervals {
        writeln!(out, "{},{}", fmt_num(iv.lo), fmt_num(iv.hi))?;
    }
    Ok(())
}

/// Everything an `ar-scan` run produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArReport {
    pub gamma: f64,
    pub alpha: f64,
    pub mu_range: [f64; 2],
    pub intervals: Vec<MuInterval>,
    pub min_alpha_nonnegative: Option<f64>,
    pub min_alpha_linear: Option<f64>,
    pub published_min_alpha_nonnegative: f64,
    pub raster: Option<Raster>,
}

/// JSON writes the whole report; CSV writes the raster (or the intervals
/// when no raster was requested).
pub fn emit_ar_report<W: Write>(
    report: &ArReport,
    format: super::Format,
    out: &mut W,
) -> io::Result<()> {
    match format {
        super::Format::Csv => match &report.raster {
            Some(r) => emit_raster(r, format, out),
            None => emit_intervals(&report.intervals, out),
        },
        super::Format::Json => {
            let intervals: Vec<Value> = report
                .intervals
                .iter()
                .map(|iv| json!({ "lo": json_num(iv.lo), "hi": json_num(iv.hi) }))
                .collect();
            let doc = json!({
                "gamma": json_num(report.gamma),
                "alpha": json_num(report.alpha),
                "mu_range": [json_num(report.mu_range[0]), json_num(report.mu_range[1])],
                "intervals": intervals,
                "min_alpha_nonnegative": report.min_alpha_nonnegative.map_or(Value::Null, json_num),
                "min_alpha_linear": report.min_alpha_linear.map_or(Value::Null, json_num),
                "published_min_alpha_nonnegative": json_num(report.published_min_alpha_nonnegative),
                "raster": report.raster.as_ref().map_or(Value::Null, raster_json),
            });
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            writeln!(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_num(0.5), "0.5");
        assert_eq!(fmt_num(10.0), "10");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(123456.7890123456), "123456.789012");
        assert_eq!(fmt_num(1.23456789012345e-9), "1.23456789012e-9");
        assert_eq!(fmt_num(0.1 + 0.2), "0.3");
    }

    #[test]
    fn rounding_is_idempotent() {
        for &x in &[
            std::f64::consts::PI,
            1e-7 / 3.0,
            0.4999999999999999,
            9.999999999999e5,
        ] {
            assert_eq!(round_sig(round_sig(x)), round_sig(x));
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), round_sig(x));
        }
    }
}
