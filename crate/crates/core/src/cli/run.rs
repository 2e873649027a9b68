use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::json;

use crate::ar::{self, PUBLISHED_MIN_ALPHA_NONNEGATIVE};
use crate::error::{Error, Result};
use crate::integrator::{integrate_observed, Observer, Sample};
use crate::kinetic::PopulationState;
use crate::scenarios::{
    build_initial, classify_monotonicity, PhaseCurve, DEFAULT_MONOTONICITY_EPS,
};

use super::config::{Mode, OutputConfig, RunConfig};
use super::emit::{emit_ar_report, emit_intervals, emit_trajectory, fmt_num, ArReport};

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Integration(_) => 2,
        Error::Io(_) => 3,
        _ => 1,
    }
}

/// Runs `cfg`, reporting any error on stderr, and returns the exit code.
pub fn run_to_exit_code(cfg: &RunConfig) -> i32 {
    match run(cfg) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<()> {
    execute(cfg, true)
}

/// Writes through a buffer so a failed run leaves no partial file behind.
fn write_sink(
    output: &OutputConfig,
    body: impl FnOnce(&mut Vec<u8>) -> io::Result<()>,
) -> Result<()> {
    let mut buf = Vec::new();
    body(&mut buf)?;
    match &output.path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            w.write_all(&buf)?;
            w.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            out.write_all(&buf)?;
            out.flush()?;
        }
    }
    Ok(())
}

struct Progress {
    every: usize,
    n_steps: usize,
}

impl Observer for Progress {
    fn on_step(&mut self, step: usize, state: &PopulationState) {
        if step.is_multiple_of(self.every) || step == self.n_steps {
            eprintln!("  step {step}/{} t={}", self.n_steps, fmt_num(state.t));
        }
    }
}

fn execute(cfg: &RunConfig, verbose: bool) -> Result<()> {
    match cfg.mode {
        Mode::ArScan => ar_scan(cfg, verbose),
        Mode::Simulate | Mode::CaseStudy => simulate(cfg, verbose),
        Mode::Sweep => sweep(cfg),
    }
}

fn simulate(cfg: &RunConfig, verbose: bool) -> Result<()> {
    let initial = build_initial(&cfg.profiles, cfg.grid)?;
    let n_steps = cfg.integration.n_steps();
    if verbose {
        match cfg.case {
            Some(c) if cfg.mode == Mode::CaseStudy => eprintln!("case {c}: {n_steps} steps"),
            _ => eprintln!("simulate: {n_steps} steps"),
        }
    }
    let traj = if verbose {
        let mut progress = Progress {
            every: (n_steps / 10).max(1),
            n_steps,
        };
        integrate_observed(initial, &cfg.params, &cfg.integration, &mut progress)?
    } else {
        integrate_observed(initial, &cfg.params, &cfg.integration, &mut ())?
    };
    if verbose {
        eprintln!("  regime crossings: {}", traj.crossings.len());
        if cfg.mode == Mode::CaseStudy {
            let curve = PhaseCurve::from_trajectory(&traj);
            if let Ok(m) = classify_monotonicity(&curve, DEFAULT_MONOTONICITY_EPS) {
                eprintln!("  phase curve (E3_nu, E1_nu): {m:?}");
            }
        }
        if let Some(Sample { t, moments }) = traj.samples.last() {
            eprintln!(
                "  final t={} E1=({}, {}) E3=({}, {})",
                fmt_num(*t),
                fmt_num(moments[0].e_u),
                fmt_num(moments[0].e_nu),
                fmt_num(moments[2].e_u),
                fmt_num(moments[2].e_nu)
            );
        }
    }
    write_sink(&cfg.output, |w| {
        emit_trajectory(&traj, cfg.output.format, w)
    })
}

fn ar_scan(cfg: &RunConfig, verbose: bool) -> Result<()> {
    let a = &cfg.ar;
    let intervals = ar::blocking_intervals(a.gamma, a.alpha, a.mu_lo, a.mu_hi, a.step)?;
    let threshold = |r: Result<f64>, what: &str| match r {
        Ok(x) => Some(x),
        Err(e) => {
            if verbose {
                eprintln!("  {what}: unavailable ({e})");
            }
            None
        }
    };
    let nonneg = threshold(
        ar::min_alpha_nonnegative(a.gamma, a.mu_lo, a.mu_hi, a.tol),
        "min alpha for F >= 0",
    );
    let linear = threshold(
        ar::min_alpha_linear(a.gamma, a.mu_lo, a.mu_hi, a.tol),
        "min alpha for linear F",
    );
    let raster = match &a.raster {
        Some(r) => Some(ar::raster(
            (r.mu[0], r.mu[1]),
            (r.gamma[0], r.gamma[1]),
            a.alpha,
            r.n_mu,
            r.n_gamma,
        )?),
        None => None,
    };
    if verbose {
        eprintln!(
            "ar-scan: gamma={} alpha={}",
            fmt_num(a.gamma),
            fmt_num(a.alpha)
        );
        if intervals.is_empty() {
            eprintln!(
                "  no blocking on [{}, {}]",
                fmt_num(a.mu_lo),
                fmt_num(a.mu_hi)
            );
        }
        for iv in &intervals {
            eprintln!(
                "  blocking for mu in [{}, {}]",
                fmt_num(iv.lo),
                fmt_num(iv.hi)
            );
        }
        if let Some(x) = nonneg {
            eprintln!(
                "  min alpha for F >= 0: computed {} (published {}, difference {})",
                fmt_num(x),
                fmt_num(PUBLISHED_MIN_ALPHA_NONNEGATIVE),
                fmt_num(x - PUBLISHED_MIN_ALPHA_NONNEGATIVE)
            );
        }
        if let Some(x) = linear {
            eprintln!("  min alpha for linear F: {}", fmt_num(x));
        }
    }
    let report = ArReport {
        gamma: a.gamma,
        alpha: a.alpha,
        mu_range: [a.mu_lo, a.mu_hi],
        intervals,
        min_alpha_nonnegative: nonneg,
        min_alpha_linear: linear,
        published_min_alpha_nonnegative: PUBLISHED_MIN_ALPHA_NONNEGATIVE,
        raster,
    };
    write_sink(&cfg.output, |w| {
        emit_ar_report(&report, cfg.output.format, w)
    })?;
    // CSV output holds only the raster; the intervals go next to it.
    if cfg.output.format == super::Format::Csv && report.raster.is_some() {
        if let Some(p) = &cfg.output.path {
            let side = p.with_extension("intervals.csv");
            let mut w = BufWriter::new(File::create(&side)?);
            emit_intervals(&report.intervals, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn point_file(index: usize, ext: &str) -> String {
    format!("point_{index:04}.{ext}")
}

fn sweep(cfg: &RunConfig) -> Result<()> {
    let dir = cfg
        .sweep_out_dir
        .as_deref()
        .expect("validated sweep has out_dir");
    fs::create_dir_all(dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.sweep_workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start {} workers: {e}", cfg.sweep_workers)))?;
    eprintln!(
        "sweep: {} points on {} workers",
        cfg.sweep_points.len(),
        cfg.sweep_workers
    );

    let results: Vec<(String, Result<()>)> = pool.install(|| {
        use rayon::prelude::*;
        cfg.sweep_points
            .par_iter()
            .map(|p| {
                let name = point_file(p.index, p.config.output.format.extension());
                let mut c = p.config.clone();
                c.output.path = Some(dir.join(&name));
                let r = execute(&c, false);
                (name, r)
            })
            .collect()
    });

    let entries: Vec<serde_json::Value> = cfg
        .sweep_points
        .iter()
        .zip(&results)
        .map(|(p, (name, r))| {
            json!({
                "index": p.index,
                "overrides": p.overrides,
                "output": name,
                "exit_code": r.as_ref().map_or_else(exit_code, |_| 0),
                "error": r.as_ref().err().map(|e| e.to_string()),
            })
        })
        .collect();
    let failed = entries.iter().filter(|e| e["exit_code"] != 0).count();
    write_manifest(dir, &json!({ "points": entries }))?;
    eprintln!("sweep: {} ok, {failed} failed", results.len() - failed);

    match results.into_iter().find_map(|(_, r)| r.err()) {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn write_manifest(dir: &Path, doc: &serde_json::Value) -> Result<()> {
    let mut w = BufWriter::new(File::create(dir.join("manifest.json"))?);
    serde_json::to_writer_pretty(&mut w, doc).map_err(io::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
