use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ar::DEFAULT_SCAN_STEP;
use crate::error::{Error, Result};
use crate::integrator::IntegrationSettings;
use crate::kinetic::{ActivityGrid, KineticParams};
use crate::scenarios::{case_profile, CaseId, CaseVClusters, ProfileSpec};

use super::args::apply_override;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ArScan,
    Simulate,
    CaseStudy,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub i: usize,
    pub r: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { i: 10, r: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasterConfig {
    pub mu: [f64; 2],
    pub gamma: [f64; 2],
    pub n_mu: usize,
    pub n_gamma: usize,
}

impl Default for RasterConfig {
    fn default() -> Self {
        RasterConfig {
            mu: [0.01, 1.0],
            gamma: [1.5, 3.0],
            n_mu: 100,
            n_gamma: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArScanConfig {
    pub gamma: f64,
    pub alpha: f64,
    pub mu_lo: f64,
    pub mu_hi: f64,
    pub step: f64,
    /// Tolerance of the critical-α searches.
    pub tol: f64,
    pub raster: Option<RasterConfig>,
}

impl Default for ArScanConfig {
    fn default() -> Self {
        ArScanConfig {
            gamma: 2.0,
            alpha: 1.1,
            mu_lo: 1e-4,
            mu_hi: 1.0,
            step: DEFAULT_SCAN_STEP,
            tol: 1e-6,
            raster: Some(RasterConfig::default()),
        }
    }
}

/// Case V initial clusters: one of the default variants or explicit profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CaseVSelect {
    Variant { variant: usize },
    Clusters(CaseVClusters),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Destination file; stdout when absent.
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct SweepSection {
    /// Config every point starts from (must name its own mode).
    base: Value,
    /// Explicit point overrides, deep-merged over `base`.
    configs: Vec<Value>,
    /// Cartesian grid over dotted keys, applied to `base`.
    grid: BTreeMap<String, Vec<Value>>,
    workers: Option<usize>,
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Mode,
    #[serde(default)]
    grid: GridConfig,
    #[serde(default)]
    params: KineticParams,
    #[serde(default)]
    integration: IntegrationSettings,
    #[serde(default)]
    profiles: ProfileSpec,
    #[serde(default)]
    case: Option<CaseId>,
    #[serde(default)]
    case_v: Option<CaseVSelect>,
    #[serde(default)]
    ar: ArScanConfig,
    #[serde(default)]
    sweep: Option<SweepSection>,
    #[serde(default)]
    output: OutputConfig,
}

/// One resolved sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    /// What distinguishes this point from the base config.
    pub overrides: Value,
    pub config: RunConfig,
}

/// Validated run configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub grid: ActivityGrid,
    pub params: KineticParams,
    pub integration: IntegrationSettings,
    /// Initial profiles for `simulate`, or the selected case's profiles.
    pub profiles: ProfileSpec,
    pub case: Option<CaseId>,
    pub case_v: Option<CaseVClusters>,
    pub ar: ArScanConfig,
    pub output: OutputConfig,
    pub sweep_points: Vec<SweepPoint>,
    pub sweep_workers: usize,
    pub sweep_out_dir: Option<PathBuf>,
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::config("<document>", e.to_string()))?;
    parse_config_value(value)
}

fn prefixed(prefix: &str, e: Error) -> Error {
    match e {
        Error::OutOfRange { field, message } => Error::config(format!("{prefix}.{field}"), message),
        Error::InvalidArgument(message) => Error::config(prefix, message),
        Error::Config { path, message } => Error::config(format!("{prefix}.{path}"), message),
        other => other,
    }
}

pub fn parse_config_value(value: Value) -> Result<RunConfig> {
    if !value.is_object() {
        return Err(Error::config("<document>", "config must be a JSON object"));
    }
    if value.get("mode").is_none() {
        return Err(Error::config("mode", "missing required key"));
    }
    let raw: RawConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::config(path, e.into_inner().to_string())
    })?;

    let grid = ActivityGrid::new(raw.grid.i, raw.grid.r).map_err(|e| prefixed("grid", e))?;
    raw.params.validate().map_err(|e| prefixed("params", e))?;
    raw.integration
        .validate(&raw.params)
        .map_err(|e| prefixed("integration", e))?;

    let case_v = match raw.case_v {
        None => None,
        Some(CaseVSelect::Clusters(c)) => Some(c),
        Some(CaseVSelect::Variant { variant }) => {
            let defaults = CaseVClusters::defaults();
            let n = defaults.len();
            Some(defaults.into_iter().nth(variant).ok_or_else(|| {
                Error::config("case_v.variant", format!("must be < {n}, got {variant}"))
            })?)
        }
    };

    let mut cfg = RunConfig {
        mode: raw.mode,
        grid,
        params: raw.params,
        integration: raw.integration,
        profiles: raw.profiles,
        case: raw.case,
        case_v,
        ar: raw.ar,
        output: raw.output,
        sweep_points: Vec::new(),
        sweep_workers: 1,
        sweep_out_dir: None,
    };

    match cfg.mode {
        Mode::ArScan => validate_ar(&cfg.ar)?,
        Mode::Simulate => {
            crate::scenarios::build_initial(&cfg.profiles, grid)
                .map_err(|e| prefixed("profiles", e))?;
        }
        Mode::CaseStudy => {
            let case = cfg
                .case
                .ok_or_else(|| Error::config("case", "required in case-study mode"))?;
            cfg.profiles = case_profile(case, cfg.case_v.as_ref());
            crate::scenarios::build_initial(&cfg.profiles, grid)
                .map_err(|e| prefixed("case_v", e))?;
        }
        Mode::Sweep => {
            let sweep = raw
                .sweep
                .ok_or_else(|| Error::config("sweep", "required in sweep mode"))?;
            cfg.sweep_workers = sweep.workers.unwrap_or(1);
            if cfg.sweep_workers == 0 {
                return Err(Error::config("sweep.workers", "must be >= 1"));
            }
            cfg.sweep_out_dir = Some(
                sweep
                    .out_dir
                    .clone()
                    .ok_or_else(|| Error::config("sweep.out_dir", "required in sweep mode"))?,
            );
            cfg.sweep_points = resolve_sweep(&sweep)?;
        }
    }
    Ok(cfg)
}

fn validate_ar(ar: &ArScanConfig) -> Result<()> {
    let bad = |k: &str, m: String| Err(Error::config(format!("ar.{k}"), m));
    if !(ar.gamma.is_finite() && ar.gamma > 1.0) {
        return bad("gamma", format!("must be > 1, got {}", ar.gamma));
    }
    if !(ar.alpha.is_finite() && ar.alpha >= 1.0) {
        return bad("alpha", format!("must be >= 1, got {}", ar.alpha));
    }
    if !(ar.mu_lo.is_finite() && ar.mu_lo > 0.0) {
        return bad("mu_lo", format!("must be > 0, got {}", ar.mu_lo));
    }
    if !(ar.mu_hi.is_finite() && ar.mu_hi > ar.mu_lo) {
        return bad("mu_hi", format!("must exceed mu_lo, got {}", ar.mu_hi));
    }
    if !(ar.step.is_finite() && ar.step > 0.0) {
        return bad("step", format!("must be > 0, got {}", ar.step));
    }
    if !(ar.tol.is_finite() && ar.tol > 0.0) {
        return bad("tol", format!("must be > 0, got {}", ar.tol));
    }
    if let Some(r) = &ar.raster {
        crate::ar::raster((r.mu[0], r.mu[0]), (r.gamma[0], r.gamma[0]), ar.alpha, 1, 1)
            .and_then(|_| {
                crate::ar::raster((r.mu[0], r.mu[1]), (r.gamma[0], r.gamma[1]), ar.alpha, 1, 1)
            })
            .map_err(|e| prefixed("ar.raster", e))?;
        if r.n_mu == 0 || r.n_gamma == 0 {
            return bad("raster", "node counts must be >= 1".into());
        }
    }
    Ok(())
}

/// Recursively merges `patch` into `base`; objects merge key by key, any
/// other value replaces.
fn deep_merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                deep_merge(b.entry(k.clone()).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p.clone(),
    }
}

fn resolve_sweep(sweep: &SweepSection) -> Result<Vec<SweepPoint>> {
    if !sweep.configs.is_empty() && !sweep.grid.is_empty() {
        return Err(Error::config(
            "sweep",
            "give either `configs` or `grid`, not both",
        ));
    }
    let base = if sweep.base.is_null() {
        Value::Object(Default::default())
    } else {
        sweep.base.clone()
    };

    let mut overrides: Vec<Value> = Vec::new();
    if !sweep.configs.is_empty() {
        overrides = sweep.configs.clone();
    } else if !sweep.grid.is_empty() {
        // first key varies slowest
        let mut combos: Vec<Vec<(&String, &Value)>> = vec![Vec::new()];
        for (key, values) in &sweep.grid {
            if values.is_empty() {
                return Err(Error::config(
                    format!("sweep.grid.{key}"),
                    "needs at least one value",
                ));
            }
            combos = combos
                .into_iter()
                .flat_map(|c| {
                    values.iter().map(move |v| {
                        let mut c = c.clone();
                        c.push((key, v));
                        c
                    })
                })
                .collect();
        }
        for combo in combos {
            let mut o = serde_json::Map::new();
            for (k, v) in combo {
                o.insert(k.clone(), v.clone());
            }
            overrides.push(Value::Object(o));
        }
    } else {
        return Err(Error::config("sweep", "needs `configs` or `grid`"));
    }

    let grid_mode = !sweep.grid.is_empty();
    overrides
        .into_iter()
        .enumerate()
        .map(|(index, ov)| {
            let mut v = base.clone();
            if grid_mode {
                for (k, x) in ov.as_object().expect("built above") {
                    apply_override(&mut v, k, x.clone())
                        .map_err(|e| prefixed(&format!("sweep.grid.{k}"), e))?;
                }
            } else {
                deep_merge(&mut v, &ov);
            }
            let config = parse_config_value(v)
                .map_err(|e| prefixed(&format!("sweep.points[{index}]"), e))?;
            if config.mode == Mode::Sweep {
                return Err(Error::config(
                    format!("sweep.points[{index}].mode"),
                    "sweeps cannot nest",
                ));
            }
            Ok(SweepPoint {
                index,
                overrides: ov,
                config,
            })
        })
        .collect()
}
