//! Initial-condition profiles, the five case studies, moment ratios and
//! phase-curve classification.
//!
//! Profiles are only described qualitatively ("strong ruler", "poor
//! society"), so each named profile expands to a uniform block of
//! `⌈20 %⌉` of the nodes of one axis:
//!
//! | profile          | block                                   |
//! |------------------|-----------------------------------------|
//! | `Uniform`        | every node                              |
//! | `Strong`, `Rich` | top block                               |
//! | `Weak`, `Poor`   | bottom block                            |
//! | `Medium`         | middle block, ties toward lower indices |
//!
//! Initial distributions are products of the two marginals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegrationSettings, Trajectory};
use crate::kinetic::{
    ActivityGrid, Distribution, KineticParams, Moments, PopulationState, SubsystemId, MASS_TOL,
};

/// Smallest `E^3_ν` accepted as a ratio denominator.
pub const RATIO_EPS: f64 = 1e-9;

pub const DEFAULT_MONOTONICITY_EPS: f64 = 1e-4;

/// Marginal profile along one activity axis.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Strong,
    Weak,
    Medium,
    #[default]
    Uniform,
    Poor,
    Rich,
    /// Explicit node masses; must be nonnegative and sum to one.
    Explicit(Vec<f64>),
}

impl Profile {
    /// Node masses for an axis with `n` nodes.
    pub fn weights(&self, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::invalid("profile axis needs at least one node"));
        }
        let block = n.div_ceil(5);
        let range = match self {
            Profile::Uniform => 0..n,
            Profile::Strong | Profile::Rich => n - block..n,
            Profile::Weak | Profile::Poor => 0..block,
            Profile::Medium => {
                let start = (n - block) / 2;
                start..start + block
            }
            Profile::Explicit(w) => {
                if w.len() != n {
                    return Err(Error::invalid(format!(
                        "explicit profile has {} entries, axis has {n} nodes",
                        w.len()
                    )));
                }
                if let Some(bad) = w.iter().find(|x| !x.is_finite() || **x < 0.0) {
                    return Err(Error::invalid(format!(
                        "explicit profile entries must be finite and nonnegative, found {bad}"
                    )));
                }
                let total: f64 = w.iter().sum();
                if (total - 1.0).abs() > MASS_TOL {
                    return Err(Error::invalid(format!(
                        "explicit profile sums to {total}, not 1"
                    )));
                }
                return Ok(w.clone());
            }
        };
        let mass = 1.0 / range.len() as f64;
        let mut w = vec![0.0; n];
        w[range].fill(mass);
        Ok(w)
    }
}

/// Marginal profiles of one subsystem.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SubsystemProfile {
    pub u: Profile,
    pub nu: Profile,
}

impl SubsystemProfile {
    pub fn new(u: Profile, nu: Profile) -> Self {
        SubsystemProfile { u, nu }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileSpec {
    pub ruler: SubsystemProfile,
    pub citizens: SubsystemProfile,
    pub competing: SubsystemProfile,
}

impl ProfileSpec {
    pub fn get(&self, s: SubsystemId) -> &SubsystemProfile {
        match s {
            SubsystemId::Ruler => &self.ruler,
            SubsystemId::Citizens => &self.citizens,
            SubsystemId::Competing => &self.competing,
        }
    }
}

/// Product-form initial state at `t = 0`.
pub fn build_initial(spec: &ProfileSpec, grid: ActivityGrid) -> Result<PopulationState> {
    let (nu, nr) = grid.shape();
    let mut dists = Vec::with_capacity(3);
    for s in SubsystemId::ALL {
        let p = spec.get(s);
        let u =
            p.u.weights(nu)
                .map_err(|e| Error::invalid(format!("{s}.u: {e}")))?;
        let v =
            p.nu.weights(nr)
                .map_err(|e| Error::invalid(format!("{s}.nu: {e}")))?;
        dists.push(Distribution::from_marginals(grid, &u, &v)?);
    }
    let dists: [Distribution; 3] = dists.try_into().expect("three subsystems");
    PopulationState::new(dists, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseId {
    /// Strong ruler, weak competing group.
    I,
    /// Strong ruler, strong competing group.
    II,
    /// Weak ruler, strong competing group.
    III,
    /// Balanced powers in a poor society.
    #[serde(rename = "IV_poor")]
    IvPoor,
    /// Balanced powers in a rich society.
    #[serde(rename = "IV_rich")]
    IvRich,
    /// Ratio asymptotics from caller-chosen clusters.
    V,
}

impl CaseId {
    pub const ALL: [CaseId; 6] = [
        CaseId::I,
        CaseId::II,
        CaseId::III,
        CaseId::IvPoor,
        CaseId::IvRich,
        CaseId::V,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::I => "I",
            CaseId::II => "II",
            CaseId::III => "III",
            CaseId::IvPoor => "IV_poor",
            CaseId::IvRich => "IV_rich",
            CaseId::V => "V",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown case study `{s}`")))
    }
}

/// Initial clusters of the ruler and the competing group for case V; the
/// citizens start uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseVClusters {
    pub ruler: SubsystemProfile,
    pub competing: SubsystemProfile,
}

impl CaseVClusters {
    /// Strong ruler against weak competition, the reverse, and both medium.
    pub fn defaults() -> [CaseVClusters; 3] {
        use Profile::*;
        let both = |p: Profile| SubsystemProfile::new(p.clone(), p);
        [
            CaseVClusters {
                ruler: both(Strong),
                competing: both(Weak),
            },
            CaseVClusters {
                ruler: both(Weak),
                competing: both(Strong),
            },
            CaseVClusters {
                ruler: both(Medium),
                competing: both(Medium),
            },
        ]
    }
}

/// Initial profiles of a case study. Case V uses `clusters`, falling back to
/// the first default variant.
///
/// Beyond the named powers, two choices shape the outcome because citizen
/// wealth only reaches the ruler through citizen opinion:
///
/// - case III starts the citizens with a low opinion of the weak ruler; with
///   a uniform opinion (mean exactly 1/2) the ruler's power is always pushed
///   up and a weak ruler cannot stay weak;
/// - in case IV the citizens' opinion follows their wealth (poor → low,
///   rich → high).
pub fn case_profile(id: CaseId, clusters: Option<&CaseVClusters>) -> ProfileSpec {
    use Profile::*;
    let sp = SubsystemProfile::new;
    match id {
        CaseId::I => ProfileSpec {
            ruler: sp(Strong, Strong),
            citizens: sp(Uniform, Uniform),
            competing: sp(Weak, Weak),
        },
        CaseId::II => ProfileSpec {
            ruler: sp(Strong, Strong),
            citizens: sp(Uniform, Uniform),
            competing: sp(Strong, Strong),
        },
        CaseId::III => ProfileSpec {
            ruler: sp(Weak, Weak),
            citizens: sp(Uniform, Weak),
            competing: sp(Strong, Strong),
        },
        CaseId::IvPoor => ProfileSpec {
            ruler: sp(Medium, Uniform),
            citizens: sp(Poor, Weak),
            competing: sp(Uniform, Medium),
        },
        CaseId::IvRich => ProfileSpec {
            ruler: sp(Medium, Uniform),
            citizens: sp(Rich, Strong),
            competing: sp(Uniform, Medium),
        },
        CaseId::V => {
            let c = clusters
                .cloned()
                .unwrap_or_else(|| CaseVClusters::defaults()[0].clone());
            ProfileSpec {
                ruler: c.ruler,
                citizens: sp(Uniform, Uniform),
                competing: c.competing,
            }
        }
    }
}

/// `(E^3_ν, E^1_ν)` along a trajectory: competing power against the ruler's
/// propensity to innovate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCurve {
    pub points: Vec<(f64, f64)>,
}

impl PhaseCurve {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let points = traj
            .samples
            .iter()
            .map(|s| {
                (
                    s.moment(SubsystemId::Competing).e_nu,
                    s.moment(SubsystemId::Ruler).e_nu,
                )
            })
            .collect();
        PhaseCurve { points }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseRun {
    pub case: CaseId,
    pub profile: ProfileSpec,
    pub trajectory: Trajectory,
    pub phase_curve: PhaseCurve,
}

pub fn run_case_study(
    id: CaseId,
    clusters: Option<&CaseVClusters>,
    grid: ActivityGrid,
    params: &KineticParams,
    settings: &IntegrationSettings,
) -> Result<CaseRun> {
    let profile = case_profile(id, clusters);
    let initial = build_initial(&profile, grid)?;
    let trajectory = integrate(initial, params, settings)?;
    let phase_curve = PhaseCurve::from_trajectory(&trajectory);
    Ok(CaseRun {
        case: id,
        profile,
        trajectory,
        phase_curve,
    })
}

fn competing_power(moments: &[Moments; 3]) -> Result<f64> {
    let den = moments[SubsystemId::Competing.index()].e_nu;
    if den < RATIO_EPS {
        return Err(Error::DegenerateDenominator {
            value: den,
            eps: RATIO_EPS,
        });
    }
    Ok(den)
}

/// `F = E^1_u / E^3_ν`: ruler power over competing power.
pub fn ratio_f(moments: &[Moments; 3]) -> Result<f64> {
    Ok(moments[SubsystemId::Ruler.index()].e_u / competing_power(moments)?)
}

/// `G = E^1_ν / E^3_ν`: ruler propensity to innovate over competing power.
pub fn ratio_g(moments: &[Moments; 3]) -> Result<f64> {
    Ok(moments[SubsystemId::Ruler.index()].e_nu / competing_power(moments)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Monotonicity {
    MonotoneIncreasing,
    MonotoneDecreasing,
    Nonmonotone,
    Flat,
}

/// Classifies the slope signs of a curve.
///
/// Only segments with `|Δx| > eps` count; slopes with `|Δy/Δx| <= eps` are
/// treated as zero.
pub fn classify_monotonicity(curve: &PhaseCurve, eps: f64) -> Result<Monotonicity> {
    if curve.points.len() < 3 {
        return Err(Error::invalid(format!(
            "monotonicity needs at least 3 points, got {}",
            curve.points.len()
        )));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid(format!("eps must be > 0, got {eps}")));
    }
    let (mut up, mut down) = (false, false);
    for w in curve.points.windows(2) {
        let dx = w[1].0 - w[0].0;
        if dx.abs() <= eps {
            continue;
        }
        let slope = (w[1].1 - w[0].1) / dx;
        if slope > eps {
            up = true;
        } else if slope < -eps {
            down = true;
        }
    }
    Ok(match (up, down) {
        (true, true) => Monotonicity::Nonmonotone,
        (true, false) => Monotonicity::MonotoneIncreasing,
        (false, true) => Monotonicity::MonotoneDecreasing,
        (false, false) => Monotonicity::Flat,
    })
}
