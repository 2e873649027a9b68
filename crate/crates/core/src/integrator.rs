//! Fixed-step time integration with invariant monitoring.
//!
//! No renormalization or clipping is ever applied. A step that produces an
//! entry below [`POSITIVITY_FLOOR`] or a total mass further than
//! [`MASS_DRIFT_LIMIT`] from one aborts the run with an
//! [`IntegrationDiagnostic`].
//!
//! Regime switches (a moment crossing 1/2) are not located in time. Each
//! right-hand-side evaluation, including every Runge–Kutta stage, uses the
//! regime of the state it is evaluated at. Crossings seen between consecutive
//! steps are recorded in [`Trajectory::crossings`].

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, IntegrationDiagnostic, Result, Violation};
use crate::kinetic::{
    regime_high, rhs, Derivative, Distribution, KineticParams, Moments, PopulationState,
    SubsystemId,
};

/// Most negative entry tolerated after a step.
pub const POSITIVITY_FLOOR: f64 = -1e-12;
/// Largest tolerated `|Σ f − 1|` per subsystem.
pub const MASS_DRIFT_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Euler,
    #[default]
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationSettings {
    pub dt: f64,
    pub t_end: f64,
    pub method: Method,
    /// Record moments every `sample_every` steps (and at step 0).
    pub sample_every: usize,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        IntegrationSettings {
            dt: 0.01,
            t_end: 10.0,
            method: Method::Rk4,
            sample_every: 10,
        }
    }
}

impl IntegrationSettings {
    /// Checks the settings on their own and against the Euler positivity
    /// bound `dt <= 1 / (max η + max Σ μ)` of `params`.
    pub fn validate(&self, params: &KineticParams) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::out_of_range(
                "dt",
                format!("must be > 0, got {}", self.dt),
            ));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::out_of_range(
                "t_end",
                format!("must be > 0, got {}", self.t_end),
            ));
        }
        if self.t_end < self.dt {
            return Err(Error::out_of_range(
                "t_end",
                format!("must be >= dt = {}, got {}", self.dt, self.t_end),
            ));
        }
        if self.sample_every == 0 {
            return Err(Error::out_of_range("sample_every", "must be >= 1"));
        }
        let bound = params.max_stable_dt();
        if self.dt > bound * (1.0 + 1e-12) {
            return Err(Error::out_of_range(
                "dt",
                format!(
                    "{} exceeds the positivity bound dt <= 1/(max eta + max sum mu) = {bound}",
                    self.dt
                ),
            ));
        }
        Ok(())
    }

    /// Number of steps taken: `t_end / dt` rounded down, with a small
    /// allowance for representation error.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt + 1e-9).floor() as usize
    }

    pub fn n_samples(&self) -> usize {
        self.n_steps() / self.sample_every + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub moments: [Moments; 3],
}

impl Sample {
    pub fn of(state: &PopulationState) -> Self {
        Sample {
            t: state.t,
            moments: state.moments(),
        }
    }

    pub fn moment(&self, s: SubsystemId) -> Moments {
        self.moments[s.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    U,
    Nu,
}

/// A first moment changed regime (crossed 1/2) during a step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeCrossing {
    /// Time at the end of the step.
    pub t: f64,
    pub step: usize,
    pub subsystem: SubsystemId,
    pub component: Component,
    pub rising: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub final_state: PopulationState,
    pub crossings: Vec<RegimeCrossing>,
}

/// Hooks called while integrating.
pub trait Observer {
    /// After every accepted step; `step` counts from 1.
    fn on_step(&mut self, _step: usize, _state: &PopulationState) {}
    fn on_sample(&mut self, _sample: &Sample) {}
}

impl Observer for () {}

fn axpy(state: &PopulationState, dt: f64, k: &[Derivative; 3]) -> PopulationState {
    let grid = state.grid();
    let dists = SubsystemId::ALL.map(|s| {
        let f: Array2<f64> = state.dist(s).values() + &(&k[s.index()] * dt);
        Distribution::from_raw(grid, f)
    });
    PopulationState::from_raw(grid, dists, state.t + dt)
}

fn check(state: &PopulationState) -> std::result::Result<(), IntegrationDiagnostic> {
    for s in SubsystemId::ALL {
        let d = state.dist(s);
        let diag = |violation| IntegrationDiagnostic {
            subsystem: s,
            step: 0,
            t: state.t,
            violation,
        };
        let min_entry = d.min_entry();
        if !(min_entry >= POSITIVITY_FLOOR) {
            return Err(diag(Violation::Negative { min_entry }));
        }
        let mass = d.mass();
        if !((mass - 1.0).abs() <= MASS_DRIFT_LIMIT) {
            return Err(diag(Violation::MassDrift { mass }));
        }
    }
    Ok(())
}

/// Advances `state` by `dt`.
///
/// The diagnostic's `step` field is 0 for a lone call; [`integrate`] fills in
/// the step index.
pub fn step(
    state: &PopulationState,
    params: &KineticParams,
    dt: f64,
    method: Method,
) -> std::result::Result<PopulationState, IntegrationDiagnostic> {
    let next = match method {
        Method::Euler => axpy(state, dt, &rhs(state, params)),
        Method::Rk4 => {
            let k1 = rhs(state, params);
            let k2 = rhs(&axpy(state, 0.5 * dt, &k1), params);
            let k3 = rhs(&axpy(state, 0.5 * dt, &k2), params);
            let k4 = rhs(&axpy(state, dt, &k3), params);
            let grid = state.grid();
            let dists = SubsystemId::ALL.map(|s| {
                let i = s.index();
                let incr = (&k1[i] + &(&k2[i] * 2.0) + &(&k3[i] * 2.0) + &k4[i]) * (dt / 6.0);
                Distribution::from_raw(grid, state.dist(s).values() + &incr)
            });
            PopulationState::from_raw(grid, dists, state.t + dt)
        }
    };
    check(&next)?;
    Ok(next)
}

fn regimes(m: &[Moments; 3]) -> [[bool; 2]; 3] {
    m.map(|x| [regime_high(x.e_u), regime_high(x.e_nu)])
}

pub fn integrate(
    state: PopulationState,
    params: &KineticParams,
    settings: &IntegrationSettings,
) -> Result<Trajectory> {
    integrate_observed(state, params, settings, &mut ())
}

/// Steps from `state` to `t_end`, sampling the first moments of all
/// subsystems every `sample_every` steps.
pub fn integrate_observed(
    state: PopulationState,
    params: &KineticParams,
    settings: &IntegrationSettings,
    observer: &mut impl Observer,
) -> Result<Trajectory> {
    params.validate()?;
    settings.validate(params)?;

    let t0 = state.t;
    let n_steps = settings.n_steps();
    let mut samples = Vec::with_capacity(settings.n_samples());
    let mut crossings = Vec::new();

    let first = Sample::of(&state);
    observer.on_sample(&first);
    let mut regime = regimes(&first.moments);
    samples.push(first);

    let mut current = state;
    for n in 1..=n_steps {
        let mut next = step(&current, params, settings.dt, settings.method).map_err(|mut d| {
            d.step = n;
            Error::from(d)
        })?;
        next.t = t0 + n as f64 * settings.dt;
        observer.on_step(n, &next);

        let moments = next.moments();
        let now = regimes(&moments);
        for s in SubsystemId::ALL {
            for (c, component) in [Component::U, Component::Nu].into_iter().enumerate() {
                if now[s.index()][c] != regime[s.index()][c] {
                    crossings.push(RegimeCrossing {
                        t: next.t,
                        step: n,
                        subsystem: s,
                        component,
                        rising: now[s.index()][c],
                    });
                }
            }
        }
        regime = now;

        if n % settings.sample_every == 0 {
            let sample = Sample { t: next.t, moments };
            observer.on_sample(&sample);
            samples.push(sample);
        }
        current = next;
    }

    Ok(Trajectory {
        samples,
        final_state: current,
        crossings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetic::ActivityGrid;

    fn uniform_state() -> PopulationState {
        let d = Distribution::uniform(ActivityGrid::default());
        PopulationState::new([d.clone(), d.clone(), d], 0.0).unwrap()
    }

    #[test]
    fn sample_arithmetic() {
        let settings = IntegrationSettings {
            dt: 0.01,
            t_end: 1.0,
            method: Method::Rk4,
            sample_every: 10,
        };
        assert_eq!(settings.n_steps(), 100);
        let traj = integrate(uniform_state(), &KineticParams::default(), &settings).unwrap();
        assert_eq!(traj.samples.len(), 11);
        for (k, s) in traj.samples.iter().enumerate() {
            assert!((s.t - 0.1 * k as f64).abs() < 1e-12);
        }
        assert!((traj.final_state.t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stationary_state_only_advances_time() {
        let g = ActivityGrid::default();
        let state = PopulationState::new(
            [
                Distribution::dirac(g, 0, 0).unwrap(),
                Distribution::dirac(g, 4, 0).unwrap(),
                Distribution::dirac(g, 10, 10).unwrap(),
            ],
            0.0,
        )
        .unwrap();
        for method in [Method::Euler, Method::Rk4] {
            let next = step(&state, &KineticParams::default(), 0.3, method).unwrap();
            assert_eq!(next.dists(), state.dists());
            assert!((next.t - 0.3).abs() < 1e-15);
        }
    }

    #[test]
    fn euler_conserves_mass_from_uniform() {
        let settings = IntegrationSettings {
            dt: 0.01,
            t_end: 10.0,
            method: Method::Euler,
            sample_every: 100,
        };
        let traj = integrate(uniform_state(), &KineticParams::default(), &settings).unwrap();
        for d in traj.final_state.dists() {
            assert!((d.mass() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn settings_validation() {
        let p = KineticParams::default();
        let ok = IntegrationSettings::default();
        ok.validate(&p).unwrap();
        let too_big = IntegrationSettings {
            dt: 0.5,
            method: Method::Euler,
            ..ok
        };
        let msg = too_big.validate(&p).unwrap_err().to_string();
        assert!(msg.contains("dt"), "{msg}");
        assert!(IntegrationSettings { dt: 0.0, ..ok }.validate(&p).is_err());
        assert!(IntegrationSettings { t_end: 0.001, ..ok }
            .validate(&p)
            .is_err());
        assert!(IntegrationSettings {
            sample_every: 0,
            ..ok
        }
        .validate(&p)
        .is_err());
        // dt exactly at the bound is fine
        assert!(IntegrationSettings {
            dt: 1.0 / 3.0,
            ..ok
        }
        .validate(&p)
        .is_ok());
    }

    #[test]
    fn diagnostics_carry_subsystem_and_step() {
        // Excessive rates with a legal-looking dt: only reachable by bypassing
        // settings validation, so drive `step` directly.
        let mut p = KineticParams::default();
        p.eta = [50.0, 0.0, 0.0];
        let g = ActivityGrid::new(4, 4).unwrap();
        let ruler = Distribution::dirac(g, 0, 2).unwrap();
        let other = Distribution::uniform(g);
        let state = PopulationState::new([ruler, other.clone(), other], 0.0).unwrap();
        let err = step(&state, &p, 0.1, Method::Euler).unwrap_err();
        assert_eq!(err.subsystem, SubsystemId::Ruler);
        assert!(matches!(err.violation, Violation::Negative { .. }));
    }
}
