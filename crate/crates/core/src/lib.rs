//! Kinetic model of political competition and economic liberalization.
//!
//! Three functional subsystems (ruler, citizens, competing group) each carry a
//! probability mass function over a bivariate activity grid. Within-subsystem
//! binary interactions move the second activity component; influences from
//! the other subsystems' first moments move the first component. The crate
//! also ships the macroscopic innovation-function analytics that define the
//! "blocking" region the kinetic model is compared against.
//!
//! Module map:
//!
//! - [`ar`]: innovation function, blocking predicate, interval scanner,
//!   critical-α solvers and raster export.
//! - [`kinetic`]: grids, distributions, transition kernels, fluxes and the
//!   right-hand side of the evolution equation.
//! - [`integrator`]: fixed-step Euler / RK4 time stepping with invariant
//!   monitoring.
//! - [`scenarios`]: initial-condition profiles, case studies, moment ratios
//!   and phase-curve classification.
//! - [`cli`]: JSON configuration, CSV/JSON emitters and the command runner.

pub mod ar;
pub mod cli;
pub mod error;
pub mod integrator;
pub mod kinetic;
pub mod scenarios;

pub use error::{Error, IntegrationDiagnostic, Result};
