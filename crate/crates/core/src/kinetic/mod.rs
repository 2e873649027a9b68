//! Discrete kinetic model: activity grids, per-subsystem distributions,
//! transition kernels and the fluxes that make up the evolution equation.
//!
//! Each subsystem `s` carries a mass table `f[s][i][r]` over the grid
//! `(u_i, ν_r) = (i/I, r/R)`. The table evolves by
//!
//! ```text
//! d f^s / dt = J_s[f^s] + 𝒥_s[f^j, j ≠ s]
//! ```
//!
//! where `J_s` collects binary interactions inside the subsystem (they only
//! move `ν`) and `𝒥_s` the influence of the other subsystems' first moments
//! (it only moves `u`).

mod flux;
mod kernel;
mod params;
mod state;

pub use flux::{flux_external, flux_internal, rhs, Derivative};
pub use kernel::{kernel_b, kernel_d, Influence};
pub use params::{regime_high, KineticParams, SubsystemId, REGIME_TIE_TOL};
pub use state::{moments, ActivityGrid, Distribution, Moments, PopulationState, MASS_TOL};

pub(crate) use kernel::{b_matrix, d_matrix};
