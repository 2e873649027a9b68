use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinetic::SubsystemId;

/// Allowed deviation of a distribution's total mass from one.
pub const MASS_TOL: f64 = 1e-12;

/// Normalized microstate grid `u_i = i/I`, `ν_r = r/R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActivityGrid {
    i: usize,
    r: usize,
}

impl ActivityGrid {
    pub fn new(i: usize, r: usize) -> Result<Self> {
        if i == 0 || r == 0 {
            return Err(Error::invalid(format!(
                "grid needs I >= 1 and R >= 1, got I = {i}, R = {r}"
            )));
        }
        Ok(ActivityGrid { i, r })
    }

    /// Number of `u` subdivisions, `I`.
    pub fn i_max(&self) -> usize {
        self.i
    }

    /// Number of `ν` subdivisions, `R`.
    pub fn r_max(&self) -> usize {
        self.r
    }

    /// Table shape `(I + 1, R + 1)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.i + 1, self.r + 1)
    }

    pub fn u(&self, i: usize) -> f64 {
        i as f64 / self.i as f64
    }

    pub fn nu(&self, r: usize) -> f64 {
        r as f64 / self.r as f64
    }
}

impl Default for ActivityGrid {
    fn default() -> Self {
        ActivityGrid { i: 10, r: 10 }
    }
}

/// First-order moments of one subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub e_u: f64,
    pub e_nu: f64,
}

/// Probability mass table of one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    grid: ActivityGrid,
    f: Array2<f64>,
}

impl Distribution {
    /// Checked constructor: shape must match the grid, entries must be finite
    /// and nonnegative, and the total mass must be one within [`MASS_TOL`].
    pub fn new(grid: ActivityGrid, f: Array2<f64>) -> Result<Self> {
        let d = Distribution { grid, f };
        d.validate()?;
        Ok(d)
    }

    /// No checks; used for intermediate Runge–Kutta stages.
    pub(crate) fn from_raw(grid: ActivityGrid, f: Array2<f64>) -> Self {
        debug_assert_eq!(f.dim(), grid.shape());
        Distribution { grid, f }
    }

    pub fn uniform(grid: ActivityGrid) -> Self {
        let (nu, nr) = grid.shape();
        let w = 1.0 / (nu * nr) as f64;
        Distribution::from_raw(grid, Array2::from_elem((nu, nr), w))
    }

    pub fn dirac(grid: ActivityGrid, i: usize, r: usize) -> Result<Self> {
        let (nu, nr) = grid.shape();
        if i >= nu || r >= nr {
            return Err(Error::invalid(format!(
                "node ({i}, {r}) is outside the {nu}x{nr} grid"
            )));
        }
        let mut f = Array2::zeros((nu, nr));
        f[[i, r]] = 1.0;
        Ok(Distribution::from_raw(grid, f))
    }

    /// Product of a `u`-marginal and a `ν`-marginal.
    pub fn from_marginals(grid: ActivityGrid, u: &[f64], nu: &[f64]) -> Result<Self> {
        let (nu_len, nr_len) = grid.shape();
        if u.len() != nu_len || nu.len() != nr_len {
            return Err(Error::invalid(format!(
                "marginals of length {} and {} do not fit the {nu_len}x{nr_len} grid",
                u.len(),
                nu.len()
            )));
        }
        let f = Array2::from_shape_fn((nu_len, nr_len), |(i, r)| u[i] * nu[r]);
        Distribution::new(grid, f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.f.dim() != self.grid.shape() {
            return Err(Error::invalid(format!(
                "table shape {:?} does not match grid shape {:?}",
                self.f.dim(),
                self.grid.shape()
            )));
        }
        if let Some(bad) = self.f.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::invalid(format!(
                "mass entries must be finite and nonnegative, found {bad}"
            )));
        }
        let mass = self.mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::invalid(format!("total mass {mass} is not 1")));
        }
        Ok(())
    }

    pub fn grid(&self) -> ActivityGrid {
        self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.f
    }

    pub fn get(&self, i: usize, r: usize) -> f64 {
        self.f[[i, r]]
    }

    pub fn mass(&self) -> f64 {
        self.f.sum()
    }

    pub fn min_entry(&self) -> f64 {
        self.f.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Σ_r f_ir` for each `i`.
    pub fn u_marginal(&self) -> Vec<f64> {
        self.f.sum_axis(Axis(1)).to_vec()
    }

    /// `Σ_i f_ir` for each `r`.
    pub fn nu_marginal(&self) -> Vec<f64> {
        self.f.sum_axis(Axis(0)).to_vec()
    }

    pub fn moments(&self) -> Moments {
        let e_u = self
            .u_marginal()
            .iter()
            .enumerate()
            .map(|(i, m)| self.grid.u(i) * m)
            .sum();
        let e_nu = self
            .nu_marginal()
            .iter()
            .enumerate()
            .map(|(r, m)| self.grid.nu(r) * m)
            .sum();
        Moments { e_u, e_nu }
    }
}

pub fn moments(d: &Distribution) -> Moments {
    d.moments()
}

/// Full dynamical state: one distribution per subsystem on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationState {
    grid: ActivityGrid,
    dists: [Distribution; 3],
    pub t: f64,
}

impl PopulationState {
    pub fn new(dists: [Distribution; 3], t: f64) -> Result<Self> {
        let grid = dists[0].grid();
        if dists.iter().any(|d| d.grid() != grid) {
            return Err(Error::invalid("all subsystems must share one grid"));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid(format!("time must be >= 0, got {t}")));
        }
        for (s, d) in SubsystemId::ALL.iter().zip(&dists) {
            d.validate()
                .map_err(|e| Error::invalid(format!("{s}: {e}")))?;
        }
        Ok(PopulationState { grid, dists, t })
    }

    pub(crate) fn from_raw(grid: ActivityGrid, dists: [Distribution; 3], t: f64) -> Self {
        PopulationState { grid, dists, t }
    }

    pub fn grid(&self) -> ActivityGrid {
        self.grid
    }

    pub fn dist(&self, s: SubsystemId) -> &Distribution {
        &self.dists[s.index()]
    }

    pub fn dists(&self) -> &[Distribution; 3] {
        &self.dists
    }

    pub fn moments(&self) -> [Moments; 3] {
        [
            self.dists[0].moments(),
            self.dists[1].moments(),
            self.dists[2].moments(),
        ]
    }
}
