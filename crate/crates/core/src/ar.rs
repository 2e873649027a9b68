//! Macroscopic innovation function and the "blocking" region.
//!
//! The ruler's payoff difference between innovating and blocking is
//!
//! ```text
//! F(μ, γ; α) = α·P[1/2 + μ] − P[1/2 + γμ − (α − 1)]
//! ```
//!
//! where `P` clamps to `[0, 1]`, `μ` is the inverse level of political
//! competition, `γ` the erosion of the ruler's power caused by innovation and
//! `α` the production gain of innovation. Blocking happens where `F < 0`; the
//! boundary `F = 0` is not blocking.
//!
//! `F` is piecewise linear in `μ` with at most three kinks, so every scan in
//! this module samples the kinks in addition to the regular grid. That makes
//! sign detection exact regardless of the grid step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Literature value of the non-negativity threshold for γ = 2. It does not
/// agree with the closed form `(−1 + √33)/4 ≈ 1.18614` on `μ ∈ (0, 1)`;
/// callers report both.
pub const PUBLISHED_MIN_ALPHA_NONNEGATIVE: f64 = 1.167;

/// Default μ step of the blocking scanner.
pub const DEFAULT_SCAN_STEP: f64 = 1e-4;

/// Bisection stops on an exact zero of `F` or once the bracket is narrower
/// than this.
pub const ROOT_WIDTH_TOL: f64 = 1e-12;

const MAX_SCAN_POINTS: usize = 50_000_000;
const INNER_SCAN_POINTS: usize = 10_000;
const MAX_BRACKET_DOUBLINGS: usize = 64;

/// Parameters of the innovation function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArParams {
    /// Inverse measure of political competition, `> 0`.
    pub mu: f64,
    /// Innovation turbulence, `> 1`.
    pub gamma: f64,
    /// Production effect of innovation, `>= 1`.
    pub alpha: f64,
}

impl ArParams {
    pub fn new(mu: f64, gamma: f64, alpha: f64) -> Result<Self> {
        let p = ArParams { mu, gamma, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::invalid(format!(
                "mu must be finite and > 0, got {}",
                self.mu
            )));
        }
        check_gamma_alpha(self.gamma, self.alpha)
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && gamma > 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "gamma must be finite and > 1, got {gamma}"
        )))
    }
}

fn check_gamma_alpha(gamma: f64, alpha: f64) -> Result<()> {
    check_gamma(gamma)?;
    if alpha.is_finite() && alpha >= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "alpha must be finite and >= 1, got {alpha}"
        )))
    }
}

/// Maximal μ interval on which blocking holds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuInterval {
    pub lo: f64,
    pub hi: f64,
}

impl MuInterval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, mu: f64) -> bool {
        self.lo < mu && mu < self.hi
    }
}

/// Clamp to the unit interval.
pub fn clamp_unit(h: f64) -> Result<f64> {
    if !h.is_finite() {
        return Err(Error::invalid(format!(
            "clamp_unit needs a finite input, got {h}"
        )));
    }
    Ok(clamp(h))
}

#[inline]
fn clamp(h: f64) -> f64 {
    if h < 0.0 {
        0.0
    } else if h > 1.0 {
        1.0
    } else {
        h
    }
}

#[inline]
fn subtracted_term(mu: f64, gamma: f64, alpha: f64) -> f64 {
    clamp(0.5 + gamma * mu - (alpha - 1.0))
}

#[inline]
fn innovation(mu: f64, gamma: f64, alpha: f64) -> f64 {
    alpha * clamp(0.5 + mu) - subtracted_term(mu, gamma, alpha)
}

/// Evaluates `F(μ, γ; α)`.
pub fn innovation_value(p: &ArParams) -> Result<f64> {
    p.validate()?;
    Ok(innovation(p.mu, p.gamma, p.alpha))
}

/// `true` exactly when the innovation function is strictly negative.
pub fn is_blocking(p: &ArParams) -> Result<bool> {
    Ok(innovation_value(p)? < 0.0)
}

/// μ values where one of the two clamps switches branch.
fn kinks(gamma: f64, alpha: f64) -> [f64; 3] {
    [0.5, (alpha - 1.5) / gamma, (alpha - 0.5) / gamma]
}

/// Regular grid over `[lo, hi]` (both ends included) merged with the kinks
/// that fall strictly inside.
fn scan_points(lo: f64, hi: f64, step: f64, gamma: f64, alpha: f64) -> Result<Vec<f64>> {
    let n = ((hi - lo) / step).floor();
    if !(n.is_finite() && (n as usize) < MAX_SCAN_POINTS) {
        return Err(Error::invalid(format!(
            "scan of [{lo}, {hi}] with step {step} needs too many points"
        )));
    }
    let n = n as usize;
    let mut pts: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).collect();
    if pts[n] < hi {
        pts.push(hi);
    }
    pts.extend(
        kinks(gamma, alpha)
            .into_iter()
            .filter(|&m| m > lo && m < hi),
    );
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup();
    Ok(pts)
}

/// Locates the sign boundary of `F` inside `[a, b]`, where `a` is on the
/// `a_negative` side and `b` on the other.
fn refine_boundary(mut a: f64, mut b: f64, a_negative: bool, gamma: f64, alpha: f64) -> f64 {
    loop {
        let m = 0.5 * (a + b);
        let fm = innovation(m, gamma, alpha);
        if fm == 0.0 || (b - a).abs() <= ROOT_WIDTH_TOL {
            return m;
        }
        if (fm < 0.0) == a_negative {
            a = m;
        } else {
            b = m;
        }
    }
}

/// Maximal sub-intervals of `[mu_lo, mu_hi]` on which `F < 0`.
///
/// Sign changes are detected on a grid of the given step (plus the kinks of
/// `F`) and then refined by bisection.
pub fn blocking_intervals(
    gamma: f64,
    alpha: f64,
    mu_lo: f64,
    mu_hi: f64,
    step: f64,
) -> Result<Vec<MuInterval>> {
    check_gamma_alpha(gamma, alpha)?;
    if !(mu_lo.is_finite() && mu_hi.is_finite() && 0.0 < mu_lo && mu_lo < mu_hi) {
        return Err(Error::invalid(format!(
            "blocking scan needs 0 < mu_lo < mu_hi, got [{mu_lo}, {mu_hi}]"
        )));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::invalid(format!("scan step must be > 0, got {step}")));
    }

    let pts = scan_points(mu_lo, mu_hi, step, gamma, alpha)?;
    let mut out = Vec::new();
    let mut open: Option<f64> = None;
    let mut prev_mu = pts[0];
    let mut prev_neg = innovation(prev_mu, gamma, alpha) < 0.0;
    if prev_neg {
        open = Some(mu_lo);
    }
    for &mu in &pts[1..] {
        let neg = innovation(mu, gamma, alpha) < 0.0;
        if neg != prev_neg {
            let edge = refine_boundary(prev_mu, mu, prev_neg, gamma, alpha);
            match open.take() {
                Some(lo) => out.push(MuInterval { lo, hi: edge }),
                None => open = Some(edge),
            }
        }
        prev_mu = mu;
        prev_neg = neg;
    }
    if let Some(lo) = open {
        out.push(MuInterval { lo, hi: mu_hi });
    }
    Ok(out)
}

fn check_alpha_search(gamma: f64, mu_lo: f64, mu_hi: f64, tol: f64) -> Result<()> {
    check_gamma(gamma)?;
    if !(mu_lo.is_finite() && mu_hi.is_finite() && 0.0 <= mu_lo && mu_lo < mu_hi) {
        return Err(Error::invalid(format!(
            "alpha search needs 0 <= mu_lo < mu_hi, got [{mu_lo}, {mu_hi}]"
        )));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be > 0, got {tol}")));
    }
    Ok(())
}

/// Smallest `α >= 1` satisfying a predicate that is monotone in `α`.
///
/// The predicate must fail at `α = 1`; the upper end of the bracket is found
/// by doubling. Returns the upper end of the final bracket, so the result
/// always satisfies the predicate and lies within `tol` of the threshold.
fn bisect_alpha(tol: f64, holds: impl Fn(f64) -> bool) -> Result<f64> {
    let mut lo = 1.0;
    if holds(lo) {
        return Err(Error::BracketFailure { lo, hi: lo });
    }
    let mut hi = 2.0;
    let mut doublings = 0;
    while !holds(hi) {
        doublings += 1;
        if doublings > MAX_BRACKET_DOUBLINGS {
            return Err(Error::BracketFailure { lo, hi });
        }
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn inner_scan(gamma: f64, alpha: f64, mu_lo: f64, mu_hi: f64) -> impl Iterator<Item = f64> {
    let step = (mu_hi - mu_lo) / INNER_SCAN_POINTS as f64;
    (0..=INNER_SCAN_POINTS)
        .map(move |k| {
            if k == INNER_SCAN_POINTS {
                mu_hi
            } else {
                mu_lo + k as f64 * step
            }
        })
        .chain(
            kinks(gamma, alpha)
                .into_iter()
                .filter(move |&m| m > mu_lo && m < mu_hi),
        )
}

/// Smallest `α` such that `F(μ, γ; α) >= 0` for every `μ` in `[mu_lo, mu_hi]`.
pub fn min_alpha_nonnegative(gamma: f64, mu_lo: f64, mu_hi: f64, tol: f64) -> Result<f64> {
    check_alpha_search(gamma, mu_lo, mu_hi, tol)?;
    bisect_alpha(tol, |alpha| {
        inner_scan(gamma, alpha, mu_lo, mu_hi).all(|mu| innovation(mu, gamma, alpha) >= 0.0)
    })
}

/// Smallest `α` for which the subtracted term `P[1/2 + γμ − (α − 1)]`
/// vanishes on all of `[mu_lo, mu_hi]`, making `F` linear in `μ` there
/// (up to the saturation of the leading clamp).
pub fn min_alpha_linear(gamma: f64, mu_lo: f64, mu_hi: f64, tol: f64) -> Result<f64> {
    check_alpha_search(gamma, mu_lo, mu_hi, tol)?;
    bisect_alpha(tol, |alpha| {
        inner_scan(gamma, alpha, mu_lo, mu_hi).all(|mu| subtracted_term(mu, gamma, alpha) == 0.0)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterPoint {
    pub mu: f64,
    pub gamma: f64,
    #[serde(rename = "F")]
    pub f: f64,
}

/// Innovation function sampled on a tensor grid. Rows are γ values, columns
/// μ values; `points` is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Raster {
    pub alpha: f64,
    pub n_mu: usize,
    pub n_gamma: usize,
    pub points: Vec<RasterPoint>,
}

impl Raster {
    pub fn at(&self, gamma_idx: usize, mu_idx: usize) -> &RasterPoint {
        &self.points[gamma_idx * self.n_mu + mu_idx]
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| {
        if n == 1 {
            lo
        } else if k == n - 1 {
            hi
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    })
}

/// Samples `F` on `n_mu × n_gamma` evenly spaced nodes (ends included).
/// A count of one samples the lower end of its range.
pub fn raster(
    mu_range: (f64, f64),
    gamma_range: (f64, f64),
    alpha: f64,
    n_mu: usize,
    n_gamma: usize,
) -> Result<Raster> {
    if n_mu == 0 || n_gamma == 0 {
        return Err(Error::invalid("raster needs at least one node per axis"));
    }
    let (mu_lo, mu_hi) = mu_range;
    let (g_lo, g_hi) = gamma_range;
    if !(mu_lo.is_finite() && mu_hi.is_finite() && 0.0 < mu_lo && mu_lo <= mu_hi) {
        return Err(Error::invalid(format!(
            "raster mu range must satisfy 0 < lo <= hi, got [{mu_lo}, {mu_hi}]"
        )));
    }
    if !(g_lo <= g_hi) {
        return Err(Error::invalid(format!(
            "raster gamma range must satisfy lo <= hi, got [{g_lo}, {g_hi}]"
        )));
    }
    check_gamma_alpha(g_lo, alpha)?;
    check_gamma(g_hi)?;

    let mus: Vec<f64> = linspace(mu_lo, mu_hi, n_mu).collect();
    let points = linspace(g_lo, g_hi, n_gamma)
        .flat_map(|gamma| {
            mus.iter().map(move |&mu| RasterPoint {
                mu,
                gamma,
                f: innovation(mu, gamma, alpha),
            })
        })
        .collect();
    Ok(Raster {
        alpha,
        n_mu,
        n_gamma,
        points,
    })
}
