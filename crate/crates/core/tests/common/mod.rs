//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's kernels, fluxes or scanners.

#![allow(dead_code)]

use kinetic_blocking::kinetic::{ActivityGrid, Distribution, KineticParams, PopulationState};
use ndarray::Array2;
use rand::rngs::StdRng;
use rand::Rng;

pub type Table = Vec<Vec<f64>>;

fn high(mean: f64) -> bool {
    mean >= 0.5
}

fn ind(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// First moments `(e_u, e_nu)` of a table on an `I × R` grid.
pub fn table_means(f: &Table) -> (f64, f64) {
    let ni = f.len() - 1;
    let nr = f[0].len() - 1;
    let mut eu = 0.0;
    let mut en = 0.0;
    for (i, row) in f.iter().enumerate() {
        for (r, &x) in row.iter().enumerate() {
            eu += x * i as f64 / ni as f64;
            en += x * r as f64 / nr as f64;
        }
    }
    (eu, en)
}

/// Probability that a candidate of subsystem `s` at ν-index `p`, meeting a
/// field particle at `(k, q)`, ends at `r`. `h` is the candidate's u-index.
#[allow(clippy::too_many_arguments)]
pub fn d_prob(
    s: usize,
    beta: f64,
    e_u: f64,
    nr: usize,
    h: usize,
    p: usize,
    k: usize,
    q: usize,
    r: usize,
) -> f64 {
    match s {
        1 => {
            if h < k {
                beta * ind(r == q) + (1.0 - beta) * ind(r == p)
            } else {
                ind(r == p)
            }
        }
        _ => {
            if high(e_u) {
                ind(r >= p) / (nr - p + 1) as f64
            } else if p == 0 {
                ind(r == 0)
            } else {
                ind(r < p) / p as f64
            }
        }
    }
}

/// Probability that a candidate of `s` at u-index `h` moves to `i` under the
/// field of subsystem `j`, whose moments are `(e_u, e_nu)`.
pub fn b_prob(
    s: usize,
    j: usize,
    p: &KineticParams,
    e_nu_j: f64,
    ni: usize,
    h: usize,
    i: usize,
) -> f64 {
    let up_uniform = ind(i >= h) / (ni - h + 1) as f64;
    match (s, j) {
        (0, 1) => {
            if high(e_nu_j) {
                up_uniform
            } else if h == 0 {
                ind(i == 0)
            } else {
                ind(i < h) / h as f64
            }
        }
        (0, 2) => {
            if high(e_nu_j) && h > 0 {
                p.gamma_tilde * ind(i + 1 == h) + (1.0 - p.gamma_tilde) * ind(i == h)
            } else {
                ind(i == h)
            }
        }
        (1, 0) => {
            if high(e_nu_j) && h < ni {
                p.alpha_tilde * ind(i == h + 1) + (1.0 - p.alpha_tilde) * ind(i == h)
            } else {
                ind(i == h)
            }
        }
        (2, 0) => {
            if high(e_nu_j) {
                up_uniform
            } else {
                ind(i == h)
            }
        }
        _ => panic!("no influence pair ({s}, {j})"),
    }
}

/// Exhaustive gain/loss enumeration of the right-hand side.
pub fn brute_rhs(f: &[Table; 3], p: &KineticParams) -> [Table; 3] {
    let ni = f[0].len() - 1;
    let nr = f[0][0].len() - 1;
    let means: Vec<(f64, f64)> = f.iter().map(table_means).collect();
    let mut out: [Table; 3] = std::array::from_fn(|_| vec![vec![0.0; nr + 1]; ni + 1]);
    for s in 0..3 {
        let fs = &f[s];
        for i in 0..=ni {
            for r in 0..=nr {
                // within-subsystem: candidate keeps u-index i
                let mut gain = 0.0;
                for pp in 0..=nr {
                    for k in 0..=ni {
                        for q in 0..=nr {
                            gain += d_prob(s, p.beta, means[s].0, nr, i, pp, k, q, r)
                                * fs[i][pp]
                                * fs[k][q];
                        }
                    }
                }
                let mut v = p.eta[s] * (gain - fs[i][r]);
                // cross-subsystem: candidate keeps ν-index r
                for j in 0..3 {
                    let rate = p.mu_rate[s][j];
                    if j == s || rate == 0.0 {
                        continue;
                    }
                    let mut g = 0.0;
                    for h in 0..=ni {
                        g += b_prob(s, j, p, means[j].1, ni, h, i) * fs[h][r];
                    }
                    v += rate * (g - fs[i][r]);
                }
                out[s][i][r] = v;
            }
        }
    }
    out
}

pub fn random_table(rng: &mut StdRng, ni: usize, nr: usize) -> Table {
    // sparse entries now and then, so boundary rows get exercised
    let mut t: Table = (0..=ni)
        .map(|_| {
            (0..=nr)
                .map(|_| {
                    if rng.gen_bool(0.2) {
                        0.0
                    } else {
                        rng.gen::<f64>()
                    }
                })
                .collect()
        })
        .collect();
    let total: f64 = t.iter().flatten().sum();
    if total == 0.0 {
        t[0][0] = 1.0;
        return t;
    }
    for x in t.iter_mut().flatten() {
        *x /= total;
    }
    t
}

pub fn random_params(rng: &mut StdRng) -> KineticParams {
    let mut p = KineticParams {
        alpha_tilde: rng.gen(),
        beta: rng.gen(),
        gamma_tilde: rng.gen(),
        eta: [
            rng.gen_range(0.0..2.0),
            rng.gen_range(0.0..2.0),
            rng.gen_range(0.0..2.0),
        ],
        mu_rate: [[0.0; 3]; 3],
    };
    for (s, j) in [(0, 1), (0, 2), (1, 0), (2, 0)] {
        p.mu_rate[s][j] = if rng.gen_bool(0.2) {
            0.0
        } else {
            rng.gen_range(0.0..2.0)
        };
    }
    p
}

pub fn to_dist(grid: ActivityGrid, t: &Table) -> Distribution {
    let (ni, nr) = grid.shape();
    let f = Array2::from_shape_fn((ni, nr), |(i, r)| t[i][r]);
    Distribution::new(grid, f).expect("normalized table")
}

pub fn to_state(grid: ActivityGrid, f: &[Table; 3]) -> PopulationState {
    PopulationState::new(
        [
            to_dist(grid, &f[0]),
            to_dist(grid, &f[1]),
            to_dist(grid, &f[2]),
        ],
        0.0,
    )
    .expect("valid state")
}

/// Closed-form innovation function.
pub fn f_closed(mu: f64, gamma: f64, alpha: f64) -> f64 {
    let clamp = |h: f64| h.clamp(0.0, 1.0);
    alpha * clamp(0.5 + mu) - clamp(0.5 + gamma * mu - (alpha - 1.0))
}

/// Blocking intervals from the exact piecewise-linear structure: `F` is
/// linear between consecutive breakpoints, so each piece's negative part is
/// found by solving one linear equation.
pub fn exact_blocking(gamma: f64, alpha: f64, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let mut bps = vec![lo, hi];
    for b in [0.5, (alpha - 1.5) / gamma, (alpha - 0.5) / gamma] {
        if b > lo && b < hi {
            bps.push(b);
        }
    }
    bps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<(f64, f64)> = Vec::new();
    for w in bps.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (f_closed(a, gamma, alpha), f_closed(b, gamma, alpha));
        let piece = if fa < 0.0 && fb < 0.0 {
            Some((a, b))
        } else if fa < 0.0 && fb >= 0.0 {
            Some((a, a + (b - a) * fa / (fa - fb)))
        } else if fa >= 0.0 && fb < 0.0 {
            Some((a + (b - a) * fa / (fa - fb), b))
        } else {
            None
        };
        if let Some((x, y)) = piece {
            if y <= x {
                continue;
            }
            match out.last_mut() {
                Some(last) if (last.1 - x).abs() < 1e-15 => last.1 = y,
                _ => out.push((x, y)),
            }
        }
    }
    out
}

/// Negative runs of `F` on the grid `lo, lo + step, …, hi`, reported as
/// `[first negative node, last negative node]`.
pub fn dense_sign_scan(gamma: f64, alpha: f64, lo: f64, hi: f64, step: f64) -> Vec<(f64, f64)> {
    let n = ((hi - lo) / step).floor() as usize;
    let mut out = Vec::new();
    let mut start: Option<f64> = None;
    let mut last = lo;
    for k in 0..=n {
        let mu = lo + k as f64 * step;
        let neg = f_closed(mu, gamma, alpha) < 0.0;
        match (neg, start) {
            (true, None) => start = Some(mu),
            (false, Some(s)) => {
                out.push((s, last));
                start = None;
            }
            _ => {}
        }
        last = mu;
    }
    if let Some(s) = start {
        out.push((s, last));
    }
    out
}

/// `(−1 + √33)/4`: at `γ = 2` the minimum of `F` over `μ` sits at
/// `μ* = (α − 1/2)/2`, where `F = (2α² + α − 4)/4`.
pub fn min_alpha_nonnegative_gamma2() -> f64 {
    (-1.0 + 33f64.sqrt()) / 4.0
}
