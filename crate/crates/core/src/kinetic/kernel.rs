//! Transition probabilities.
//!
//! `D` kernels act inside a subsystem and redistribute the candidate's second
//! component `ν_p → ν_r`. `B` kernels encode the influence of another
//! subsystem's first moments and redistribute the first component
//! `u_h → u_i`. Every row is a probability vector; rows that would push mass
//! off the grid (or have an empty target set) fall back to the identity.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::kinetic::params::regime_high;
use crate::kinetic::{ActivityGrid, KineticParams, Moments, SubsystemId};

/// The four cross-subsystem influences of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Influence {
    /// Citizens' opinion lifts or lowers the ruler's power.
    RulerFromCitizens,
    /// Strong competition erodes the ruler's power one step at a time.
    RulerFromCompeting,
    /// An innovating ruler raises citizen wealth by one step.
    CitizensFromRuler,
    /// An innovating ruler raises competing-group wealth.
    CompetingFromRuler,
}

impl Influence {
    pub const ALL: [Influence; 4] = [
        Influence::RulerFromCitizens,
        Influence::RulerFromCompeting,
        Influence::CitizensFromRuler,
        Influence::CompetingFromRuler,
    ];

    /// Influence on candidates of `s` by the moments of `j`, if the model has one.
    pub fn of(s: SubsystemId, j: SubsystemId) -> Option<Self> {
        use SubsystemId::*;
        match (s, j) {
            (Ruler, Citizens) => Some(Influence::RulerFromCitizens),
            (Ruler, Competing) => Some(Influence::RulerFromCompeting),
            (Citizens, Ruler) => Some(Influence::CitizensFromRuler),
            (Competing, Ruler) => Some(Influence::CompetingFromRuler),
            _ => None,
        }
    }

    pub fn target(self) -> SubsystemId {
        match self {
            Influence::RulerFromCitizens | Influence::RulerFromCompeting => SubsystemId::Ruler,
            Influence::CitizensFromRuler => SubsystemId::Citizens,
            Influence::CompetingFromRuler => SubsystemId::Competing,
        }
    }

    pub fn source(self) -> SubsystemId {
        match self {
            Influence::RulerFromCitizens => SubsystemId::Citizens,
            Influence::RulerFromCompeting => SubsystemId::Competing,
            Influence::CitizensFromRuler | Influence::CompetingFromRuler => SubsystemId::Ruler,
        }
    }
}

fn identity(row: &mut [f64], at: usize) {
    row.fill(0.0);
    row[at] = 1.0;
}

/// Uniform over `{from, …, last}`.
fn uniform_up(row: &mut [f64], from: usize) {
    row.fill(0.0);
    let w = 1.0 / (row.len() - from) as f64;
    row[from..].fill(w);
}

/// Uniform over `{0, …, below − 1}`; identity at 0 when the set is empty.
fn uniform_down(row: &mut [f64], below: usize) {
    if below == 0 {
        identity(row, 0);
        return;
    }
    row.fill(0.0);
    let w = 1.0 / below as f64;
    row[..below].fill(w);
}

/// Mass `a` moves one node away from `h`, the rest stays. Identity when the
/// target is off the grid.
fn one_step(row: &mut [f64], h: usize, a: f64, upward: bool) {
    let target = if upward {
        h.checked_add(1).filter(|&t| t < row.len())
    } else {
        h.checked_sub(1)
    };
    identity(row, h);
    if let Some(t) = target {
        row[h] = 1.0 - a;
        row[t] = a;
    }
}

/// Writes `D^{kq}_{hp}(s)(ν_p → ·)` into `row` (length `R + 1`).
///
/// `means` are the moments of subsystem `s` itself; only the ruler and the
/// competing group use them.
#[allow(clippy::too_many_arguments)]
pub(crate) fn write_d_row(
    s: SubsystemId,
    params: &KineticParams,
    means: Moments,
    h: usize,
    p: usize,
    k: usize,
    q: usize,
    row: &mut [f64],
) {
    match s {
        SubsystemId::Ruler | SubsystemId::Competing => {
            if regime_high(means.e_u) {
                uniform_up(row, p)
            } else {
                uniform_down(row, p)
            }
        }
        SubsystemId::Citizens => {
            identity(row, p);
            // imitation of a strictly wealthier field particle
            if h < k && q != p {
                row[p] -= params.beta;
                row[q] += params.beta;
            }
        }
    }
}

/// Writes `B^j_h(s)(u_h → ·)` into `row` (length `I + 1`).
pub(crate) fn write_b_row(
    inf: Influence,
    params: &KineticParams,
    means_j: Moments,
    h: usize,
    row: &mut [f64],
) {
    let high = regime_high(means_j.e_nu);
    match inf {
        Influence::RulerFromCitizens => {
            if high {
                uniform_up(row, h)
            } else {
                uniform_down(row, h)
            }
        }
        Influence::RulerFromCompeting => {
            if high {
                one_step(row, h, params.gamma_tilde, false)
            } else {
                identity(row, h)
            }
        }
        Influence::CitizensFromRuler => {
            if high {
                one_step(row, h, params.alpha_tilde, true)
            } else {
                identity(row, h)
            }
        }
        Influence::CompetingFromRuler => {
            if high {
                uniform_up(row, h)
            } else {
                identity(row, h)
            }
        }
    }
}

/// Within-subsystem transition row over `r = 0..=R` for a candidate at
/// `(u_h, ν_p)` meeting a field particle at `(u_k, ν_q)`.
#[allow(clippy::too_many_arguments)]
pub fn kernel_d(
    grid: ActivityGrid,
    s: SubsystemId,
    params: &KineticParams,
    means: Moments,
    h: usize,
    p: usize,
    k: usize,
    q: usize,
) -> Result<Vec<f64>> {
    let (nu, nr) = grid.shape();
    if h >= nu || k >= nu || p >= nr || q >= nr {
        return Err(Error::invalid(format!(
            "kernel indices (h={h}, p={p}, k={k}, q={q}) outside the {nu}x{nr} grid"
        )));
    }
    let mut row = vec![0.0; nr];
    write_d_row(s, params, means, h, p, k, q, &mut row);
    Ok(row)
}

/// Cross-subsystem transition row over `i = 0..=I` for a candidate of `s` at
/// `u_h`, driven by the moments of `j`.
pub fn kernel_b(
    grid: ActivityGrid,
    s: SubsystemId,
    j: SubsystemId,
    params: &KineticParams,
    means_j: Moments,
    h: usize,
) -> Result<Vec<f64>> {
    let inf = Influence::of(s, j)
        .ok_or_else(|| Error::invalid(format!("{s} has no influence from {j}")))?;
    let (nu, _) = grid.shape();
    if h >= nu {
        return Err(Error::invalid(format!("index h={h} outside 0..{nu}")));
    }
    let mut row = vec![0.0; nu];
    write_b_row(inf, params, means_j, h, &mut row);
    Ok(row)
}

/// `(R+1)×(R+1)` matrix of `D(s)(ν_p → ν_r)` for the subsystems whose kernel
/// ignores the field particle (ruler and competing group).
pub(crate) fn d_matrix(
    grid: ActivityGrid,
    s: SubsystemId,
    params: &KineticParams,
    means: Moments,
) -> Array2<f64> {
    debug_assert!(s != SubsystemId::Citizens);
    let nr = grid.r_max() + 1;
    let mut m = Array2::zeros((nr, nr));
    for (p, mut row) in m.rows_mut().into_iter().enumerate() {
        write_d_row(
            s,
            params,
            means,
            0,
            p,
            0,
            0,
            row.as_slice_mut().expect("standard layout"),
        );
    }
    m
}

/// `(I+1)×(I+1)` matrix of `B(u_h → u_i)`, rows `h`.
pub(crate) fn b_matrix(
    grid: ActivityGrid,
    inf: Influence,
    params: &KineticParams,
    means_j: Moments,
) -> Array2<f64> {
    let nu = grid.i_max() + 1;
    let mut m = Array2::zeros((nu, nu));
    for (h, mut row) in m.rows_mut().into_iter().enumerate() {
        write_b_row(
            inf,
            params,
            means_j,
            h,
            row.as_slice_mut().expect("standard layout"),
        );
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    const HIGH: Moments = Moments {
        e_u: 0.7,
        e_nu: 0.8,
    };
    const LOW: Moments = Moments {
        e_u: 0.3,
        e_nu: 0.4,
    };

    fn g(i: usize, r: usize) -> ActivityGrid {
        ActivityGrid::new(i, r).unwrap()
    }

    #[test]
    fn ruler_upward_row() {
        let row = kernel_d(
            g(5, 5),
            SubsystemId::Ruler,
            &KineticParams::default(),
            HIGH,
            0,
            2,
            0,
            0,
        )
        .unwrap();
        assert_eq!(row, vec![0.0, 0.0, 0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn ruler_downward_row_and_degenerate_case() {
        let p = KineticParams::default();
        let row = kernel_d(g(5, 5), SubsystemId::Ruler, &p, LOW, 3, 4, 1, 2).unwrap();
        assert_eq!(row, vec![0.25, 0.25, 0.25, 0.25, 0.0, 0.0]);
        let row = kernel_d(g(5, 5), SubsystemId::Ruler, &p, LOW, 0, 0, 0, 0).unwrap();
        assert_eq!(row, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn competing_follows_its_own_wealth() {
        let p = KineticParams::default();
        let up = kernel_d(g(4, 4), SubsystemId::Competing, &p, HIGH, 0, 3, 0, 0).unwrap();
        assert_eq!(up, vec![0.0, 0.0, 0.0, 0.5, 0.5]);
        let down = kernel_d(g(4, 4), SubsystemId::Competing, &p, LOW, 0, 2, 0, 0).unwrap();
        assert_eq!(down, vec![0.5, 0.5, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn citizens_imitate_wealthier() {
        let p = KineticParams::default();
        let row = kernel_d(g(5, 5), SubsystemId::Citizens, &p, LOW, 1, 1, 3, 4).unwrap();
        assert!((row[1] - 0.7).abs() < 1e-15);
        assert!((row[4] - 0.3).abs() < 1e-15);
        assert_eq!(row.iter().filter(|&&x| x != 0.0).count(), 2);
        // equal or lower wealth: no change
        for k in 0..=1 {
            let row = kernel_d(g(5, 5), SubsystemId::Citizens, &p, LOW, 1, 1, k, 4).unwrap();
            assert_eq!(row, vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        }
        // same opinion: identity
        let row = kernel_d(g(5, 5), SubsystemId::Citizens, &p, LOW, 1, 2, 3, 2).unwrap();
        assert_eq!(row[2], 1.0);
    }

    #[test]
    fn ruler_from_competing_erodes() {
        let p = KineticParams::default();
        let m = Moments {
            e_u: 0.0,
            e_nu: 0.8,
        };
        let row = kernel_b(
            g(5, 5),
            SubsystemId::Ruler,
            SubsystemId::Competing,
            &p,
            m,
            3,
        )
        .unwrap();
        assert!((row[2] - 0.9).abs() < 1e-15);
        assert!((row[3] - 0.1).abs() < 1e-15);
        let row = kernel_b(
            g(5, 5),
            SubsystemId::Ruler,
            SubsystemId::Competing,
            &p,
            m,
            0,
        )
        .unwrap();
        assert_eq!(row[0], 1.0);
        let row = kernel_b(
            g(5, 5),
            SubsystemId::Ruler,
            SubsystemId::Competing,
            &p,
            LOW,
            3,
        )
        .unwrap();
        assert_eq!(row[3], 1.0);
    }

    #[test]
    fn citizens_from_ruler_rents() {
        let p = KineticParams::default();
        let m = Moments {
            e_u: 0.0,
            e_nu: 0.6,
        };
        let row = kernel_b(g(5, 5), SubsystemId::Citizens, SubsystemId::Ruler, &p, m, 2).unwrap();
        assert!((row[3] - 0.1).abs() < 1e-15);
        assert!((row[2] - 0.9).abs() < 1e-15);
        let top = kernel_b(g(5, 5), SubsystemId::Citizens, SubsystemId::Ruler, &p, m, 5).unwrap();
        assert_eq!(top[5], 1.0);
        let m = Moments {
            e_u: 0.0,
            e_nu: 0.4,
        };
        for h in 0..=5 {
            let row =
                kernel_b(g(5, 5), SubsystemId::Citizens, SubsystemId::Ruler, &p, m, h).unwrap();
            let mut expected = vec![0.0; 6];
            expected[h] = 1.0;
            assert_eq!(row, expected);
        }
    }

    #[test]
    fn ruler_from_citizens_and_competing_from_ruler() {
        let p = KineticParams::default();
        let row = kernel_b(
            g(4, 4),
            SubsystemId::Ruler,
            SubsystemId::Citizens,
            &p,
            HIGH,
            2,
        )
        .unwrap();
        assert_eq!(row, vec![0.0, 0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
        let row = kernel_b(
            g(4, 4),
            SubsystemId::Ruler,
            SubsystemId::Citizens,
            &p,
            LOW,
            2,
        )
        .unwrap();
        assert_eq!(row, vec![0.5, 0.5, 0.0, 0.0, 0.0]);
        let row = kernel_b(
            g(4, 4),
            SubsystemId::Ruler,
            SubsystemId::Citizens,
            &p,
            LOW,
            0,
        )
        .unwrap();
        assert_eq!(row, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let row = kernel_b(
            g(4, 4),
            SubsystemId::Competing,
            SubsystemId::Ruler,
            &p,
            HIGH,
            3,
        )
        .unwrap();
        assert_eq!(row, vec![0.0, 0.0, 0.0, 0.5, 0.5]);
        let row = kernel_b(
            g(4, 4),
            SubsystemId::Competing,
            SubsystemId::Ruler,
            &p,
            LOW,
            3,
        )
        .unwrap();
        assert_eq!(row, vec![0.0, 0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn invalid_requests() {
        let p = KineticParams::default();
        assert!(kernel_b(
            g(4, 4),
            SubsystemId::Citizens,
            SubsystemId::Competing,
            &p,
            HIGH,
            0
        )
        .is_err());
        assert!(kernel_b(
            g(4, 4),
            SubsystemId::Competing,
            SubsystemId::Citizens,
            &p,
            HIGH,
            0
        )
        .is_err());
        assert!(kernel_b(g(4, 4), SubsystemId::Ruler, SubsystemId::Ruler, &p, HIGH, 0).is_err());
        assert!(kernel_b(
            g(4, 4),
            SubsystemId::Ruler,
            SubsystemId::Citizens,
            &p,
            HIGH,
            5
        )
        .is_err());
        assert!(kernel_d(g(4, 4), SubsystemId::Ruler, &p, HIGH, 0, 5, 0, 0).is_err());
        assert!(kernel_d(g(4, 4), SubsystemId::Citizens, &p, HIGH, 0, 0, 5, 0).is_err());
    }

    #[test]
    fn rows_never_move_the_wrong_way() {
        let p = KineticParams::default();
        let grid = g(8, 8);
        for h in 0..=8 {
            for m in [HIGH, LOW] {
                for (inf, up) in [
                    (Influence::CitizensFromRuler, true),
                    (Influence::CompetingFromRuler, true),
                    (Influence::RulerFromCompeting, false),
                ] {
                    let row = kernel_b(grid, inf.target(), inf.source(), &p, m, h).unwrap();
                    for (i, &w) in row.iter().enumerate() {
                        if w > 0.0 {
                            assert!(if up { i >= h } else { i <= h }, "{inf:?} h={h} i={i}");
                        }
                    }
                }
            }
        }
    }
}
