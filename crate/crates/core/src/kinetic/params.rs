use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Width of the band below 1/2 that still counts as the `E >= 1/2` regime.
///
/// Uniform marginals have a mean of exactly 1/2 but the summed moment can
/// land one ulp below it depending on summation order. Without the band the
/// regime of such states would depend on rounding.
pub const REGIME_TIE_TOL: f64 = 1e-9;

/// `true` for the `E >= 1/2` branch of every regime switch.
#[inline]
pub fn regime_high(mean: f64) -> bool {
    mean >= 0.5 - REGIME_TIE_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsystemId {
    /// `u`: political power, `ν`: propensity to innovate.
    Ruler,
    /// `u`: wealth, `ν`: political opinion of the ruler.
    Citizens,
    /// `u`: wealth, `ν`: political power.
    Competing,
}

impl SubsystemId {
    pub const ALL: [SubsystemId; 3] = [
        SubsystemId::Ruler,
        SubsystemId::Citizens,
        SubsystemId::Competing,
    ];

    /// Zero-based position in per-subsystem arrays.
    pub fn index(self) -> usize {
        match self {
            SubsystemId::Ruler => 0,
            SubsystemId::Citizens => 1,
            SubsystemId::Competing => 2,
        }
    }

    /// One-based label used in column names (`E1_u`, ...).
    pub fn number(self) -> usize {
        self.index() + 1
    }

    pub fn from_index(idx: usize) -> Option<Self> {
        SubsystemId::ALL.get(idx).copied()
    }
}

impl fmt::Display for SubsystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SubsystemId::Ruler => "ruler",
            SubsystemId::Citizens => "citizens",
            SubsystemId::Competing => "competing",
        };
        f.write_str(name)
    }
}

/// Transition-probability scales and encounter rates.
///
/// `mu_rate[s][j]` is the rate at which candidates of subsystem `s` feel the
/// moments of subsystem `j`. Only the four influence pairs of the model may
/// be nonzero: ruler ← citizens, ruler ← competing, citizens ← ruler and
/// competing ← ruler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KineticParams {
    /// Scale of the positive return on citizen wealth.
    pub alpha_tilde: f64,
    /// Citizen susceptibility to imitate a wealthier citizen's opinion.
    pub beta: f64,
    /// Scale of the negative return of competing power on ruler power.
    pub gamma_tilde: f64,
    /// Within-subsystem encounter rates `η_s`.
    pub eta: [f64; 3],
    /// Cross-subsystem encounter rates `μ^j_s`, indexed `[s][j]`.
    pub mu_rate: [[f64; 3]; 3],
}

impl Default for KineticParams {
    fn default() -> Self {
        KineticParams {
            alpha_tilde: 0.1,
            beta: 0.3,
            gamma_tilde: 0.9,
            eta: [1.0; 3],
            mu_rate: [[0.0, 1.0, 1.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
        }
    }
}

fn unit_range(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::out_of_range(
            field,
            format!("must lie in [0, 1], got {v}"),
        ))
    }
}

impl KineticParams {
    pub fn validate(&self) -> Result<()> {
        unit_range("alpha_tilde", self.alpha_tilde)?;
        unit_range("beta", self.beta)?;
        unit_range("gamma_tilde", self.gamma_tilde)?;
        for (s, &eta) in self.eta.iter().enumerate() {
            if !(eta.is_finite() && eta >= 0.0) {
                return Err(Error::out_of_range(
                    format!("eta[{s}]"),
                    format!("must be finite and >= 0, got {eta}"),
                ));
            }
        }
        for s in SubsystemId::ALL {
            for j in SubsystemId::ALL {
                let rate = self.rate(s, j);
                let field = format!("mu_rate[{}][{}]", s.index(), j.index());
                if !(rate.is_finite() && rate >= 0.0) {
                    return Err(Error::out_of_range(
                        field,
                        format!("must be finite and >= 0, got {rate}"),
                    ));
                }
                if rate != 0.0 && crate::kinetic::Influence::of(s, j).is_none() {
                    return Err(Error::out_of_range(
                        field,
                        format!("{s} is not influenced by {j}; rate must be 0, got {rate}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// `μ^j_s`.
    pub fn rate(&self, s: SubsystemId, j: SubsystemId) -> f64 {
        self.mu_rate[s.index()][j.index()]
    }

    pub fn eta(&self, s: SubsystemId) -> f64 {
        self.eta[s.index()]
    }

    /// Largest explicit-Euler step that keeps every entry nonnegative:
    /// `1 / (max_s η_s + max_s Σ_j μ^j_s)`.
    pub fn max_stable_dt(&self) -> f64 {
        let eta = self.eta.iter().copied().fold(0.0, f64::max);
        let cross = self
            .mu_rate
            .iter()
            .map(|row| row.iter().sum::<f64>())
            .fold(0.0, f64::max);
        let total = eta + cross;
        if total > 0.0 {
            1.0 / total
        } else {
            f64::INFINITY
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = KineticParams::default();
        p.validate().unwrap();
        assert_eq!((p.alpha_tilde, p.beta, p.gamma_tilde), (0.1, 0.3, 0.9));
        assert!((p.max_stable_dt() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn range_errors_name_the_field() {
        let p = KineticParams {
            beta: 1.5,
            ..Default::default()
        };
        match p.validate() {
            Err(Error::OutOfRange { field, .. }) => assert_eq!(field, "beta"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unspecified_pairs_must_be_zero() {
        let mut p = KineticParams::default();
        p.mu_rate[1][2] = 0.5;
        assert!(p.validate().is_err());
        let mut p = KineticParams::default();
        p.mu_rate[0][0] = 1.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn tie_uses_upper_branch() {
        assert!(regime_high(0.5));
        assert!(regime_high(0.5 - 1e-16));
        assert!(!regime_high(0.49));
    }
}
