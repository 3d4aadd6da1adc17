//! Stream generators: which distribution produces observation `j`.

use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::law::Law;
use crate::error::{Error, Result};

/// Drift per update used by both drifting models.
pub const DRIFT_RATE: f64 = 0.006;

/// A (possibly non-stationary) stream model. Observation indices `j` start
/// at 1; observation `j` is drawn from `law_at(j)` independently of the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StreamModel {
    /// χ² with five degrees of freedom.
    ChiSquared5,
    /// Exponential with unit mean.
    ExponentialUnit,
    /// Unit-variance normal with mean `rate·j`.
    NormalDrift {
        rate: f64,
    },
    /// Exponential with mean (and standard deviation) `1 + rate·j`.
    ExponentialDrift {
        rate: f64,
    },
    /// The first `s + 1` observations from `before`, the rest from `after`.
    ChangePoint {
        before: Law,
        after: Law,
        s: u64,
    },
    Pareto {
        alpha: f64,
        x_min: f64,
    },
    /// Any fixed law, i.i.d.
    Iid {
        law: Law,
    },
}

impl StreamModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StreamModel::NormalDrift { rate } | StreamModel::ExponentialDrift { rate } => {
                if !rate.is_finite() || rate < 0.0 {
                    return Err(Error::Config(format!(
                        "drift rate must be >= 0, got {rate}"
                    )));
                }
                Ok(())
            }
            StreamModel::ChangePoint { before, after, .. } => {
                before.validate()?;
                after.validate()
            }
            StreamModel::Pareto { alpha, x_min } => Law::Pareto { alpha, x_min }.validate(),
            StreamModel::Iid { law } => law.validate(),
            StreamModel::ChiSquared5 | StreamModel::ExponentialUnit => Ok(()),
        }
    }

    /// Distribution of observation `j` (1-based).
    pub fn law_at(&self, j: u64) -> Law {
        match *self {
            StreamModel::ChiSquared5 => Law::ChiSquared { dof: 5.0 },
            StreamModel::ExponentialUnit => Law::Exponential { mean: 1.0 },
            StreamModel::NormalDrift { rate } => Law::Normal {
                mean: rate * j as f64,
                sd: 1.0,
            },
            StreamModel::ExponentialDrift { rate } => Law::Exponential {
                mean: 1.0 + rate * j as f64,
            },
            StreamModel::ChangePoint { before, after, s } => {
                if j <= s + 1 {
                    before
                } else {
                    after
                }
            }
            StreamModel::Pareto { alpha, x_min } => Law::Pareto { alpha, x_min },
            StreamModel::Iid { law } => law,
        }
    }

    /// True `p`-quantile of observation `j`'s distribution.
    pub fn true_quantile(&self, j: u64, p: f64) -> Result<f64> {
        self.law_at(j).quantile(p)
    }

    pub fn sample<R: Rng + ?Sized>(&self, j: u64, rng: &mut R) -> f64 {
        self.law_at(j).sample(rng)
    }

    /// Observations per run in the standard protocol.
    pub fn default_observations(&self) -> usize {
        match self {
            StreamModel::NormalDrift { .. } | StreamModel::ExponentialDrift { .. } => 1000,
            StreamModel::ChangePoint { s, .. } => 2 * (*s as usize + 1),
            _ => 4000,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match *self {
            StreamModel::NormalDrift { .. } => false,
            StreamModel::ChangePoint { before, after, .. } => {
                before.is_nonnegative() && after.is_nonnegative()
            }
            _ => self.law_at(1).is_nonnegative(),
        }
    }
}

impl FromStr for StreamModel {
    type Err = Error;

    /// Short names with the standard default parameters.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "chi2" | "chi-squared" | "chi-squared-5" => StreamModel::ChiSquared5,
            "exp" | "exponential" | "exponential-unit" => StreamModel::ExponentialUnit,
            "normal-drift" => StreamModel::NormalDrift { rate: DRIFT_RATE },
            "exp-drift" | "exponential-drift" => StreamModel::ExponentialDrift { rate: DRIFT_RATE },
            "change-point" => StreamModel::ChangePoint {
                before: Law::Normal { mean: 0.0, sd: 1.0 },
                after: Law::Normal { mean: 5.0, sd: 1.0 },
                s: 500,
            },
            "pareto" => StreamModel::Pareto {
                alpha: 3.5,
                x_min: 1.0,
            },
            "normal" => StreamModel::Iid {
                law: Law::Normal { mean: 0.0, sd: 1.0 },
            },
            other => {
                return Err(Error::Config(format!(
                    "unknown model '{other}' (expected chi2, exp, normal, normal-drift, \
                     exp-drift, change-point or pareto)"
                )))
            }
        })
    }
}
