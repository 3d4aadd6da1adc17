//! Parametric distributions used as ground truth in simulations.

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, Exp, Normal, Pareto};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::special::{gamma_fn, lower_gamma, normal_cdf, normal_pdf, normal_quantile};

/// A fixed distribution with closed-form (or high-precision) density, CDF
/// and quantile function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Law {
    Normal {
        mean: f64,
        sd: f64,
    },
    /// Exponential parameterized by its mean (= standard deviation).
    Exponential {
        mean: f64,
    },
    ChiSquared {
        dof: f64,
    },
    /// Power law `f(x) = (α-1)/x_min · (x/x_min)^(-α)` on `x ≥ x_min`.
    Pareto {
        alpha: f64,
        x_min: f64,
    },
}

impl Law {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Law::Normal { mean, sd } => mean.is_finite() && sd > 0.0 && sd.is_finite(),
            Law::Exponential { mean } => mean > 0.0 && mean.is_finite(),
            Law::ChiSquared { dof } => dof > 0.0 && dof.is_finite(),
            Law::Pareto { alpha, x_min } => alpha > 1.0 && x_min > 0.0 && x_min.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid distribution parameters {self:?}"
            )))
        }
    }

    /// Lower end of the support.
    pub fn support_low(&self) -> f64 {
        match *self {
            Law::Normal { .. } => f64::NEG_INFINITY,
            Law::Exponential { .. } | Law::ChiSquared { .. } => 0.0,
            Law::Pareto { x_min, .. } => x_min,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.support_low() >= 0.0
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Law::Normal { mean, sd } => normal_pdf((x - mean) / sd) / sd,
            Law::Exponential { mean } => {
                if x < 0.0 {
                    0.0
                } else {
                    (-x / mean).exp() / mean
                }
            }
            Law::ChiSquared { dof } => {
                let k = 0.5 * dof;
                if x <= 0.0 {
                    return match (x == 0.0, dof) {
                        (true, d) if d < 2.0 => f64::INFINITY,
                        (true, 2.0) => 0.5,
                        _ => 0.0,
                    };
                }
                let log = (k - 1.0) * x.ln()
                    - 0.5 * x
                    - k * 2f64.ln()
                    - gamma_fn(k).expect("dof validated").ln();
                log.exp()
            }
            Law::Pareto { alpha, x_min } => {
                if x < x_min {
                    0.0
                } else {
                    (alpha - 1.0) / x_min * (x / x_min).powf(-alpha)
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Law::Normal { mean, sd } => normal_cdf((x - mean) / sd),
            Law::Exponential { mean } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x / mean).exp_m1()
                }
            }
            Law::ChiSquared { dof } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let k = 0.5 * dof;
                    lower_gamma(k, 0.5 * x).expect("dof validated")
                        / gamma_fn(k).expect("dof validated")
                }
            }
            Law::Pareto { alpha, x_min } => {
                if x <= x_min {
                    0.0
                } else {
                    1.0 - (x / x_min).powf(1.0 - alpha)
                }
            }
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(domain(format!(
                "quantile level must lie in (0, 1), got {p}"
            )));
        }
        Ok(match *self {
            Law::Normal { mean, sd } => mean + sd * normal_quantile(p)?,
            Law::Exponential { mean } => -mean * (-p).ln_1p(),
            Law::ChiSquared { dof } => self.bisect_cdf(p, 0.0, dof + 40.0 * dof.sqrt() + 100.0),
            Law::Pareto { alpha, x_min } => x_min * (1.0 - p).powf(-1.0 / (alpha - 1.0)),
        })
    }

    /// Inverts a continuous increasing CDF on `[lo, hi]` to full precision.
    fn bisect_cdf(&self, p: f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi.abs() {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Law::Normal { mean, .. } | Law::Exponential { mean } => mean,
            Law::ChiSquared { dof } => dof,
            Law::Pareto { alpha, x_min } => {
                if alpha > 2.0 {
                    x_min * (alpha - 1.0) / (alpha - 2.0)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Law::Normal { sd, .. } => sd * sd,
            Law::Exponential { mean } => mean * mean,
            Law::ChiSquared { dof } => 2.0 * dof,
            Law::Pareto { alpha, x_min } => {
                if alpha > 3.0 {
                    x_min * x_min * (alpha - 1.0) / ((alpha - 3.0) * (alpha - 2.0).powi(2))
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Law::Normal { mean, sd } => Normal::new(mean, sd).expect("validated").sample(rng),
            Law::Exponential { mean } => Exp::new(1.0 / mean).expect("validated").sample(rng),
            Law::ChiSquared { dof } => ChiSquared::new(dof).expect("validated").sample(rng),
            Law::Pareto { alpha, x_min } => Pareto::new(x_min, alpha - 1.0)
                .expect("validated")
                .sample(rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared as RefChi, ContinuousCDF};

    #[test]
    #[allow(clippy::approx_constant)] // four-digit reference values
    fn exact_quantiles_from_the_figures() {
        let chi = Law::ChiSquared { dof: 5.0 };
        for (p, q) in [(0.5, 4.3515), (0.9, 9.2364), (0.99, 15.0863)] {
            assert!((chi.quantile(p).unwrap() - q).abs() < 5e-5, "{p}");
        }
        let exp = Law::Exponential { mean: 1.0 };
        for (p, q) in [(0.5, 0.6931), (0.9, 2.3026), (0.99, 4.6052)] {
            assert!((exp.quantile(p).unwrap() - q).abs() < 5e-5);
        }
    }

    #[test]
    fn chi_squared_matches_statrs() {
        let reference = RefChi::new(5.0).unwrap();
        let chi = Law::ChiSquared { dof: 5.0 };
        for x in [0.1, 1.0, 4.0, 9.0, 20.0] {
            assert!((chi.cdf(x) - reference.cdf(x)).abs() < 1e-13);
        }
        for p in [0.01, 0.3, 0.77, 0.999] {
            assert!((chi.quantile(p).unwrap() - reference.inverse_cdf(p)).abs() < 1e-8);
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let laws = [
            Law::Normal { mean: 2.0, sd: 3.0 },
            Law::Exponential { mean: 4.0 },
            Law::ChiSquared { dof: 3.0 },
            Law::Pareto {
                alpha: 3.5,
                x_min: 1.5,
            },
        ];
        for law in laws {
            for p in [0.05, 0.5, 0.95] {
                let q = law.quantile(p).unwrap();
                assert!((law.cdf(q) - p).abs() < 1e-10, "{law:?} {p}");
            }
        }
    }

    #[test]
    fn pdf_integrates_to_one() {
        let laws = [
            (Law::Exponential { mean: 1.0 }, 0.0, 60.0),
            (Law::ChiSquared { dof: 5.0 }, 0.0, 120.0),
            (
                Law::Pareto {
                    alpha: 3.0,
                    x_min: 1.0,
                },
                1.0,
                1e4,
            ),
        ];
        for (law, a, b) in laws {
            let n = 200_000;
            let h = (b - a) / n as f64;
            let mass: f64 = (0..n).map(|i| law.pdf(a + (i as f64 + 0.5) * h) * h).sum();
            assert!((mass - law.cdf(b)).abs() < 1e-3, "{law:?} {mass}");
        }
    }

    #[test]
    fn sample_moments_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let laws = [
            Law::ChiSquared { dof: 5.0 },
            Law::Exponential { mean: 1.0 },
            Law::Normal { mean: 6.0, sd: 1.0 },
            Law::Exponential { mean: 7.0 },
            Law::Pareto {
                alpha: 6.0,
                x_min: 1.0,
            },
        ];
        for law in laws {
            let n = 100_000;
            let xs: Vec<f64> = (0..n).map(|_| law.sample(&mut rng)).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se_mean = (law.variance() / n as f64).sqrt();
            assert!(
                (mean - law.mean()).abs() < 3.0 * se_mean,
                "{law:?} mean {mean}"
            );
            let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n as f64;
            let se_var = ((m4 - var * var) / n as f64).sqrt();
            assert!(
                (var - law.variance()).abs() < 3.0 * se_var,
                "{law:?} var {var}"
            );
        }
    }

    #[test]
    fn validation() {
        assert!(Law::Pareto {
            alpha: 1.0,
            x_min: 1.0
        }
        .validate()
        .is_err());
        assert!(Law::Normal { mean: 0.0, sd: 0.0 }.validate().is_err());
        assert!(Law::Exponential { mean: 1.0 }.validate().is_ok());
        assert!(Law::Normal { mean: 0.0, sd: 1.0 }.quantile(1.0).is_err());
    }
}
