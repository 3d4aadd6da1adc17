//! Truncated Gauss-Hermite density and its closed-form distribution
//! functions.
//!
//! Integrating `H_k(x) Z(x)` term by term turns every CDF into a double sum
//! over incomplete gamma functions evaluated at `x²/2`. The shape parameters
//! `(k - 2l + 1)/2` only take the `N + 1` values `1/2, 1, …, (N+1)/2`, so a
//! query costs `N + 1` incomplete gamma evaluations plus `O(N²)` arithmetic
//! against the precomputed [`CdfTable`].

use serde::{Deserialize, Serialize};

use crate::coefficients::MAX_ORDER;
use crate::error::{domain, Error, Result};
use crate::special::{gamma_fn, hermite_fill, incomplete_gamma_parts, ln_factorial, normal_pdf};

/// Which integral of the truncated density is reported as the CDF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CdfVariant {
    /// `∫_{-∞}^x f̂`, exact integral of the truncated expansion.
    FullLine,
    /// Same as `FullLine` for `x < 0`; for `x ≥ 0` the total mass is taken
    /// to be one, i.e. `1 - ∫_x^∞ f̂`.
    #[default]
    Alternative,
    /// `∫_0^x f̂` for data supported on `[0, ∞)`.
    PositiveSupport,
}

impl CdfVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            CdfVariant::FullLine => "full_line",
            CdfVariant::Alternative => "alternative",
            CdfVariant::PositiveSupport => "positive_support",
        }
    }
}

impl std::str::FromStr for CdfVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "full_line" => Ok(CdfVariant::FullLine),
            "alternative" => Ok(CdfVariant::Alternative),
            "positive_support" => Ok(CdfVariant::PositiveSupport),
            other => Err(Error::Config(format!("unknown CDF variant {other:?}"))),
        }
    }
}

/// Truncated expansion `Σ_k â_k H_k(x) Z(x)`. May be negative.
pub fn pdf(a_hat: &[f64], x: f64) -> f64 {
    let z = normal_pdf(x);
    if z == 0.0 || a_hat.is_empty() {
        return 0.0;
    }
    let mut h = [0.0; MAX_ORDER + 1];
    let h = &mut h[..a_hat.len()];
    hermite_fill(x, h);
    a_hat.iter().zip(h.iter()).map(|(a, h)| a * h).sum::<f64>() * z
}

/// Constants of the CDF double sums for one truncation order.
///
/// `weight[k][l] = k! (-1)^l 2^{3k/2 - 3l - 1} / (l! (k-2l)! √π)` multiplies
/// an incomplete gamma function with shape `(k - 2l + 1)/2`; `gamma[m]`
/// holds `Γ((m+1)/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfTable {
    order: usize,
    weight: Vec<Vec<f64>>,
    gamma: Vec<f64>,
}

impl CdfTable {
    pub fn new(order: usize) -> Result<Self> {
        if order > MAX_ORDER {
            return Err(Error::Config(format!(
                "truncation order {order} exceeds the maximum of {MAX_ORDER}"
            )));
        }
        let ln2 = std::f64::consts::LN_2;
        let half_ln_pi = 0.5 * std::f64::consts::PI.ln();
        let weight = (0..=order)
            .map(|k| {
                (0..=k / 2)
                    .map(|l| {
                        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                        let log_mag = ln_factorial(k) - ln_factorial(l) - ln_factorial(k - 2 * l)
                            + (1.5 * k as f64 - 3.0 * l as f64 - 1.0) * ln2
                            - half_ln_pi;
                        sign * log_mag.exp()
                    })
                    .collect()
            })
            .collect();
        let gamma = (0..=order)
            .map(|m| gamma_fn(0.5 * (m as f64 + 1.0)))
            .collect::<Result<_>>()?;
        Ok(Self {
            order,
            weight,
            gamma,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `weight[k][l]` as described on the type.
    pub fn weight(&self, k: usize, l: usize) -> Option<f64> {
        self.weight.get(k)?.get(l).copied()
    }

    /// `∫_{-∞}^{∞} f̂`, which only involves the even orders.
    pub fn total_mass(&self, a_hat: &[f64]) -> f64 {
        self.check_len(a_hat);
        a_hat
            .iter()
            .enumerate()
            .filter(|(k, _)| k % 2 == 0)
            .map(|(k, a)| {
                let inner: f64 = self.weight[k]
                    .iter()
                    .enumerate()
                    .map(|(l, w)| w * self.gamma[k - 2 * l])
                    .sum();
                2.0 * a * inner
            })
            .sum()
    }

    /// Raw (unclamped) CDF estimate at `x`.
    pub fn cdf(&self, a_hat: &[f64], x: f64, variant: CdfVariant) -> Result<f64> {
        if x.is_nan() {
            return Err(domain("CDF abscissa is NaN"));
        }
        if variant == CdfVariant::PositiveSupport && x < 0.0 {
            return Err(domain(format!(
                "positive-support CDF is only defined for x >= 0, got {x}"
            )));
        }
        self.check_len(a_hat);
        let z = 0.5 * x * x;
        let mut lower = [0.0; MAX_ORDER + 1];
        let mut upper = [0.0; MAX_ORDER + 1];
        for m in 0..a_hat.len() {
            let (lo, up) = incomplete_gamma_parts(0.5 * (m as f64 + 1.0), z, self.gamma[m])?;
            lower[m] = lo;
            upper[m] = up;
        }
        let sum_over = |values: &[f64], alternate: bool| -> f64 {
            a_hat
                .iter()
                .enumerate()
                .map(|(k, a)| {
                    let inner: f64 = self.weight[k]
                        .iter()
                        .enumerate()
                        .map(|(l, w)| w * values[k - 2 * l])
                        .sum();
                    let sign = if alternate && k % 2 == 1 { -1.0 } else { 1.0 };
                    sign * a * inner
                })
                .sum()
        };
        let value = match variant {
            _ if x < 0.0 => sum_over(&upper, true),
            CdfVariant::FullLine => sum_over(&self.gamma, true) + sum_over(&lower, false),
            CdfVariant::Alternative => 1.0 - sum_over(&upper, false),
            CdfVariant::PositiveSupport => sum_over(&lower, false),
        };
        Ok(value)
    }

    /// CDF estimate truncated to `[0, 1]`.
    pub fn cdf_clamped(&self, a_hat: &[f64], x: f64, variant: CdfVariant) -> Result<f64> {
        self.cdf(a_hat, x, variant).map(|v| v.clamp(0.0, 1.0))
    }

    fn check_len(&self, a_hat: &[f64]) {
        assert_eq!(
            a_hat.len(),
            self.order + 1,
            "coefficient vector does not match the CDF table order"
        );
    }
}
