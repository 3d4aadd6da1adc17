//! Empirical distribution function and order-statistic quantiles.

use crate::error::{domain, Error, Result};

/// Sorted copy of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of the sample `≤ x`.
    pub fn edf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|v| *v <= x) as f64 / self.len() as f64
    }

    /// The order statistic `x_(i)` with `i = ⌈n p⌉`, i.e. `x_(i)` for
    /// `p ∈ ((i-1)/n, i/n]`. `p = 0` maps to the minimum.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain(format!(
                "quantile level must lie in [0, 1], got {p}"
            )));
        }
        let n = self.len();
        let mut i = ((n as f64 * p).ceil() as usize).clamp(1, n);
        // n·p can round up past an integer (10 · 0.3 = 3.0000000000000004)
        if i > 1 && (i - 1) as f64 / n as f64 >= p {
            i -= 1;
        }
        Ok(self.sorted[i - 1])
    }
}

pub fn edf(values: &[f64], x: f64) -> Result<f64> {
    Ok(EmpiricalDistribution::new(values)?.edf(x))
}

pub fn sample_quantile(values: &[f64], p: f64) -> Result<f64> {
    EmpiricalDistribution::new(values)?.quantile(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert!((edf(&[1.0, 2.0, 3.0], 2.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(sample_quantile(&[4.0, 1.0, 3.0, 2.0], 0.5).unwrap(), 2.0);
        assert_eq!(sample_quantile(&[4.0, 1.0, 3.0, 2.0], 1.0).unwrap(), 4.0);
        assert_eq!(sample_quantile(&[4.0, 1.0, 3.0, 2.0], 0.0).unwrap(), 1.0);
        assert_eq!(sample_quantile(&[4.0, 1.0, 3.0, 2.0], 0.51).unwrap(), 3.0);
        assert!(matches!(edf(&[], 0.0), Err(Error::Empty)));
        assert!(sample_quantile(&[1.0], 1.5).is_err());
        assert!(edf(&[1.0, f64::NAN], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn quantile_is_the_smallest_value_with_edf_at_least_p(
            values in proptest::collection::vec(-1e3f64..1e3, 1..2000),
            p in 0.001f64..1.0,
        ) {
            let e = EmpiricalDistribution::new(&values).unwrap();
            let q = e.quantile(p).unwrap();
            // brute force over a full sort: inf{x : EDF(x) ≥ p}
            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            let brute = sorted.iter().copied().find(|&x| e.edf(x) >= p).unwrap();
            prop_assert_eq!(q, brute);
        }
    }
}
