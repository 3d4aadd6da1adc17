//! Out-of-sample coverage: how often the next observation falls below the
//! current online `p`-quantile estimate.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::estimator::{Estimator, EstimatorConfig};
use crate::quantile::QuantileTracker;

/// Shortest stream the coverage test accepts.
pub const MIN_COVERAGE_LENGTH: u64 = 1000;

/// Observations the estimator must absorb before its estimates count.
/// Static standardization needs two observations for a scale estimate.
const READY_COUNT: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub quantiles: Vec<f64>,
    /// Fraction of evaluated steps with `x_{i+1} < q̂_i(p)`.
    pub frequencies: Vec<f64>,
    pub below: Vec<u64>,
    /// Steps that had an estimate for the level.
    pub evaluated: Vec<u64>,
    /// Steps skipped because the inversion did not converge.
    pub non_converged: Vec<u64>,
    /// Leading steps skipped while the estimator warmed up.
    pub warmup_excluded: u64,
    pub observations: u64,
}

/// Streaming coverage counter: call [`observe`](Self::observe) per value.
#[derive(Debug, Clone)]
pub struct CoverageCounter {
    estimator: Estimator,
    quantiles: Vec<f64>,
    trackers: Vec<QuantileTracker>,
    /// Estimates from the state before the next observation.
    pending: Vec<Option<f64>>,
    below: Vec<u64>,
    evaluated: Vec<u64>,
    non_converged: Vec<u64>,
    warmup_excluded: u64,
}

impl CoverageCounter {
    pub fn new(config: EstimatorConfig, quantiles: &[f64]) -> Result<Self> {
        if let Some(p) = quantiles.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
            return Err(domain(format!(
                "quantile level must lie in (0, 1), got {p}"
            )));
        }
        let n = quantiles.len();
        Ok(Self {
            estimator: Estimator::new(config)?,
            quantiles: quantiles.to_vec(),
            trackers: vec![QuantileTracker::new(); n],
            pending: vec![None; n],
            below: vec![0; n],
            evaluated: vec![0; n],
            non_converged: vec![0; n],
            warmup_excluded: 0,
        })
    }

    pub fn observe(&mut self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(crate::Error::NonFinite(x));
        }
        let ready = self.estimator.count() >= READY_COUNT;
        if ready {
            for (i, estimate) in self.pending.iter().enumerate() {
                match estimate {
                    Some(q) => {
                        self.evaluated[i] += 1;
                        if x < *q {
                            self.below[i] += 1;
                        }
                    }
                    None => self.non_converged[i] += 1,
                }
            }
        } else if self.estimator.count() > 0 {
            self.warmup_excluded += 1;
        }
        self.estimator.observe(x)?;
        if self.estimator.count() >= READY_COUNT {
            let snap = self.estimator.snapshot()?;
            for (i, p) in self.quantiles.iter().enumerate() {
                let r = self.trackers[i].estimate(&snap, *p)?;
                self.pending[i] = r.value.filter(|_| r.converged);
            }
        }
        Ok(())
    }

    pub fn estimator(&self) -> &Estimator {
        &self.estimator
    }

    pub fn report(&self) -> CoverageReport {
        CoverageReport {
            quantiles: self.quantiles.clone(),
            frequencies: self
                .below
                .iter()
                .zip(&self.evaluated)
                .map(|(&b, &e)| {
                    if e == 0 {
                        f64::NAN
                    } else {
                        b as f64 / e as f64
                    }
                })
                .collect(),
            below: self.below.clone(),
            evaluated: self.evaluated.clone(),
            non_converged: self.non_converged.clone(),
            warmup_excluded: self.warmup_excluded,
            observations: self.estimator.count(),
        }
    }
}

/// Runs the coverage test over a whole stream of at least
/// [`MIN_COVERAGE_LENGTH`] values.
pub fn coverage_test(
    stream: impl IntoIterator<Item = f64>,
    config: EstimatorConfig,
    quantiles: &[f64],
) -> Result<CoverageReport> {
    let mut counter = CoverageCounter::new(config, quantiles)?;
    for x in stream {
        counter.observe(x)?;
    }
    let report = counter.report();
    if report.observations < MIN_COVERAGE_LENGTH {
        return Err(domain(format!(
            "coverage test needs at least {MIN_COVERAGE_LENGTH} observations, got {}",
            report.observations
        )));
    }
    Ok(report)
}
