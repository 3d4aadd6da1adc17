//! Multi-run RMSE experiments with percentile-bootstrap confidence intervals.

use std::io::{self, Write};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::baseline::SlidingWindow;
use super::model::StreamModel;
use crate::error::{Error, Result};
use crate::estimator::{Estimator, EstimatorConfig};
use crate::oracle::EmpiricalDistribution;
use crate::quantile::QuantileTracker;

/// Mixed into the seed of the bootstrap generator so it never shares a
/// stream with run 0.
const BOOTSTRAP_SALT: u64 = 0x5EED_B007_57A9_0001;

/// Which online quantile estimator a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum Algorithm {
    /// The Gauss-Hermite estimator configured by `ExperimentSpec::config`.
    Hermite,
    /// Empirical quantiles of the last `window` observations.
    SlidingWindow { window: usize },
}

/// Steps `j` (1-based) at which estimates are recorded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    /// Every `stride`-th step, plus the last one.
    Stride(usize),
    Checkpoints(Vec<usize>),
}

impl Schedule {
    pub fn steps(&self, observations: usize) -> Vec<usize> {
        match self {
            Schedule::Stride(stride) => {
                let stride = (*stride).max(1);
                let mut steps: Vec<usize> = (stride..=observations).step_by(stride).collect();
                if steps.last() != Some(&observations) && observations > 0 {
                    steps.push(observations);
                }
                steps
            }
            Schedule::Checkpoints(js) => {
                let mut steps: Vec<usize> = js
                    .iter()
                    .copied()
                    .filter(|&j| j >= 1 && j <= observations)
                    .collect();
                steps.sort_unstable();
                steps.dedup();
                steps
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub model: StreamModel,
    pub config: EstimatorConfig,
    pub algorithm: Algorithm,
    pub quantiles: Vec<f64>,
    pub observations: usize,
    pub runs: usize,
    pub bootstrap_resamples: usize,
    pub seed: u64,
    pub schedule: Schedule,
}

impl ExperimentSpec {
    /// The standard protocol for `model`: quantiles 0.5/0.9/0.99, 1000 runs,
    /// 1000 bootstrap resamples, every step recorded.
    pub fn new(model: StreamModel, config: EstimatorConfig) -> Self {
        Self {
            observations: model.default_observations(),
            model,
            config,
            algorithm: Algorithm::Hermite,
            quantiles: vec![0.5, 0.9, 0.99],
            runs: 1000,
            bootstrap_resamples: 1000,
            seed: 0,
            schedule: Schedule::Stride(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.config.validate()?;
        if self.runs < 2 {
            return Err(Error::Config(format!(
                "need at least 2 runs, got {}",
                self.runs
            )));
        }
        if self.observations == 0 {
            return Err(Error::Config(
                "need at least one observation per run".into(),
            ));
        }
        if self.quantiles.is_empty() || self.quantiles.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
            return Err(Error::Config(format!(
                "quantile levels must lie in (0, 1), got {:?}",
                self.quantiles
            )));
        }
        if let Algorithm::SlidingWindow { window: 0 } = self.algorithm {
            return Err(Error::Config("window must hold at least one value".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmsePoint {
    pub j: usize,
    pub truth: f64,
    pub rmse: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Runs that produced an estimate at this step.
    pub valid_runs: usize,
    pub mean_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmseCurve {
    pub p: f64,
    pub points: Vec<RmsePoint>,
}

impl RmseCurve {
    pub fn at(&self, j: usize) -> Option<&RmsePoint> {
        self.points.iter().find(|pt| pt.j == j)
    }

    pub fn last(&self) -> Option<&RmsePoint> {
        self.points.last()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub curves: Vec<RmseCurve>,
    /// Runs aborted by an estimator error.
    pub failed_runs: usize,
    pub elapsed_secs: f64,
}

impl ExperimentReport {
    pub fn curve(&self, p: f64) -> Option<&RmseCurve> {
        self.curves.iter().find(|c| c.p == p)
    }

    /// One row per (quantile, step): `p,j,rmse,ci_low,ci_high`, shortest
    /// round-trip number formatting.
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "p,j,rmse,ci_low,ci_high")?;
        for c in &self.curves {
            for pt in &c.points {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    c.p, pt.j, pt.rmse, pt.ci_low, pt.ci_high
                )?;
            }
        }
        Ok(())
    }

    /// Config echo, timing and the final point of each curve.
    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "spec": self.spec,
            "failed_runs": self.failed_runs,
            "elapsed_secs": self.elapsed_secs,
            "final": self.curves.iter().map(|c| serde_json::json!({
                "p": c.p,
                "point": c.last(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Root mean squared error of `estimates` around `truth`.
pub fn rmse(estimates: &[f64], truth: f64) -> f64 {
    let n = estimates.len() as f64;
    (estimates.iter().map(|e| (e - truth).powi(2)).sum::<f64>() / n).sqrt()
}

/// 95% percentile-bootstrap interval for the RMSE, resampling per-run
/// squared errors with replacement.
pub fn bootstrap_rmse_ci<R: Rng + ?Sized>(
    squared_errors: &[f64],
    resamples: usize,
    rng: &mut R,
) -> (f64, f64) {
    let n = squared_errors.len();
    if n == 0 || resamples == 0 {
        return (f64::NAN, f64::NAN);
    }
    let boot: Vec<f64> = (0..resamples)
        .map(|_| {
            let sum: f64 = (0..n).map(|_| squared_errors[rng.random_range(0..n)]).sum();
            (sum / n as f64).sqrt()
        })
        .collect();
    let dist = EmpiricalDistribution::new(&boot).expect("bootstrap values are finite");
    (
        dist.quantile(0.025).expect("valid level"),
        dist.quantile(0.975).expect("valid level"),
    )
}

enum Runner {
    Hermite(Estimator, Vec<QuantileTracker>),
    Window(SlidingWindow),
}

impl Runner {
    fn new(spec: &ExperimentSpec) -> Result<Self> {
        Ok(match spec.algorithm {
            Algorithm::Hermite => Runner::Hermite(
                Estimator::new(spec.config.clone())?,
                vec![QuantileTracker::new(); spec.quantiles.len()],
            ),
            Algorithm::SlidingWindow { window } => Runner::Window(SlidingWindow::new(window)?),
        })
    }

    fn observe(&mut self, x: f64) -> Result<()> {
        match self {
            Runner::Hermite(est, _) => est.observe(x),
            Runner::Window(w) => w.observe(x),
        }
    }

    /// Estimates for every level; NaN marks a missing estimate.
    fn estimates(&mut self, quantiles: &[f64], out: &mut Vec<f64>) -> Result<()> {
        match self {
            Runner::Hermite(est, trackers) => {
                let snap = est.snapshot()?;
                for (p, tracker) in quantiles.iter().zip(trackers.iter_mut()) {
                    let r = tracker.estimate(&snap, *p)?;
                    out.push(r.value.unwrap_or(f64::NAN));
                }
            }
            Runner::Window(w) => {
                for p in quantiles {
                    out.push(w.quantile(*p)?);
                }
            }
        }
        Ok(())
    }
}

/// Streams `spec.observations` values through a fresh estimator per run,
/// recording quantile estimates at the scheduled steps; returns a flat
/// `[step][quantile]` table.
fn simulate_run(spec: &ExperimentSpec, steps: &[usize], run: usize) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(run as u64));
    let mut runner = Runner::new(spec)?;
    let mut out = Vec::with_capacity(steps.len() * spec.quantiles.len());
    let mut next = steps.iter().peekable();
    for j in 1..=spec.observations {
        runner.observe(spec.model.sample(j as u64, &mut rng))?;
        if next.peek() == Some(&&j) {
            next.next();
            runner.estimates(&spec.quantiles, &mut out)?;
        }
    }
    Ok(out)
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let started = Instant::now();
    let steps = spec.schedule.steps(spec.observations);
    let nq = spec.quantiles.len();

    let results: Vec<Result<Vec<f64>>> = (0..spec.runs)
        .into_par_iter()
        .map(|run| simulate_run(spec, &steps, run))
        .collect();
    let failed_runs = results.iter().filter(|r| r.is_err()).count();
    let tables: Vec<Vec<f64>> = results.into_iter().filter_map(|r| r.ok()).collect();

    let cells: Vec<(usize, usize)> = (0..nq)
        .flat_map(|qi| (0..steps.len()).map(move |si| (qi, si)))
        .collect();
    let points: Vec<RmsePoint> = cells
        .par_iter()
        .enumerate()
        .map(|(cell, &(qi, si))| {
            let j = steps[si];
            let truth = spec.model.true_quantile(j as u64, spec.quantiles[qi])?;
            let estimates: Vec<f64> = tables
                .iter()
                .map(|t| t[si * nq + qi])
                .filter(|v| v.is_finite())
                .collect();
            let sq: Vec<f64> = estimates.iter().map(|e| (e - truth).powi(2)).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ BOOTSTRAP_SALT);
            rng.set_stream(cell as u64);
            let (ci_low, ci_high) = bootstrap_rmse_ci(&sq, spec.bootstrap_resamples, &mut rng);
            Ok(RmsePoint {
                j,
                truth,
                rmse: if sq.is_empty() {
                    f64::NAN
                } else {
                    rmse(&estimates, truth)
                },
                ci_low,
                ci_high,
                valid_runs: estimates.len(),
                mean_estimate: estimates.iter().sum::<f64>() / estimates.len() as f64,
            })
        })
        .collect::<Result<_>>()?;

    let curves = spec
        .quantiles
        .iter()
        .enumerate()
        .map(|(qi, &p)| RmseCurve {
            p,
            points: points[qi * steps.len()..(qi + 1) * steps.len()].to_vec(),
        })
        .collect();
    Ok(ExperimentReport {
        spec: spec.clone(),
        curves,
        failed_runs,
        elapsed_secs: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_by_hand() {
        assert_eq!(rmse(&[1.0, 3.0], 2.0), 1.0);
        assert_eq!(rmse(&[2.0], 2.0), 0.0);
    }

    #[test]
    fn schedules() {
        assert_eq!(Schedule::Stride(3).steps(10), vec![3, 6, 9, 10]);
        assert_eq!(Schedule::Stride(5).steps(10), vec![5, 10]);
        assert_eq!(Schedule::Stride(0).steps(3), vec![1, 2, 3]);
        assert_eq!(
            Schedule::Checkpoints(vec![400, 100, 100, 5000]).steps(4000),
            vec![100, 400]
        );
    }

    #[test]
    fn bootstrap_interval_is_ordered() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sq: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin().powi(2)).collect();
        let (lo, hi) = bootstrap_rmse_ci(&sq, 500, &mut rng);
        assert!(lo <= hi);
        let point = (sq.iter().sum::<f64>() / 50.0).sqrt();
        assert!(lo < point + 0.1 && hi > point - 0.1);
        let (a, b) = bootstrap_rmse_ci(&[], 10, &mut rng);
        assert!(a.is_nan() && b.is_nan());
    }

    #[test]
    fn spec_validation() {
        let mut spec = ExperimentSpec::new(StreamModel::ChiSquared5, EstimatorConfig::default());
        assert!(spec.validate().is_ok());
        assert_eq!(spec.observations, 4000);
        spec.runs = 1;
        assert!(spec.validate().is_err());
        spec.runs = 2;
        spec.quantiles = vec![1.0];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn small_experiment_is_deterministic() {
        let mut spec =
            ExperimentSpec::new(StreamModel::ExponentialUnit, EstimatorConfig::default());
        spec.runs = 8;
        spec.observations = 300;
        spec.bootstrap_resamples = 50;
        spec.schedule = Schedule::Stride(100);
        spec.seed = 42;
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        assert_eq!(a.curves, b.curves);
        let mut csv_a = Vec::new();
        a.write_csv(&mut csv_a).unwrap();
        let mut csv_b = Vec::new();
        b.write_csv(&mut csv_b).unwrap();
        assert_eq!(csv_a, csv_b);
        let text = String::from_utf8(csv_a).unwrap();
        assert!(text.starts_with("p,j,rmse,ci_low,ci_high\n"));
        assert_eq!(text.lines().count(), 1 + 3 * 3);
        for c in &a.curves {
            for pt in &c.points {
                assert!(pt.rmse >= 0.0 && pt.ci_low <= pt.ci_high);
                assert_eq!(pt.valid_runs, 8);
            }
        }
        assert_eq!(a.failed_runs, 0);
    }

    #[test]
    fn sliding_window_runs() {
        let mut spec = ExperimentSpec::new(
            "normal-drift".parse().unwrap(),
            EstimatorConfig::ewgh(6, 0.01),
        );
        spec.algorithm = Algorithm::SlidingWindow { window: 200 };
        spec.runs = 4;
        spec.bootstrap_resamples = 20;
        spec.schedule = Schedule::Checkpoints(vec![1000]);
        let r = run_experiment(&spec).unwrap();
        let last = r.curve(0.5).unwrap().last().unwrap();
        assert_eq!(last.j, 1000);
        // a 200-wide window lags the trend by about 100 steps: 0.6 units
        assert!((last.mean_estimate - (6.0 - 0.6)).abs() < 0.3);
    }
}
