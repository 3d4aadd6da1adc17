//! Integrated errors, true coefficients by quadrature, and Monte Carlo checks
//! of the MSE bounds and EWGH variance/MSE identities.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::integrate;
use crate::coefficients::term;
use crate::density::CdfVariant;
use crate::error::{domain, Error, Result};
use crate::estimator::{DistributionSnapshot, Estimator, EstimatorConfig};
use crate::simulate::Law;

/// Absolute tolerance for the integrals behind true coefficients.
const COEFFICIENT_TOL: f64 = 1e-10;
/// Absolute tolerance for per-run integrated errors.
const ISE_TOL: f64 = 1e-8;

/// Outcome of a Monte Carlo comparison. `lhs[i]` and `rhs[i]` are the two
/// sides at `grid[i]`; `stderr[i]` is the Monte Carlo standard error used by
/// the 3-standard-error rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub check: String,
    pub grid: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub stderr: Vec<f64>,
    pub pass: bool,
    pub runs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundReport {
    fn insufficient(check: &str, grid: Vec<f64>, runs: usize) -> Self {
        Self {
            check: check.into(),
            grid,
            lhs: Vec::new(),
            rhs: Vec::new(),
            stderr: Vec::new(),
            pass: false,
            runs,
            note: Some(format!(
                "insufficient samples: {runs} run(s), need at least 2"
            )),
        }
    }
}

/// Monte Carlo sizes. Run `r` draws from its own generator seeded with
/// `seed + r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSettings {
    pub runs: usize,
    pub observations: usize,
    pub seed: u64,
}

fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(run as u64))
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean of `xs`.
fn std_error(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let n = xs.len() as f64;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

/// `∫ (f̂ - f)²` over `support`.
pub fn ise(
    snapshot: &DistributionSnapshot,
    true_pdf: impl Fn(f64) -> f64,
    support: (f64, f64),
) -> Result<f64> {
    let v = integrate(
        |x| (snapshot.pdf_at(x) - true_pdf(x)).powi(2),
        support.0,
        support.1,
        ISE_TOL,
    )?;
    Ok(v.max(0.0))
}

/// ISE over the whole line against `law`, split at the edge of its support
/// so the quadrature never straddles a kink.
pub fn ise_against(snapshot: &DistributionSnapshot, law: &Law) -> Result<f64> {
    let edge = law.support_low();
    if edge.is_finite() {
        let left = ise(snapshot, |_| 0.0, (f64::NEG_INFINITY, edge))?;
        let right = ise(snapshot, |x| law.pdf(x), (edge, f64::INFINITY))?;
        Ok(left + right)
    } else {
        ise(snapshot, |x| law.pdf(x), (f64::NEG_INFINITY, f64::INFINITY))
    }
}

fn law_integral(law: &Law, g: impl Fn(f64) -> f64) -> Result<f64> {
    let lo = law.support_low();
    integrate(|x| g(x) * law.pdf(x), lo, f64::INFINITY, COEFFICIENT_TOL)
}

/// `a_k = α_k ∫ Z(x) H_k(x) f(x) dx`.
pub fn true_coefficient(law: &Law, k: usize) -> Result<f64> {
    law_integral(law, |x| term(x, k).map(|t| t[k]).unwrap_or(0.0))
}

/// `σ²_X(k) = Var[α_k Z(X) H_k(X)]`.
pub fn term_variance(law: &Law, k: usize) -> Result<f64> {
    let a = true_coefficient(law, k)?;
    let second = law_integral(law, |x| term(x, k).map(|t| t[k] * t[k]).unwrap_or(0.0))?;
    Ok((second - a * a).max(0.0))
}

/// Exact variance of an EWGH coefficient after `n + 1` i.i.d. observations
/// with per-observation term variance `var`.
pub fn ewgh_iid_variance(lambda: f64, n: u64, var: f64) -> f64 {
    let r = (1.0 - lambda).powf(2.0 * n as f64);
    (lambda / (2.0 - lambda) * (1.0 - r) + r) * var
}

/// Exact MSE of an EWGH coefficient, relative to the post-change value
/// `a2`, after `s + 1` observations from the first law and `t` from the
/// second: squared bias plus variance.
pub fn ewgh_change_point_mse(
    lambda: f64,
    s: u64,
    t: u64,
    (a1, var1): (f64, f64),
    (a2, var2): (f64, f64),
) -> f64 {
    let w = lambda / (2.0 - lambda);
    let q_t = (1.0 - lambda).powf(2.0 * t as f64);
    let q_st = (1.0 - lambda).powf(2.0 * (s + t) as f64);
    let bias_sq = q_t * (a1 - a2).powi(2);
    let variance = var1 * (w * q_t + (1.0 - w) * q_st) + var2 * w * (1.0 - q_t);
    bias_sq + variance
}

fn unstandardized(config: &EstimatorConfig) -> EstimatorConfig {
    EstimatorConfig {
        cdf_variant: CdfVariant::PositiveSupport,
        standardize: false,
        ..config.clone()
    }
}

fn positive_law(law: &Law) -> Result<()> {
    law.validate()?;
    if !law.is_nonnegative() {
        return Err(Error::Config(format!(
            "bound checks need a distribution on [0, inf), got {law:?}"
        )));
    }
    Ok(())
}

fn stream_snapshot(
    law: &Law,
    config: &EstimatorConfig,
    n: usize,
    seed: u64,
    run: usize,
) -> Result<DistributionSnapshot> {
    let mut rng = run_rng(seed, run);
    let mut est = Estimator::new(config.clone())?;
    for _ in 0..n {
        est.observe(law.sample(&mut rng))?;
    }
    est.snapshot()
}

/// Pointwise CDF MSE against `x · MISE` for the positive-support CDF on raw
/// (unstandardized) data. Each run contributes `x·ISE - (F̂(x) - F(x))²`,
/// which the Cauchy-Schwarz argument makes non-negative, so the check passes
/// when `MSE ≤ x·MISE + 3 SE` at every grid point.
pub fn check_cdf_mse_bound(
    law: &Law,
    config: &EstimatorConfig,
    grid: &[f64],
    mc: &McSettings,
) -> Result<BoundReport> {
    const CHECK: &str = "cdf-mse-bound";
    positive_law(law)?;
    if grid.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(domain("grid points must be finite and non-negative"));
    }
    if mc.runs < 2 {
        return Ok(BoundReport::insufficient(CHECK, grid.to_vec(), mc.runs));
    }
    let config = unstandardized(config);
    let per_run: Vec<(f64, Vec<f64>)> = (0..mc.runs)
        .into_par_iter()
        .map(|r| {
            let snap = stream_snapshot(law, &config, mc.observations, mc.seed, r)?;
            let ise = ise_against(&snap, law)?;
            let errs = grid
                .iter()
                .map(|&x| Ok((snap.cdf_at(x)? - law.cdf(x)).powi(2)))
                .collect::<Result<Vec<_>>>()?;
            Ok((ise, errs))
        })
        .collect::<Result<_>>()?;

    let mise = mean(&per_run.iter().map(|r| r.0).collect::<Vec<_>>());
    let mut report = BoundReport {
        check: CHECK.into(),
        grid: grid.to_vec(),
        lhs: Vec::new(),
        rhs: Vec::new(),
        stderr: Vec::new(),
        pass: true,
        runs: mc.runs,
        note: Some(format!("MISE = {mise}")),
    };
    for (i, &x) in grid.iter().enumerate() {
        let errs: Vec<f64> = per_run.iter().map(|r| r.1[i]).collect();
        let gaps: Vec<f64> = per_run.iter().map(|r| x * r.0 - r.1[i]).collect();
        let lhs = mean(&errs);
        let rhs = x * mise;
        let se = std_error(&gaps);
        report.pass &= lhs <= rhs + 3.0 * se;
        report.lhs.push(lhs);
        report.rhs.push(rhs);
        report.stderr.push(se);
    }
    Ok(report)
}

/// `ω̄² = E ∫ (F̂ - F)² f` against `MISE · μ`, positive-support CDF on raw
/// data. The grid holds the single point `μ`.
pub fn check_omega_bound(
    law: &Law,
    config: &EstimatorConfig,
    mc: &McSettings,
) -> Result<BoundReport> {
    const CHECK: &str = "omega-bound";
    positive_law(law)?;
    let mu = law.mean();
    if !mu.is_finite() {
        return Err(Error::Config(format!("{law:?} has no finite mean")));
    }
    if mc.runs < 2 {
        return Ok(BoundReport::insufficient(CHECK, vec![mu], mc.runs));
    }
    let config = unstandardized(config);
    let lo = law.support_low();
    let per_run: Vec<(f64, f64)> = (0..mc.runs)
        .into_par_iter()
        .map(|r| {
            let snap = stream_snapshot(law, &config, mc.observations, mc.seed, r)?;
            let ise = ise_against(&snap, law)?;
            let omega = integrate(
                |x| {
                    let f = law.pdf(x);
                    if f == 0.0 {
                        return 0.0;
                    }
                    let fh = snap.cdf_at(x).unwrap_or(f64::NAN);
                    (fh - law.cdf(x)).powi(2) * f
                },
                lo,
                f64::INFINITY,
                ISE_TOL,
            )?;
            Ok((ise, omega))
        })
        .collect::<Result<_>>()?;
    let omegas: Vec<f64> = per_run.iter().map(|r| r.1).collect();
    let gaps: Vec<f64> = per_run.iter().map(|r| mu * r.0 - r.1).collect();
    let lhs = mean(&omegas);
    let mise = mean(&per_run.iter().map(|r| r.0).collect::<Vec<_>>());
    let rhs = mu * mise;
    let se = std_error(&gaps);
    Ok(BoundReport {
        check: CHECK.into(),
        grid: vec![mu],
        lhs: vec![lhs],
        rhs: vec![rhs],
        stderr: vec![se],
        pass: lhs <= rhs + 3.0 * se,
        runs: mc.runs,
        note: Some(format!("MISE = {mise}, mean = {mu}")),
    })
}

/// Monte Carlo variance of `â_k` after `n + 1` i.i.d. observations against
/// the exact EWGH expression. The grid holds the orders `k`; the standard
/// error of a sample variance uses the fourth central moment.
pub fn check_ewgh_variance(
    law: &Law,
    lambda: f64,
    n: u64,
    orders: &[usize],
    runs: usize,
    seed: u64,
) -> Result<BoundReport> {
    const CHECK: &str = "ewgh-variance";
    law.validate()?;
    let grid: Vec<f64> = orders.iter().map(|&k| k as f64).collect();
    if runs < 2 {
        return Ok(BoundReport::insufficient(CHECK, grid, runs));
    }
    let top = orders.iter().copied().max().unwrap_or(0).max(1);
    let config = EstimatorConfig {
        standardize: false,
        ..EstimatorConfig::ewgh(top, lambda)
    };
    let coefficients: Vec<Vec<f64>> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let snap = stream_snapshot(law, &config, n as usize + 1, seed, r)?;
            Ok(snap.a_hat().to_vec())
        })
        .collect::<Result<_>>()?;

    let mut report = BoundReport {
        check: CHECK.into(),
        grid,
        lhs: Vec::new(),
        rhs: Vec::new(),
        stderr: Vec::new(),
        pass: true,
        runs,
        note: Some(format!("lambda = {lambda}, n = {n}")),
    };
    for &k in orders {
        let xs: Vec<f64> = coefficients.iter().map(|a| a[k]).collect();
        let m = mean(&xs);
        let r = runs as f64;
        let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (r - 1.0);
        let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / r;
        let se = ((m4 - var * var).max(0.0) / r).sqrt();
        let rhs = ewgh_iid_variance(lambda, n, term_variance(law, k)?);
        report.pass &= (var - rhs).abs() <= 3.0 * se;
        report.lhs.push(var);
        report.rhs.push(rhs);
        report.stderr.push(se);
    }
    Ok(report)
}

/// Change-point scenario: `s + 1` observations from `before`, then `t` from
/// `after`, for each `t` in `ts`. Compares the Monte Carlo MSE of `â_k`
/// (relative to the post-change coefficient) with the exact squared-bias
/// plus variance expression. The grid holds `t`.
#[allow(clippy::too_many_arguments)]
pub fn check_ewgh_coefficient_mse(
    before: &Law,
    after: &Law,
    s: u64,
    ts: &[u64],
    lambda: f64,
    k: usize,
    runs: usize,
    seed: u64,
) -> Result<BoundReport> {
    const CHECK: &str = "ewgh-coefficient-mse";
    before.validate()?;
    after.validate()?;
    let grid: Vec<f64> = ts.iter().map(|&t| t as f64).collect();
    if runs < 2 {
        return Ok(BoundReport::insufficient(CHECK, grid, runs));
    }
    let config = EstimatorConfig {
        standardize: false,
        ..EstimatorConfig::ewgh(k.max(1), lambda)
    };
    let a1 = true_coefficient(before, k)?;
    let a2 = true_coefficient(after, k)?;
    let v1 = term_variance(before, k)?;
    let v2 = term_variance(after, k)?;
    let t_max = ts.iter().copied().max().unwrap_or(0);

    let errors: Vec<Vec<f64>> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = run_rng(seed, r);
            let mut est = Estimator::new(config.clone())?;
            for _ in 0..=s {
                est.observe(before.sample(&mut rng))?;
            }
            let mut out = vec![0.0; ts.len()];
            let record = |est: &Estimator, t: u64, out: &mut Vec<f64>| {
                for (slot, _) in ts.iter().enumerate().filter(|(_, &tt)| tt == t) {
                    out[slot] = (est.coefficients().a_hat()[k] - a2).powi(2);
                }
            };
            record(&est, 0, &mut out);
            for t in 1..=t_max {
                est.observe(after.sample(&mut rng))?;
                record(&est, t, &mut out);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut report = BoundReport {
        check: CHECK.into(),
        grid,
        lhs: Vec::new(),
        rhs: Vec::new(),
        stderr: Vec::new(),
        pass: true,
        runs,
        note: Some(format!(
            "k = {k}, lambda = {lambda}, s = {s}, a1 = {a1}, a2 = {a2}, var1 = {v1}, var2 = {v2}"
        )),
    };
    for (i, &t) in ts.iter().enumerate() {
        let sq: Vec<f64> = errors.iter().map(|e| e[i]).collect();
        let lhs = mean(&sq);
        let rhs = ewgh_change_point_mse(lambda, s, t, (a1, v1), (a2, v2));
        let se = std_error(&sq);
        report.pass &= (lhs - rhs).abs() <= 3.0 * se;
        report.lhs.push(lhs);
        report.rhs.push(rhs);
        report.stderr.push(se);
    }
    Ok(report)
}
