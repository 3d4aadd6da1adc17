//! Quantiles by inverting the estimated CDF.
//!
//! Newton's iteration `x ← x - (F̂(x) - p) / f̂(x)` runs first. If it stalls
//! (flat density, iterate leaving the bracket, iteration cap) the bracket is
//! scanned on a grid and the leftmost cell where `F̂ - p` turns non-negative
//! is bisected, which yields `inf{x : F̂(x) ≥ p}` even when `F̂` is not
//! monotone. All root finding happens in standardized units.

use serde::{Deserialize, Serialize};

use crate::density::CdfVariant;
use crate::error::{domain, Error, Result};
use crate::estimator::DistributionSnapshot;

const MIN_NEWTON_SLOPE: f64 = 1e-12;
const MAX_BISECTIONS: usize = 200;
/// Bracket width (standardized units) below which bisection stops.
const BRACKET_COLLAPSE: f64 = 1e-12;

/// Root-finder knobs. Bracket bounds are in standardized units when the
/// estimator standardizes, data units otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RootFinderSettings {
    /// Target for `|F̂(x̂) - p|`.
    pub tolerance: f64,
    pub max_newton_iters: usize,
    pub bracket_low: f64,
    pub bracket_high: f64,
    /// Grid size for the bisection fallback scan.
    pub grid_points: usize,
    /// Grid size for the density check in [`refine`].
    pub refine_grid_points: usize,
}

impl Default for RootFinderSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_newton_iters: 50,
            bracket_low: -12.0,
            bracket_high: 12.0,
            grid_points: 64,
            refine_grid_points: 256,
        }
    }
}

impl RootFinderSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!(
                "root tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if !(self.bracket_low < self.bracket_high)
            || !self.bracket_low.is_finite()
            || !self.bracket_high.is_finite()
        {
            return Err(Error::Config(format!(
                "bracket [{}, {}] is empty",
                self.bracket_low, self.bracket_high
            )));
        }
        if self.grid_points < 2 || self.refine_grid_points < 2 {
            return Err(Error::Config("grids need at least two points".into()));
        }
        Ok(())
    }
}

/// Outcome of a quantile query, in data units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileResult {
    pub value: Option<f64>,
    pub converged: bool,
    /// Set when [`refine`] discarded the estimate.
    pub refined_rejected: bool,
    /// `F̂(x̂) - p` at the returned point (raw CDF). Exceeds the tolerance
    /// only when `x̂` sits on a jump of `F̂`.
    pub residual: Option<f64>,
}

impl QuantileResult {
    fn failed() -> Self {
        Self {
            value: None,
            converged: false,
            refined_rejected: false,
            residual: None,
        }
    }

    fn found(value: f64, residual: f64) -> Self {
        Self {
            value: Some(value),
            converged: true,
            refined_rejected: false,
            residual: Some(residual),
        }
    }
}

/// Known bounds for the refined estimator: the true quantile lies in
/// `[x_min, x_max]` and the density there is at least `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub d: f64,
}

/// Solves `F̂(x) = p`. `initial` is a starting guess in data units; without
/// one Newton starts at the standardized origin.
pub fn invert_cdf(
    snapshot: &DistributionSnapshot,
    p: f64,
    settings: &RootFinderSettings,
    initial: Option<f64>,
) -> Result<QuantileResult> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!(
            "quantile level must lie in (0, 1), got {p}"
        )));
    }
    let scale = snapshot.scale();
    let mut lo = settings.bracket_low;
    let hi = settings.bracket_high;
    if snapshot.config().cdf_variant == CdfVariant::PositiveSupport {
        lo = lo.max(0.0);
        if lo >= hi {
            return Ok(QuantileResult::failed());
        }
    }
    let g = |z: f64| snapshot.standardized_cdf(z) - p;

    let start = initial
        .map(|x| scale.standardize(x))
        .filter(|z| z.is_finite() && *z >= lo && *z <= hi)
        .unwrap_or_else(|| 0.0f64.clamp(lo, hi));

    if let Some((z, r)) = newton(&g, snapshot, start, lo, hi, settings) {
        return Ok(QuantileResult::found(scale.destandardize(z), r));
    }
    Ok(match scan_and_bisect(&g, lo, hi, settings) {
        Some((z, r)) => QuantileResult::found(scale.destandardize(z), r),
        None => QuantileResult::failed(),
    })
}

fn newton(
    g: &impl Fn(f64) -> f64,
    snapshot: &DistributionSnapshot,
    start: f64,
    lo: f64,
    hi: f64,
    settings: &RootFinderSettings,
) -> Option<(f64, f64)> {
    let mut z = start;
    for _ in 0..=settings.max_newton_iters {
        let gz = g(z);
        if gz.abs() <= settings.tolerance {
            return Some((z, gz));
        }
        let slope = snapshot.standardized_pdf(z);
        if !(slope.abs() >= MIN_NEWTON_SLOPE) {
            return None;
        }
        let next = z - gz / slope;
        if !next.is_finite() || next < lo || next > hi {
            return None;
        }
        z = next;
    }
    None
}

fn scan_and_bisect(
    g: &impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    settings: &RootFinderSettings,
) -> Option<(f64, f64)> {
    let n = settings.grid_points;
    let node = |i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    let mut prev_z = node(0);
    let mut prev_g = g(prev_z);
    if prev_g >= 0.0 {
        // the infimum lies at or below the bracket; only accept an actual root
        return (prev_g.abs() <= settings.tolerance).then_some((prev_z, prev_g));
    }
    for i in 1..n {
        let z = node(i);
        let gz = g(z);
        if gz >= 0.0 {
            return bisect(g, prev_z, z, gz, settings.tolerance);
        }
        prev_z = z;
        prev_g = gz;
    }
    let _ = prev_g;
    None
}

/// Bisects `[a, b]` with `g(a) < 0 <= g(b)`, keeping the invariant so the
/// result converges on the leftmost crossing inside the cell.
fn bisect(
    g: &impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    mut gb: f64,
    tol: f64,
) -> Option<(f64, f64)> {
    if gb.abs() <= tol {
        // keep going: a closer-to-the-left root may exist inside the cell
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        let gm = g(mid);
        if gm.abs() <= tol {
            return Some((mid, gm));
        }
        if gm < 0.0 {
            a = mid;
        } else {
            b = mid;
            gb = gm;
        }
        if b - a <= BRACKET_COLLAPSE * b.abs().max(1.0) {
            // F̂ jumps across p here; b is the generalized inverse
            return Some((b, gb));
        }
    }
    Some((b, gb))
}

/// Keeps an estimate only if it lies in `[x_min, x_max]` and the estimated
/// density stays at or above `d` across that interval.
pub fn refine(
    result: QuantileResult,
    snapshot: &DistributionSnapshot,
    bounds: &QuantileBounds,
) -> Result<QuantileResult> {
    if !(bounds.x_min < bounds.x_max) || !(bounds.d > 0.0) {
        return Err(domain(format!(
            "refinement needs x_min < x_max and d > 0, got {bounds:?}"
        )));
    }
    let rejected = QuantileResult {
        value: None,
        converged: result.converged,
        refined_rejected: true,
        residual: result.residual,
    };
    let Some(value) = result.value.filter(|_| result.converged) else {
        return Ok(rejected);
    };
    if value < bounds.x_min || value > bounds.x_max {
        return Ok(rejected);
    }
    let n = snapshot.config().root_finder.refine_grid_points;
    let dense_enough = (0..n).all(|i| {
        let x = bounds.x_min + (bounds.x_max - bounds.x_min) * i as f64 / (n - 1) as f64;
        snapshot.pdf_at(x) >= bounds.d
    });
    Ok(if dense_enough { result } else { rejected })
}

/// `F̂(x) < p`, using the raw CDF value. No root finding involved.
pub fn is_below_quantile(snapshot: &DistributionSnapshot, x: f64, p: f64) -> bool {
    snapshot.standardized_cdf(snapshot.scale().standardize(x)) < p
}

/// Per-caller warm starts: remembers the last converged estimate for each
/// level and feeds it to Newton as the next initial guess.
#[derive(Debug, Clone, Default)]
pub struct QuantileTracker {
    last: Vec<(f64, f64)>,
}

impl QuantileTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn estimate(&mut self, snapshot: &DistributionSnapshot, p: f64) -> Result<QuantileResult> {
        let slot = self.last.iter().position(|(q, _)| *q == p);
        let guess = slot.map(|i| self.last[i].1);
        let result = invert_cdf(snapshot, p, &snapshot.config().root_finder, guess)?;
        if let (true, Some(v)) = (result.converged, result.value) {
            match slot {
                Some(i) => self.last[i].1 = v,
                None => self.last.push((p, v)),
            }
        }
        Ok(result)
    }

    pub fn reset(&mut self) {
        self.last.clear();
    }
}
