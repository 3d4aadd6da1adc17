//! The streaming estimator: moments, standardization and coefficient updates
//! in one object, plus immutable snapshots that answer density, CDF and
//! quantile queries in data units.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coefficients::{CoefficientVector, Mode, MAX_ORDER};
use crate::density::{pdf, CdfTable, CdfVariant};
use crate::error::{domain, Error, Result};
use crate::quantile::{self, QuantileBounds, QuantileResult, RootFinderSettings};
use crate::standardize::{ExpMoments, RunningMoments, Scale, SIGMA_FLOOR};

/// Estimator settings. Serializes as a flat key-value document; every key is
/// optional and falls back to the default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimatorConfig {
    /// Truncation order N; the expansion keeps N + 1 coefficients.
    pub n_terms: usize,
    pub mode: Mode,
    /// EWGH weight; ignored in static mode.
    pub lambda: f64,
    pub standardize: bool,
    pub cdf_variant: CdfVariant,
    #[serde(flatten)]
    pub root_finder: RootFinderSettings,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            n_terms: 6,
            mode: Mode::Static,
            lambda: 0.05,
            standardize: true,
            cdf_variant: CdfVariant::Alternative,
            root_finder: RootFinderSettings::default(),
        }
    }
}

impl EstimatorConfig {
    pub fn static_gh(n_terms: usize) -> Self {
        Self {
            n_terms,
            ..Self::default()
        }
    }

    pub fn ewgh(n_terms: usize, lambda: f64) -> Self {
        Self {
            n_terms,
            mode: Mode::Ewgh,
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_terms < 1 || self.n_terms > MAX_ORDER {
            return Err(Error::Config(format!(
                "n_terms must lie in 1..={MAX_ORDER}, got {}",
                self.n_terms
            )));
        }
        if self.mode == Mode::Ewgh && !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::Config(format!(
                "lambda must lie in (0, 1], got {}",
                self.lambda
            )));
        }
        if self.cdf_variant == CdfVariant::PositiveSupport && self.standardize {
            // standardized values are negative about half the time
            return Err(Error::Config(
                "positive_support requires standardize = false".into(),
            ));
        }
        self.root_finder.validate()
    }
}

#[derive(Debug, Clone, Copy)]
enum Moments {
    Running(RunningMoments),
    Exp(ExpMoments),
}

impl Moments {
    fn update(&mut self, x: f64) -> Result<()> {
        match self {
            Moments::Running(m) => m.update(x),
            Moments::Exp(m) => m.update(x),
        }
    }

    fn scale(&self) -> Scale {
        let (mean, std) = match self {
            Moments::Running(m) => (m.mean(), m.std_dev()),
            Moments::Exp(m) => (m.mean(), m.std_dev()),
        };
        match mean {
            None => Scale::IDENTITY,
            Some(mu) => Scale {
                mu,
                sigma: std.unwrap_or(1.0).max(SIGMA_FLOOR),
            },
        }
    }
}

/// Single-writer streaming estimator.
#[derive(Debug, Clone)]
pub struct Estimator {
    config: EstimatorConfig,
    coefficients: CoefficientVector,
    moments: Moments,
    table: Arc<CdfTable>,
}

impl Estimator {
    pub fn new(config: EstimatorConfig) -> Result<Self> {
        config.validate()?;
        let coefficients = CoefficientVector::new(config.n_terms, config.mode, config.lambda)?;
        let moments = match config.mode {
            Mode::Static => Moments::Running(RunningMoments::new()),
            Mode::Ewgh => Moments::Exp(ExpMoments::new(config.lambda)?),
        };
        let table = Arc::new(CdfTable::new(config.n_terms)?);
        Ok(Self {
            config,
            coefficients,
            moments,
            table,
        })
    }

    /// Absorbs one observation: moments first, then the observation is
    /// standardized with the updated moments and fed to the coefficients.
    /// A rejected observation leaves the state untouched.
    pub fn observe(&mut self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        let mut moments = self.moments;
        moments.update(x)?;
        let z = if self.config.standardize {
            moments.scale().standardize(x)
        } else {
            x
        };
        if !z.is_finite() {
            return Err(Error::NonFinite(z));
        }
        self.coefficients.update(z)?;
        self.moments = moments;
        Ok(())
    }

    pub fn count(&self) -> u64 {
        self.coefficients.count()
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn coefficients(&self) -> &CoefficientVector {
        &self.coefficients
    }

    /// Current location/scale (identity when standardization is off).
    pub fn scale(&self) -> Scale {
        if self.config.standardize {
            self.moments.scale()
        } else {
            Scale::IDENTITY
        }
    }

    pub fn snapshot(&self) -> Result<DistributionSnapshot> {
        if self.count() == 0 {
            return Err(Error::Empty);
        }
        Ok(DistributionSnapshot {
            coefficients: self.coefficients.clone(),
            scale: self.scale(),
            config: self.config.clone(),
            table: Arc::clone(&self.table),
        })
    }
}

/// Immutable plug-in state. Queries are pure and repeatable.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SnapshotRecord", into = "SnapshotRecord")]
pub struct DistributionSnapshot {
    coefficients: CoefficientVector,
    scale: Scale,
    config: EstimatorConfig,
    table: Arc<CdfTable>,
}

#[derive(Serialize, Deserialize)]
struct MomentsRecord {
    mu: f64,
    sigma: f64,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct SnapshotRecord {
    coefficients: CoefficientVector,
    moments: MomentsRecord,
    config: EstimatorConfig,
}

impl From<DistributionSnapshot> for SnapshotRecord {
    fn from(s: DistributionSnapshot) -> Self {
        Self {
            moments: MomentsRecord {
                mu: s.scale.mu,
                sigma: s.scale.sigma,
                count: s.coefficients.count(),
            },
            coefficients: s.coefficients,
            config: s.config,
        }
    }
}

impl TryFrom<SnapshotRecord> for DistributionSnapshot {
    type Error = Error;

    fn try_from(r: SnapshotRecord) -> Result<Self> {
        if r.moments.count != r.coefficients.count() {
            return Err(Error::Snapshot(format!(
                "moment count {} differs from coefficient count {}",
                r.moments.count,
                r.coefficients.count()
            )));
        }
        let scale = Scale {
            mu: r.moments.mu,
            sigma: r.moments.sigma,
        };
        DistributionSnapshot::from_parts(r.coefficients, scale, r.config)
    }
}

impl DistributionSnapshot {
    /// Builds a snapshot from explicit parts, e.g. known true coefficients.
    pub fn from_parts(
        coefficients: CoefficientVector,
        scale: Scale,
        config: EstimatorConfig,
    ) -> Result<Self> {
        config.validate()?;
        if coefficients.order() != config.n_terms {
            return Err(Error::Snapshot(format!(
                "coefficient order {} differs from n_terms {}",
                coefficients.order(),
                config.n_terms
            )));
        }
        if coefficients.mode() != config.mode {
            return Err(Error::ModeMismatch {
                expected: config.mode.as_str(),
                requested: coefficients.mode().as_str(),
            });
        }
        if !(scale.sigma > 0.0 && scale.sigma.is_finite() && scale.mu.is_finite()) {
            return Err(Error::Snapshot(format!("invalid scale {scale:?}")));
        }
        let table = Arc::new(CdfTable::new(config.n_terms)?);
        Ok(Self {
            coefficients,
            scale,
            config,
            table,
        })
    }

    pub fn coefficients(&self) -> &CoefficientVector {
        &self.coefficients
    }

    pub fn a_hat(&self) -> &[f64] {
        self.coefficients.a_hat()
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn count(&self) -> u64 {
        self.coefficients.count()
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn table(&self) -> &CdfTable {
        &self.table
    }

    /// Density in data units: `f̃((x - μ̂)/σ̂) / σ̂`.
    pub fn pdf_at(&self, x: f64) -> f64 {
        pdf(self.a_hat(), self.scale.standardize(x)) / self.scale.sigma
    }

    /// Raw (unclamped) CDF in data units.
    pub fn cdf_at(&self, x: f64) -> Result<f64> {
        self.table.cdf(
            self.a_hat(),
            self.scale.standardize(x),
            self.config.cdf_variant,
        )
    }

    /// CDF clamped to `[0, 1]` for reporting.
    pub fn cdf_clamped_at(&self, x: f64) -> Result<f64> {
        self.table.cdf_clamped(
            self.a_hat(),
            self.scale.standardize(x),
            self.config.cdf_variant,
        )
    }

    /// Raw CDF in standardized units; the positive-support variant is 0 left
    /// of the origin.
    pub(crate) fn standardized_cdf(&self, z: f64) -> f64 {
        if self.config.cdf_variant == CdfVariant::PositiveSupport && z < 0.0 {
            return 0.0;
        }
        self.table
            .cdf(self.a_hat(), z, self.config.cdf_variant)
            .unwrap_or(f64::NAN)
    }

    pub(crate) fn standardized_pdf(&self, z: f64) -> f64 {
        pdf(self.a_hat(), z)
    }

    pub fn quantile(&self, p: f64) -> Result<QuantileResult> {
        quantile::invert_cdf(self, p, &self.config.root_finder, None)
    }

    /// Quantile with a warm-start guess in data units.
    pub fn quantile_from(&self, p: f64, guess: f64) -> Result<QuantileResult> {
        quantile::invert_cdf(self, p, &self.config.root_finder, Some(guess))
    }

    pub fn refined_quantile(&self, p: f64, bounds: &QuantileBounds) -> Result<QuantileResult> {
        quantile::refine(self.quantile(p)?, self, bounds)
    }

    pub fn is_below_quantile(&self, x: f64, p: f64) -> bool {
        quantile::is_below_quantile(self, x, p)
    }

    pub fn total_mass(&self) -> f64 {
        self.table.total_mass(self.a_hat())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("snapshot fields are always serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Snapshot(e.to_string()))
    }
}

/// Number of most recent observations carrying 99.9% of the EWGH weight:
/// `round(ln 0.001 / ln(1 - λ))`.
pub fn effective_window(lambda: f64) -> Result<u64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(domain(format!(
            "effective window needs lambda in (0, 1), got {lambda}"
        )));
    }
    Ok((0.001f64.ln() / (-lambda).ln_1p()).round() as u64)
}
