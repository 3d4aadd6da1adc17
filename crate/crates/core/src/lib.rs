//! One-pass estimation of a stream's CDF and quantiles from truncated
//! Gauss-Hermite series.
//!
//! Each observation updates `N + 1` expansion coefficients in constant time,
//! either as a running average (static regime) or as an exponentially
//! weighted average that forgets old data (dynamic regime). Snapshots of the
//! coefficients answer density, CDF and quantile queries in closed form via
//! incomplete gamma functions.
//!
//! ```
//! use hermite_quantile::{Estimator, EstimatorConfig};
//!
//! let mut est = Estimator::new(EstimatorConfig::default()).unwrap();
//! for i in 0..1000 {
//!     est.observe((i as f64 * 0.618).fract()).unwrap();
//! }
//! let snap = est.snapshot().unwrap();
//! let median = snap.quantile(0.5).unwrap().value.unwrap();
//! assert!((median - 0.5).abs() < 0.1);
//! ```

// `!(x > 0.0)` checks deliberately treat NaN as invalid.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coefficients;
pub mod density;
pub mod error;
pub mod estimator;
pub mod oracle;
pub mod quantile;
pub mod simulate;
pub mod special;
pub mod standardize;

pub use coefficients::{fit_batch, CoefficientVector, Mode};
pub use density::{CdfTable, CdfVariant};
pub use error::{Error, Result};
pub use estimator::{effective_window, DistributionSnapshot, Estimator, EstimatorConfig};
pub use quantile::{QuantileBounds, QuantileResult, QuantileTracker, RootFinderSettings};
pub use standardize::Scale;
