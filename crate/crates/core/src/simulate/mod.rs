//! The simulation protocol: stream models, multi-run RMSE curves with
//! bootstrap intervals, the out-of-sample coverage test, and a
//! sliding-window baseline.

pub mod baseline;
pub mod coverage;
pub mod experiment;
pub mod law;
pub mod model;

pub use baseline::SlidingWindow;
pub use coverage::{coverage_test, CoverageCounter, CoverageReport, MIN_COVERAGE_LENGTH};
pub use experiment::{
    bootstrap_rmse_ci, rmse, run_experiment, Algorithm, ExperimentReport, ExperimentSpec,
    RmseCurve, RmsePoint, Schedule,
};
pub use law::Law;
pub use model::{StreamModel, DRIFT_RATE};
