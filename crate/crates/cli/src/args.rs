//! Flag definitions and their mapping onto library configuration.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use hermite_quantile::{CdfVariant, EstimatorConfig, Mode};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Running-average coefficients (GH).
    Static,
    /// Exponentially weighted coefficients (EWGH).
    Ewgh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CdfArg {
    FullLine,
    Alternative,
    PositiveSupport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

/// Estimator flags shared by `run` and `simulate`. Unset flags fall back to
/// the `--config` file, then to the library defaults.
#[derive(Debug, Args)]
pub struct EstimatorArgs {
    /// TOML file with estimator settings (n_terms, mode, lambda, ...).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,

    /// Truncation order N (the expansion keeps N + 1 coefficients).
    #[arg(long, value_name = "N")]
    pub n_terms: Option<usize>,

    /// EWGH weight in (0, 1]; requires --mode ewgh.
    #[arg(long)]
    pub lambda: Option<f64>,

    #[arg(long, value_enum)]
    pub cdf_variant: Option<CdfArg>,

    /// Fit raw values instead of standardizing by running moments.
    #[arg(long)]
    pub no_standardize: bool,
}

impl EstimatorArgs {
    pub fn to_config(&self) -> Result<EstimatorConfig, Failure> {
        let mut config = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
                toml::from_str(&text)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
            }
            None => EstimatorConfig::default(),
        };
        if let Some(mode) = self.mode {
            config.mode = match mode {
                ModeArg::Static => Mode::Static,
                ModeArg::Ewgh => Mode::Ewgh,
            };
        }
        if let Some(n) = self.n_terms {
            config.n_terms = n;
        }
        if let Some(lambda) = self.lambda {
            if config.mode != Mode::Ewgh {
                return Err(Failure::Usage(
                    "--lambda only applies to --mode ewgh".into(),
                ));
            }
            config.lambda = lambda;
        }
        if let Some(v) = self.cdf_variant {
            config.cdf_variant = match v {
                CdfArg::FullLine => CdfVariant::FullLine,
                CdfArg::Alternative => CdfVariant::Alternative,
                CdfArg::PositiveSupport => CdfVariant::PositiveSupport,
            };
        }
        if self.no_standardize {
            config.standardize = false;
        }
        config.validate()?;
        Ok(config)
    }
}

/// Parses a comma-separated list of quantile levels in (0, 1).
pub fn parse_levels(s: &str) -> Result<Vec<f64>, String> {
    let levels = parse_list::<f64>(s)?;
    match levels.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        Some(p) => Err(format!("quantile level {p} is not in (0, 1)")),
        None => Ok(levels),
    }
}

/// Parses a comma-separated list, ignoring surrounding whitespace.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|e| format!("'{t}': {e}")))
        .collect::<Result<Vec<_>, _>>()
        .and_then(|v| {
            if v.is_empty() {
                Err("empty list".into())
            } else {
                Ok(v)
            }
        })
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Input file with one number per line; stdin when absent or '-'.
    pub input: Option<PathBuf>,

    #[command(flatten)]
    pub estimator: EstimatorArgs,

    /// Comma-separated quantile levels.
    #[arg(long, default_value = "0.5,0.9,0.99", value_parser = parse_levels)]
    pub quantiles: ::std::vec::Vec<f64>,

    /// Emit a record after every this many observations (and at the end).
    #[arg(long, default_value_t = 1000, value_name = "N",
          value_parser = clap::value_parser!(u64).range(1..))]
    pub emit_every: u64,

    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    pub format: Format,

    /// Comma-separated points at which to report the estimated CDF.
    #[arg(long, value_name = "X,...", value_parser = parse_list::<f64>)]
    pub cdf: Option<::std::vec::Vec<f64>>,

    /// Report out-of-sample coverage frequencies instead of estimates.
    #[arg(long)]
    pub coverage: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgorithmArg {
    Hermite,
    SlidingWindow,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Stream model: chi2, exp, normal, normal-drift, exp-drift,
    /// change-point or pareto.
    #[arg(long)]
    pub model: String,

    #[command(flatten)]
    pub estimator: EstimatorArgs,

    #[arg(long, value_enum, default_value_t = AlgorithmArg::Hermite)]
    pub algorithm: AlgorithmArg,

    /// Sliding-window length; defaults to the effective window of --lambda.
    #[arg(long)]
    pub window: Option<usize>,

    #[arg(long, default_value = "0.5,0.9,0.99", value_parser = parse_levels)]
    pub quantiles: ::std::vec::Vec<f64>,

    #[arg(long, default_value_t = 1000)]
    pub runs: usize,

    /// Observations per run; defaults to 4000 for i.i.d. models and 1000
    /// for drifting ones.
    #[arg(long)]
    pub observations: Option<usize>,

    #[arg(long, env = "HERMQ_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Record every this many steps (the last step is always recorded).
    #[arg(long, default_value_t = 1, conflicts_with = "checkpoints",
          value_parser = clap::value_parser!(u64).range(1..))]
    pub stride: u64,

    /// Comma-separated steps to record instead of a stride.
    #[arg(long, value_parser = parse_list::<usize>)]
    pub checkpoints: Option<::std::vec::Vec<usize>>,

    /// Bootstrap resamples per RMSE confidence interval.
    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,

    /// CSV output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Path for a JSON summary (config echo, timing, final points).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckArg {
    /// Pointwise CDF MSE against x times MISE.
    CdfMseBound,
    /// Weighted CDF error against MISE times the mean.
    OmegaBound,
    /// Variance of i.i.d. EWGH coefficients against the exact expression.
    EwghVariance,
    /// EWGH coefficient MSE after a change point against bias² + variance.
    EwghCoefficientMse,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub check: CheckArg,

    /// Stream model; i.i.d. models for the first three checks and
    /// change-point for ewgh-coefficient-mse.
    #[arg(long)]
    pub model: Option<String>,

    /// Monte Carlo replications [default: 500 for the CDF bounds, 2000
    /// for the EWGH checks].
    #[arg(long)]
    pub runs: Option<usize>,

    /// Stream length [default: 500 for the CDF bounds, 200 for
    /// ewgh-variance].
    #[arg(long)]
    pub observations: Option<usize>,

    #[arg(long, default_value_t = 6, value_name = "N")]
    pub n_terms: usize,

    /// EWGH weight [default: 0.05 for ewgh-variance, 0.01 for
    /// ewgh-coefficient-mse].
    #[arg(long)]
    pub lambda: Option<f64>,

    /// Check grid: x values, coefficient orders, or steps after the change.
    #[arg(long, value_parser = parse_list::<f64>)]
    pub grid: Option<::std::vec::Vec<f64>>,

    /// Coefficient order for ewgh-coefficient-mse.
    #[arg(long, default_value_t = 0)]
    pub order: usize,

    #[arg(long, env = "HERMQ_SEED", default_value_t = 0)]
    pub seed: u64,
}
