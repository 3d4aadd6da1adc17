//! `hermq simulate` and `hermq verify`: thin mappings from flags onto the
//! library's experiment and bound-check entry points.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use hermite_quantile::oracle::{
    check_cdf_mse_bound, check_ewgh_coefficient_mse, check_ewgh_variance, check_omega_bound,
    McSettings,
};
use hermite_quantile::simulate::{
    run_experiment, Algorithm, ExperimentSpec, Law, Schedule, StreamModel,
};
use hermite_quantile::{effective_window, EstimatorConfig};

use crate::args::{AlgorithmArg, CheckArg, SimulateArgs, VerifyArgs};
use crate::Failure;

fn parse_model(name: &str) -> Result<StreamModel, Failure> {
    name.parse::<StreamModel>().map_err(Failure::from)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

pub fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let model = parse_model(&args.model)?;
    let config = args.estimator.to_config()?;
    let algorithm = match (args.algorithm, args.window) {
        (AlgorithmArg::Hermite, None) => Algorithm::Hermite,
        (AlgorithmArg::Hermite, Some(_)) => {
            return Err(Failure::Usage(
                "--window only applies to --algorithm sliding-window".into(),
            ))
        }
        (AlgorithmArg::SlidingWindow, window) => Algorithm::SlidingWindow {
            window: match window {
                Some(w) => w,
                None => effective_window(config.lambda)? as usize,
            },
        },
    };

    let mut spec = ExperimentSpec::new(model, config);
    spec.algorithm = algorithm;
    spec.quantiles = args.quantiles.clone();
    spec.runs = args.runs;
    if let Some(m) = args.observations {
        spec.observations = m;
    }
    spec.bootstrap_resamples = args.bootstrap;
    spec.seed = args.seed;
    spec.schedule = match &args.checkpoints {
        Some(js) => Schedule::Checkpoints(js.clone()),
        None => Schedule::Stride(args.stride as usize),
    };
    spec.validate()?;

    let report = run_experiment(&spec)?;
    match &args.out {
        Some(path) => {
            let mut file = create(path)?;
            report.write_csv(&mut file)?;
            file.flush()?;
        }
        None => {
            let mut out = BufWriter::new(io::stdout().lock());
            report.write_csv(&mut out)?;
            out.flush()?;
        }
    }
    if let Some(path) = &args.summary {
        let mut file = create(path)?;
        serde_json::to_writer_pretty(&mut file, &report.summary()).map_err(Failure::data)?;
        writeln!(file)?;
        file.flush()?;
    }
    eprintln!(
        "hermq: {} runs of {} observations in {:.2}s, {} failed runs",
        spec.runs, spec.observations, report.elapsed_secs, report.failed_runs
    );
    Ok(())
}

/// The single law behind an i.i.d. model.
fn iid_law(model: &StreamModel) -> Result<Law, Failure> {
    match model {
        StreamModel::ChiSquared5
        | StreamModel::ExponentialUnit
        | StreamModel::Pareto { .. }
        | StreamModel::Iid { .. } => Ok(model.law_at(1)),
        _ => Err(Failure::Usage(format!(
            "this check needs an i.i.d. model (chi2, exp, normal, pareto), got {model:?}"
        ))),
    }
}

/// Grid values that must be non-negative integers (orders, steps).
fn integer_grid(grid: &[f64], what: &str) -> Result<Vec<u64>, Failure> {
    grid.iter()
        .map(|&g| {
            if g >= 0.0 && g.fract() == 0.0 && g <= u32::MAX as f64 {
                Ok(g as u64)
            } else {
                Err(Failure::Usage(format!(
                    "{what} must be non-negative integers, got {g}"
                )))
            }
        })
        .collect()
}

pub fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let default_model = match args.check {
        CheckArg::CdfMseBound | CheckArg::OmegaBound => "exp",
        CheckArg::EwghVariance => "normal",
        CheckArg::EwghCoefficientMse => "change-point",
    };
    let model = parse_model(args.model.as_deref().unwrap_or(default_model))?;
    let is_bound = matches!(args.check, CheckArg::CdfMseBound | CheckArg::OmegaBound);
    if is_bound && args.lambda.is_some() {
        return Err(Failure::Usage(
            "--lambda does not apply to the CDF bound checks".into(),
        ));
    }
    if args.check != CheckArg::EwghCoefficientMse && args.order != 0 {
        return Err(Failure::Usage(
            "--order only applies to ewgh-coefficient-mse".into(),
        ));
    }
    let runs = args.runs.unwrap_or(if is_bound { 500 } else { 2000 });

    let report = match args.check {
        CheckArg::CdfMseBound | CheckArg::OmegaBound => {
            let law = iid_law(&model)?;
            let config = EstimatorConfig::static_gh(args.n_terms);
            let mc = McSettings {
                runs,
                observations: args.observations.unwrap_or(500),
                seed: args.seed,
            };
            if args.check == CheckArg::CdfMseBound {
                let grid = args
                    .grid
                    .clone()
                    .unwrap_or_else(|| vec![0.5, 1.0, 2.0, 4.0]);
                check_cdf_mse_bound(&law, &config, &grid, &mc)?
            } else {
                if args.grid.is_some() {
                    return Err(Failure::Usage(
                        "omega-bound has no grid; it is evaluated at the mean".into(),
                    ));
                }
                check_omega_bound(&law, &config, &mc)?
            }
        }
        CheckArg::EwghVariance => {
            let law = iid_law(&model)?;
            let orders = match &args.grid {
                Some(g) => integer_grid(g, "coefficient orders")?
                    .into_iter()
                    .map(|k| k as usize)
                    .collect(),
                None => vec![0, 1, 2, 6],
            };
            let n = args.observations.unwrap_or(200) as u64;
            check_ewgh_variance(
                &law,
                args.lambda.unwrap_or(0.05),
                n,
                &orders,
                runs,
                args.seed,
            )?
        }
        CheckArg::EwghCoefficientMse => {
            let StreamModel::ChangePoint { before, after, s } = model else {
                return Err(Failure::Usage(
                    "ewgh-coefficient-mse needs --model change-point".into(),
                ));
            };
            if args.observations.is_some() {
                return Err(Failure::Usage(
                    "ewgh-coefficient-mse takes its stream lengths from --grid".into(),
                ));
            }
            let ts = match &args.grid {
                Some(g) => integer_grid(g, "steps after the change")?,
                None => vec![10, 100, 500],
            };
            check_ewgh_coefficient_mse(
                &before,
                &after,
                s,
                &ts,
                args.lambda.unwrap_or(0.01),
                args.order,
                runs,
                args.seed,
            )?
        }
    };
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &report).map_err(Failure::data)?;
    writeln!(out)?;
    Ok(())
}
