//! End-to-end behaviour of the simulation protocol.

use hermite_quantile::simulate::{
    coverage_test, run_experiment, ExperimentSpec, Law, Schedule, StreamModel,
};
use hermite_quantile::{Estimator, EstimatorConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn normal_stream(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

#[test]
fn chi_squared_median_over_runs() {
    let law = Law::ChiSquared { dof: 5.0 };
    let mut medians: Vec<f64> = (0..100)
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(300 + run);
            let mut est = Estimator::new(EstimatorConfig::static_gh(6)).unwrap();
            for _ in 0..4000 {
                est.observe(law.sample(&mut rng)).unwrap();
            }
            est.snapshot()
                .unwrap()
                .quantile(0.5)
                .unwrap()
                .value
                .unwrap()
        })
        .collect();
    medians.sort_by(f64::total_cmp);
    let mid = 0.5 * (medians[49] + medians[50]);
    assert!((mid - 4.3515).abs() < 0.15, "median of estimates {mid}");
}

#[test]
fn rmse_shrinks_with_stream_length() {
    let mut spec = ExperimentSpec::new(StreamModel::ChiSquared5, EstimatorConfig::static_gh(6));
    spec.quantiles = vec![0.5];
    spec.runs = 100;
    spec.bootstrap_resamples = 100;
    spec.seed = 21;
    spec.schedule = Schedule::Checkpoints(vec![100, 400, 4000]);
    let report = run_experiment(&spec).unwrap();
    let c = &report.curves[0];
    let r: Vec<f64> = [100, 400, 4000]
        .iter()
        .map(|j| c.at(*j).unwrap().rmse)
        .collect();
    assert!(r[2] < r[1] && r[1] < r[0], "{r:?}");
}

#[test]
fn bootstrap_interval_narrows_with_more_runs() {
    let model = StreamModel::Iid {
        law: Law::Normal { mean: 0.0, sd: 1.0 },
    };
    let width = |runs: usize| {
        let mut spec = ExperimentSpec::new(model, EstimatorConfig::default());
        spec.quantiles = vec![0.5];
        spec.runs = runs;
        spec.observations = 500;
        spec.seed = 77;
        spec.schedule = Schedule::Checkpoints(vec![500]);
        let report = run_experiment(&spec).unwrap();
        let pt = report.curves[0].points[0];
        assert!(pt.ci_low <= pt.ci_high);
        pt.ci_high - pt.ci_low
    };
    let (small, large) = (width(100), width(1000));
    assert!(small / large > 2.0, "{small} vs {large}");
}

#[test]
fn same_seed_same_csv_and_curves_are_non_negative() {
    let mut spec =
        ExperimentSpec::new("exp-drift".parse().unwrap(), EstimatorConfig::ewgh(6, 0.01));
    spec.runs = 20;
    spec.bootstrap_resamples = 100;
    spec.seed = 5;
    spec.schedule = Schedule::Stride(50);
    let csv = || {
        let mut out = Vec::new();
        run_experiment(&spec).unwrap().write_csv(&mut out).unwrap();
        out
    };
    let first = csv();
    assert_eq!(first, csv());
    let text = String::from_utf8(first).unwrap();
    for line in text.lines().skip(1) {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 5);
        assert!(fields[2] >= 0.0 && fields[3] >= 0.0 && fields[3] <= fields[4]);
    }
}

#[test]
fn coverage_on_a_stationary_normal_stream() {
    let r = coverage_test(
        normal_stream(31, 50_000),
        EstimatorConfig::static_gh(6),
        &[0.5, 0.99],
    )
    .unwrap();
    assert!(
        (0.48..=0.52).contains(&r.frequencies[0]),
        "{:?}",
        r.frequencies
    );
    assert!(
        (0.975..=0.995).contains(&r.frequencies[1]),
        "{:?}",
        r.frequencies
    );
    assert_eq!(r.observations, 50_000);
    assert_eq!(r.warmup_excluded, 1);
}

#[test]
fn ewgh_follows_a_change_point() {
    let model: StreamModel = "change-point".parse().unwrap();
    let mut spec = ExperimentSpec::new(model, EstimatorConfig::ewgh(6, 0.05));
    spec.quantiles = vec![0.5];
    spec.runs = 100;
    spec.observations = 1001;
    spec.seed = 12;
    spec.bootstrap_resamples = 10;
    spec.schedule = Schedule::Checkpoints(vec![1001]);
    let report = run_experiment(&spec).unwrap();
    let pt = report.curves[0].points[0];
    assert_eq!(pt.truth, 5.0);
    assert!((pt.mean_estimate - 5.0).abs() < 0.5, "{}", pt.mean_estimate);
}

#[test]
fn pareto_streams_are_supported() {
    let model: StreamModel = "pareto".parse().unwrap();
    let mut spec = ExperimentSpec::new(model, EstimatorConfig::default());
    spec.runs = 10;
    spec.observations = 2000;
    spec.bootstrap_resamples = 10;
    spec.schedule = Schedule::Checkpoints(vec![2000]);
    let report = run_experiment(&spec).unwrap();
    assert_eq!(report.failed_runs, 0);
    for c in &report.curves {
        assert!(c.points[0].rmse.is_finite());
    }
}
