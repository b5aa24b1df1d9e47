//! End-to-end scenario runs on small configurations.

use fusionlab::scenarios::{
    rmse, run_experiment, summarize, weight_trace, BaseFilter, FilterSpec, FusionMode, Metric, ScenarioConfig,
};

fn check_noiseless(cfg: ScenarioConfig) {
    let cfg = ScenarioConfig { trials: 1, horizon: 1, ..cfg.with_vanishing_noise(1e-12) };
    let ens = run_experiment(&cfg, Some(1)).unwrap();
    for (k, label) in ens.labels.iter().enumerate() {
        let series = rmse(&ens, k, Metric::Position).unwrap();
        assert_eq!(series.trials_used, 1, "{label}");
        assert!(series.average < 1e-3, "{label}: {}", series.average);
    }
}

#[test]
fn noiseless_linear_run_is_exact() {
    check_noiseless(ScenarioConfig::linear());
}

#[test]
fn noiseless_turning_run_is_exact() {
    check_noiseless(ScenarioConfig::coordinated_turn());
}

#[test]
fn identical_sensors_share_weight_evenly() {
    let mut cfg = ScenarioConfig { trials: 20, horizon: 50, ..ScenarioConfig::linear() };
    cfg.sensors[1] = cfg.sensors[0].clone();
    cfg.filter_set = vec![FilterSpec { base: BaseFilter::Kf, mode: FusionMode::Aa }];
    let ens = run_experiment(&cfg, None).unwrap();
    let trace = weight_trace(&ens, 0).unwrap();
    assert!((trace.average - 0.5).abs() < 0.02, "{}", trace.average);
}

#[test]
fn better_sensor_earns_more_weight() {
    let cfg = ScenarioConfig {
        trials: 10,
        horizon: 40,
        filter_set: vec![FilterSpec { base: BaseFilter::Kf, mode: FusionMode::Aa }],
        ..ScenarioConfig::linear()
    };
    let ens = run_experiment(&cfg, None).unwrap();
    assert!(weight_trace(&ens, 0).unwrap().average > 0.5);
}

#[test]
fn summary_lists_every_filter() {
    let cfg = ScenarioConfig { trials: 2, horizon: 3, particle_count: 50, ..ScenarioConfig::linear() };
    let ens = run_experiment(&cfg, None).unwrap();
    let rows = summarize(&ens).unwrap();
    for label in &ens.labels {
        assert!(rows.iter().any(|r| &r.filter == label && r.metric == "position_armse"), "{label}");
    }
}
