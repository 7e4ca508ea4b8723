use noma_v2x_core::experiments::{run_point, run_scenario, run_scenario_with, run_sweep};
use noma_v2x_core::output::emit_csv;
use noma_v2x_core::{Method, ScenarioConfig, SweepParam, SweepSpec};
use proptest::prelude::*;

#[test]
fn scenario_is_a_pure_function_of_config_and_seed() {
    let config = ScenarioConfig::standard();
    for seed in [0, 1, 17, u64::MAX] {
        assert_eq!(
            run_scenario(&config, seed).unwrap(),
            run_scenario(&config, seed).unwrap()
        );
    }
    assert_ne!(
        run_scenario(&config, 1).unwrap().total_se,
        run_scenario(&config, 2).unwrap().total_se
    );
}

#[test]
fn seed_order_does_not_change_a_point() {
    let config = ScenarioConfig::standard();
    let forward: Vec<u64> = (0..40).collect();
    let backward: Vec<u64> = (0..40).rev().collect();
    let a = run_point(&config, &forward, Method::Proposed, 10.0).unwrap();
    let b = run_point(&config, &backward, Method::Proposed, 10.0).unwrap();
    assert_eq!(a, b);
}

#[test]
fn single_seed_sweep_reduces_to_one_run() {
    let config = ScenarioConfig::standard();
    let spec = SweepSpec {
        parameter: SweepParam::DbsRadius,
        values: vec![10.0],
        seeds: 1,
        base_config: config.clone(),
        baseline: Method::Proposed,
    };
    let result = run_sweep(&spec).unwrap();
    assert_eq!(result.rows.len(), 1);
    assert_eq!(
        result.rows[0].mean_se,
        run_scenario(&config, 0).unwrap().total_se
    );
    assert_eq!(result.rows[0].std_se, 0.0);
}

#[test]
fn macro_baseline_ignores_clustering_parameters() {
    let config = ScenarioConfig::standard();
    let seeds: Vec<u64> = (0..20).collect();
    let reference = run_point(&config, &seeds, Method::MbsOnly, 0.0)
        .unwrap()
        .mean_se;
    for (param, value) in [
        (SweepParam::DbsRadius, 5.0),
        (SweepParam::Epsilon, 9.0),
        (SweepParam::MinPoints, 12.0),
    ] {
        let c = param.apply(&config, value).unwrap();
        assert_eq!(
            run_point(&c, &seeds, Method::MbsOnly, value)
                .unwrap()
                .mean_se,
            reference
        );
    }
}

#[test]
fn csv_bytes_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SweepSpec {
        parameter: SweepParam::MinPoints,
        values: vec![4.0, 6.0, 9.0],
        seeds: 12,
        base_config: ScenarioConfig::standard(),
        baseline: Method::PlainDbscan,
    };
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    emit_csv(&run_sweep(&spec).unwrap(), &a).unwrap();
    emit_csv(&run_sweep(&spec).unwrap(), &b).unwrap();
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

fn config_strategy() -> impl Strategy<Value = ScenarioConfig> {
    (
        (1.0..100.0f64, 0.1..10.0f64, 1usize..200, -120.0..-40.0f64),
        (10.0..1000.0f64, 1.0..10.0f64, 0.5..60.0f64, 1usize..64),
        (
            0.5..20.0f64,
            1usize..20,
            5.0..30.0f64,
            0.0..40.0f64,
            any::<u64>(),
        ),
        (0.0..1.0f64, 0.0..3.0f64, 0.05..0.45f64),
    )
        .prop_map(|(a, b, c, d)| {
            let mut cfg = ScenarioConfig::standard();
            (cfg.p_b_max, cfg.p_k_max, cfg.num_vehicles, cfg.n0_dbm_hz) = a;
            (cfg.r_b, cfg.r_k, cfg.fc_ghz, cfg.num_channels) = b;
            let (eps, mp, smin, span, seed) = c;
            cfg.epsilon_m = eps;
            cfg.min_points = mp;
            cfg.speed_min_kmh = smin;
            cfg.speed_max_kmh = smin + span;
            cfg.seed = seed;
            let (fraction, p_tol, alpha_n) = d;
            cfg.hotspot_fraction = fraction;
            cfg.p_tol = p_tol;
            cfg.alpha_n = alpha_n;
            cfg.alpha_f = 1.0 - alpha_n;
            cfg
        })
}

proptest! {
    #[test]
    fn config_survives_a_round_trip(cfg in config_strategy()) {
        prop_assume!(cfg.validate().is_ok());
        let back = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn methods_never_error_on_valid_configs(seed in any::<u64>(), eps in 1.0..10.0f64, mp in 1usize..14) {
        let mut cfg = ScenarioConfig::standard();
        cfg.epsilon_m = eps;
        cfg.min_points = mp;
        for m in [Method::Proposed, Method::PlainDbscan, Method::MbsOnly] {
            let out = run_scenario_with(&cfg, seed, m).unwrap();
            prop_assert!(out.total_se.is_finite() && out.total_se >= 0.0);
        }
    }
}
