use dualsample::annealer::AnnealConfig;
use dualsample::strata;
use dualsample::synth::{self, CompareSetup, Method, ScenarioSpec};

fn small() -> dualsample::geomodel::CandidateSet<f64> {
    let spec = ScenarioSpec::<f64> {
        nx: 12,
        ny: 12,
        n_clusters: 4,
        pois_per_cluster: 400,
        seed: 2,
        ..Default::default()
    };
    synth::generate_scenario(&spec).unwrap().enriched().unwrap()
}

#[test]
fn method_order_does_not_change_results() {
    let set = small();
    let split = synth::default_stratification(&set).unwrap();
    let setup = CompareSetup {
        strata: &split,
        allocation: strata::allocate(20, 0.8).unwrap(),
        config: AnnealConfig {
            max_iters: 300,
            ..AnnealConfig::new(2, 0)
        },
        record_timing: false,
    };
    let a = synth::compare(
        &setup,
        &[
            Method::Dual,
            Method::Random,
            Method::Spatial,
            Method::Stratified,
        ],
        3,
    )
    .unwrap();
    let b = synth::compare(
        &setup,
        &[
            Method::Stratified,
            Method::Spatial,
            Method::Random,
            Method::Dual,
        ],
        3,
    )
    .unwrap();
    let csv = |r: &dualsample::Report| {
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        buf
    };
    assert_eq!(csv(&a), csv(&b));
    assert_eq!(a.rows.len(), 4 * 3 * 2);
}

#[test]
fn single_random_seed_gives_one_row_per_stratum() {
    let set = small();
    let split = synth::default_stratification(&set).unwrap();
    let setup = CompareSetup {
        strata: &split,
        allocation: strata::allocate(20, 0.8).unwrap(),
        config: AnnealConfig::new(2, 0),
        record_timing: false,
    };
    let r = synth::compare(&setup, &[Method::Random], 1).unwrap();
    assert_eq!(r.rows.len(), 2);
    assert!(r.rows.iter().all(|row| row.wall_time_ms == 0));
}

#[test]
fn samplers_are_structurally_valid_over_many_seeds() {
    let set = small();
    let split = synth::default_stratification(&set).unwrap();
    let alloc = strata::allocate(20, 0.8).unwrap();
    for seed in 0..100 {
        let mut rng = dualsample::annealer::rng_for(seed, 16);
        synth::sample_random(&set, 15, &mut rng)
            .unwrap()
            .check_structure(&set)
            .unwrap();
        let (d, s) = synth::sample_stratified_random(&split, &alloc, &mut rng).unwrap();
        d.check_structure(&split.dense).unwrap();
        s.check_structure(&split.sparse).unwrap();
        assert_eq!((d.len(), s.len()), (alloc.n_dense, alloc.n_sparse));
    }
}

#[test]
fn scenario_is_reproducible_and_bounded() {
    let spec = ScenarioSpec::<f64> {
        nx: 8,
        ny: 6,
        seed: 11,
        ..Default::default()
    };
    let a = synth::generate_scenario(&spec).unwrap();
    let b = synth::generate_scenario(&spec).unwrap();
    assert_eq!(a.candidates.units(), b.candidates.units());
    assert_eq!(a.candidates.len(), 48);
    let peak = a
        .candidates
        .units()
        .iter()
        .map(|u| u.builtup)
        .fold(0.0, f64::max);
    assert!((peak - spec.builtup_peak).abs() < 1e-12);
}

#[test]
fn sign_test_values() {
    assert!((synth::sign_test_p_value(20, 0) - 0.5f64.powi(20)).abs() < 1e-18);
    assert!(synth::sign_test_p_value(15, 5) < 0.05);
    assert!(synth::sign_test_p_value(14, 6) > 0.05);
    assert_eq!(synth::sign_test_p_value(0, 0), 1.0);
}
