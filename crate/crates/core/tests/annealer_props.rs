use std::collections::BTreeSet;

use dualsample::annealer::{self, AnnealConfig, CheckpointKind, Objectives, TraceRow};
use dualsample::geomodel::CandidateSet;
use dualsample::synth::{self, ScenarioSpec};
use proptest::prelude::*;
use rand::Rng;

fn small_scenario(seed: u64) -> CandidateSet<f64> {
    let spec = ScenarioSpec::<f64> {
        nx: 10,
        ny: 10,
        seed,
        ..Default::default()
    };
    synth::generate_scenario(&spec).unwrap().enriched().unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs()
}

fn check_trace(trace: &[TraceRow<f64>], cfg: &AnnealConfig<f64>, objectives: Objectives) {
    for (e, row) in trace.iter().enumerate() {
        assert_eq!(row.iter, e);
        let expected = cfg.t0 * cfg.alpha.powi(e as i32);
        assert!(
            rel_close(row.temperature, expected, 1e-12),
            "row {e}: {} vs {expected}",
            row.temperature
        );
        assert!((0.0..=1.0).contains(&row.p_spatial));
    }
    for w in trace.windows(2) {
        assert!(w[1].cost_ann_best <= w[0].cost_ann_best);
        if objectives == Objectives::Dual {
            assert!(w[1].cost_amul_best <= w[0].cost_amul_best);
        }
    }
}

#[test]
fn seed_seven_dual_fixture() {
    let set = small_scenario(7);
    let cfg = AnnealConfig::new(10, 7);
    let r = annealer::run(&set, &cfg, Objectives::Dual).unwrap();
    assert_eq!(r.trace.len(), 5000);
    assert!(rel_close(r.initial.costs.ann, 0.9958640941704223, 1e-9));
    assert!(rel_close(r.initial.costs.amul, 1.2551736329472596, 1e-9));
    assert!(rel_close(r.best.costs.ann, 0.5441114845896596, 1e-9));
    assert!(rel_close(r.best.costs.amul, 1.0763459790360064, 1e-9));
    assert_eq!(
        r.best.sorted_ids(),
        vec![1, 4, 7, 33, 39, 46, 60, 68, 81, 85]
    );
    assert!(r.best.costs.ann <= r.initial.costs.ann);
    assert!(r.best.costs.amul <= r.initial.costs.amul);
}

#[test]
fn seed_seven_spatial_only_fixture() {
    let set = small_scenario(7);
    let cfg = AnnealConfig::new(10, 7);
    let r = synth::sample_spatial_only(&set, 10, &cfg).unwrap();
    assert!(rel_close(r.initial.costs.ann, 0.9958640941704223, 1e-9));
    assert!(rel_close(r.best.costs.ann, 0.45279153099570096, 1e-9));
    assert_eq!(
        r.best.sorted_ids(),
        vec![0, 6, 29, 36, 42, 66, 69, 90, 95, 99]
    );
    assert!(r
        .trace
        .iter()
        .all(|t| t.accepted_diversity.is_none() && t.p_diversity.is_none()));
}

#[test]
fn every_intermediate_solution_is_valid() {
    let set = small_scenario(3);
    for seed in 0..100 {
        let n = 2 + (seed as usize % 20);
        let cfg = AnnealConfig {
            max_iters: 200,
            ..AnnealConfig::new(n, seed)
        };
        let objectives = if seed % 3 == 0 {
            Objectives::SpatialOnly
        } else {
            Objectives::Dual
        };
        let mut seen = 0usize;
        let r = annealer::run_observed(&set, &cfg, objectives, |cp| {
            let distinct: BTreeSet<usize> = cp.positions.iter().copied().collect();
            assert_eq!(
                cp.positions.len(),
                n,
                "seed {seed} iter {} {:?}",
                cp.iter,
                cp.kind
            );
            assert_eq!(distinct.len(), n);
            assert!(cp.positions.iter().all(|&p| p < set.len()));
            if cp.kind == CheckpointKind::EndOfIteration {
                seen += 1;
            }
        })
        .unwrap();
        assert_eq!(seen, r.trace.len());
        check_trace(&r.trace, &cfg, objectives);
        for s in [&r.initial, &r.best, &r.last] {
            s.check_structure(&set).unwrap();
        }
    }
}

#[test]
fn identical_inputs_give_identical_traces() {
    let set = small_scenario(42);
    let cfg = AnnealConfig::new(12, 42);
    let csv = |r: &annealer::RunResult<f64>| {
        let mut buf = Vec::new();
        annealer::write_trace_csv(&r.trace, &mut buf).unwrap();
        buf
    };
    let a = annealer::run(&set, &cfg, Objectives::Dual).unwrap();
    let b = annealer::run(&set, &cfg, Objectives::Dual).unwrap();
    assert_eq!(csv(&a), csv(&b));
    assert_eq!(a.best, b.best);
}

#[test]
fn t0_at_or_below_tolerance_runs_nothing() {
    let set = small_scenario(1);
    let cfg = AnnealConfig {
        t0: 1e-9,
        ..AnnealConfig::new(5, 1)
    };
    let r = annealer::run(&set, &cfg, Objectives::Dual).unwrap();
    assert!(r.trace.is_empty());
    assert_eq!(r.best, r.initial);
}

#[test]
fn schedule_reaches_closed_form() {
    let mut t = 1.0f64;
    for _ in 0..5000 {
        t = annealer::cool(t, 0.999);
    }
    assert!(rel_close(t, 0.999f64.powi(5000), 1e-12));
    assert!((t - 6.72e-3).abs() < 5e-6);
}

#[test]
fn cold_chain_rejects_worsening_moves() {
    let p = annealer::acceptance_probability(1.0f64, 1e-8 * (1.0 + 1e-9)).unwrap();
    assert!(p < 1e-100);
    let mut rng = annealer::rng_for(0, 0);
    let mut accepted = 0;
    for _ in 0..10_000 {
        let delta: f64 = rng.gen_range(0.01..1.0);
        let p = annealer::acceptance_probability(delta, 1e-6).unwrap();
        if rng.gen::<f64>() < p {
            accepted += 1;
        }
    }
    assert_eq!(accepted, 0);
}

proptest! {
    #[test]
    fn acceptance_is_monotone(d1 in 0.0f64..10.0, d2 in 0.0f64..10.0, t1 in 1e-6f64..10.0, t2 in 1e-6f64..10.0) {
        let (dl, dh) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let (tl, th) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let p = |d: f64, t: f64| annealer::acceptance_probability(d, t).unwrap();
        prop_assert!(p(dh, tl) <= p(dl, tl));
        prop_assert!(p(dl, tl) <= p(dl, th));
        prop_assert!((0.0..=1.0).contains(&p(dh, th)));
    }

    #[test]
    fn improving_moves_are_always_taken(d in -10.0f64..0.0, t in 1e-9f64..10.0) {
        prop_assert_eq!(annealer::acceptance_probability(d, t).unwrap(), 1.0);
    }

    #[test]
    fn proposals_preserve_cardinality(seed in 0u64..500, n in 2usize..30) {
        let set = small_scenario(5);
        let mut rng = annealer::rng_for(seed, 0);
        let s = annealer::init_solution(&set, n, &mut rng).unwrap();
        for p in [
            annealer::perturb_spatial(&s, &set, &mut rng).unwrap(),
            annealer::perturb_diversity(&s, &set, &mut rng).unwrap(),
        ] {
            let distinct: BTreeSet<u64> = p.member_ids.iter().copied().collect();
            prop_assert_eq!(distinct.len(), n);
            prop_assert!(s.member_ids.contains(&p.removed));
            prop_assert!(!s.member_ids.contains(&p.added));
        }
    }
}
