use dualsample::geomodel::{validate_candidates, CandidateSet, PlanarPoint, SamplingUnit};
use dualsample::strata::{self, Stratum};
use proptest::prelude::*;

fn set_of(builtups: &[f64]) -> CandidateSet<f64> {
    let units = builtups
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            SamplingUnit::new(i as u64, PlanarPoint::new(i as f64 * 10.0, 0.0), 10.0)
                .with_builtup(b)
        })
        .collect();
    validate_candidates(units).unwrap()
}

fn builtups() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, 1..200)
}

proptest! {
    #[test]
    fn strata_partition_the_input(b in builtups(), t in 0.0f64..=1.0) {
        let set = set_of(&b);
        let split = strata::stratify(&set, t).unwrap();
        prop_assert_eq!(split.dense.len() + split.sparse.len(), set.len());
        let mut ids: Vec<u64> = split.dense.ids().chain(split.sparse.ids()).collect();
        ids.sort_unstable();
        prop_assert_eq!(ids, set.ids().collect::<Vec<_>>());
        prop_assert!(split.dense.units().iter().all(|u| u.builtup >= t));
        prop_assert!(split.sparse.units().iter().all(|u| u.builtup < t));
    }

    #[test]
    fn raising_the_threshold_never_grows_dense(b in builtups(), t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let set = set_of(&b);
        let a = strata::stratify(&set, lo).unwrap();
        let c = strata::stratify(&set, hi).unwrap();
        prop_assert!(c.stratum(Stratum::Dense).len() <= a.stratum(Stratum::Dense).len());
    }

    #[test]
    fn quartile_ignores_order(mut b in builtups(), seed in any::<u64>()) {
        let q = strata::quartile_threshold(&b).unwrap();
        let n = b.len();
        let k = (seed as usize) % n;
        b.rotate_right(k);
        b.reverse();
        prop_assert_eq!(q, strata::quartile_threshold(&b).unwrap());
    }

    #[test]
    fn quartile_lies_within_range(b in builtups()) {
        let q = strata::quartile_threshold(&b).unwrap();
        let lo = b.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = b.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(q >= lo && q <= hi);
        let set = set_of(&b);
        let split = strata::stratify(&set, q).unwrap();
        prop_assert!(split.dense.len() * 4 >= set.len() * 3 - 3);
    }

    #[test]
    fn allocation_sums_to_total(n in 2usize..1000, f in 0.0f64..=1.0) {
        let a = strata::allocate(n, f).unwrap();
        prop_assert_eq!(a.total(), n);
        prop_assert!((a.n_dense as f64 - n as f64 * f).abs() <= 0.5 + 1e-9);
    }
}

#[test]
fn four_value_quartile() {
    let q = strata::quartile_threshold(&[0.0f64, 0.1, 0.2, 0.9]).unwrap();
    assert!((q - 0.075).abs() < 1e-12);
}

#[test]
fn half_rounds_away_from_zero() {
    let a = strata::allocate(5, 0.5).unwrap();
    assert_eq!((a.n_dense, a.n_sparse), (3, 2));
    let a = strata::allocate(100, 0.8).unwrap();
    assert_eq!((a.n_dense, a.n_sparse), (80, 20));
}
