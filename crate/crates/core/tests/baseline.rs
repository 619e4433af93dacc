mod common;

use proptest::prelude::*;
use rand::Rng;
use rssloc::baseline::{estimate_nearest_rss, nearest_index, NearestRss};
use rssloc::channel::{LabeledSample, Position};
use rssloc::Estimator;

fn random_train<R: Rng>(rng: &mut R, n: usize, dim: usize) -> Vec<LabeledSample> {
    (0..n)
        .map(|_| LabeledSample {
            position: Position::new(rng.random_range(0.0..200.0), rng.random_range(0.0..200.0)),
            rss: (0..dim).map(|_| rng.random_range(-110.0..-40.0)).collect(),
        })
        .collect()
}

#[test]
fn matches_exhaustive_search() {
    let mut rng = common::rng(41);
    for _ in 0..50 {
        let train = random_train(&mut rng, 100, 5);
        let query: Vec<f64> = (0..5).map(|_| rng.random_range(-110.0..-40.0)).collect();
        let i = common::brute_force_nearest(&train, &query);
        assert_eq!(nearest_index(&train, &query).unwrap(), i);
        assert_eq!(estimate_nearest_rss(&train, &query).unwrap(), train[i].position);
    }
}

#[test]
fn duplicated_fingerprints_resolve_to_first() {
    let mut rng = common::rng(42);
    let mut train = random_train(&mut rng, 20, 5);
    let dup = LabeledSample {
        position: Position::new(-1.0, -1.0),
        rss: train[3].rss.clone(),
    };
    train.push(dup);
    let query = train[3].rss.clone();
    assert_eq!(nearest_index(&train, &query).unwrap(), 3);
}

#[test]
fn estimator_interface() {
    let mut rng = common::rng(43);
    let train = random_train(&mut rng, 30, 4);
    let est = NearestRss::new(train.clone()).unwrap();
    assert_eq!(est.input_dim(), 4);
    assert_eq!(est.predict(&train[7].rss).unwrap(), train[7].position);
    assert!(est.predict(&[0.0; 3]).is_err());
    assert!(NearestRss::new(Vec::new()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_invariant_and_member(seed in any::<u64>(), shift in -30.0f64..30.0) {
        let mut rng = common::rng(seed);
        let train = random_train(&mut rng, 25, 5);
        let query: Vec<f64> = (0..5).map(|_| rng.random_range(-110.0..-40.0)).collect();
        let p = estimate_nearest_rss(&train, &query).unwrap();
        prop_assert!(train.iter().any(|s| s.position == p));

        let shifted: Vec<LabeledSample> = train
            .iter()
            .map(|s| LabeledSample { position: s.position, rss: s.rss.iter().map(|r| r + shift).collect() })
            .collect();
        let q2: Vec<f64> = query.iter().map(|r| r + shift).collect();
        // Shifting can change distances by rounding; compare against the oracle on shifted data.
        prop_assert_eq!(nearest_index(&shifted, &q2).unwrap(), common::brute_force_nearest(&shifted, &q2));
        let a = common::brute_force_nearest(&train, &query);
        let b = common::brute_force_nearest(&shifted, &q2);
        if a != b {
            let d = |t: &[LabeledSample], q: &[f64], i: usize| -> f64 {
                t[i].rss.iter().zip(q).map(|(x, y)| (x - y).powi(2)).sum()
            };
            // Only a near-tie may flip under rounding.
            prop_assert!((d(&train, &query, a) - d(&train, &query, b)).abs() < 1e-9);
        }
    }
}
