mod common;

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rssloc::baseline::NearestRss;
use rssloc::channel::{generate_campaign, split_dataset, CampaignConfig, Deployment, LabeledSample, PathLossModel, Position};
use rssloc::eval::{
    compare_estimators, containment_metrics, error_histogram, evaluate, smooth_polynomial, EvalSetup,
    DEFAULT_CONFIDENCE_LEVELS,
};
use rssloc::io::report;
use rssloc::net::{fit, Activation, TrainConfig};
use rssloc::{seed, Estimator, Result};

/// Looks the answer up by the exact RSS vector.
struct Lookup {
    table: HashMap<Vec<u64>, Position>,
}

impl Lookup {
    fn key(rss: &[f64]) -> Vec<u64> {
        rss.iter().map(|v| v.to_bits()).collect()
    }
}

impl Estimator for Lookup {
    fn name(&self) -> String {
        "lookup".into()
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn predict(&self, rss: &[f64]) -> Result<Position> {
        Ok(self.table[&Self::key(rss)])
    }
}

/// Test points tagged by a unique scalar "RSS".
fn tagged_points<R: Rng>(rng: &mut R, dep: &Deployment, n: usize) -> Vec<LabeledSample> {
    (0..n)
        .map(|i| LabeledSample {
            position: common::interior_point(rng, dep, 5.0),
            rss: vec![i as f64],
        })
        .collect()
}

#[test]
fn efficient_estimator_hits_nominal_levels() {
    let model = PathLossModel::default();
    let dep = Deployment::simulated_layout();
    let mut rng = common::rng(51);
    let test = tagged_points(&mut rng, &dep, 10_000);
    let table = test
        .iter()
        .map(|s| {
            let (cxx, cxy, cyy) = common::crb_oracle(&model, &dep, s.position);
            (Lookup::key(&s.rss), common::gaussian_2d(&mut rng, s.position, cxx, cxy, cyy))
        })
        .collect();
    let r = containment_metrics(&Lookup { table }, &test, &model, &dep, &DEFAULT_CONFIDENCE_LEVELS).unwrap();
    assert_eq!(r.excluded, 0);
    for rec in &r.records {
        assert!((rec.fraction - rec.confidence).abs() < 0.02, "{rec:?}");
        assert_eq!(rec.test_count, 10_000);
    }
}

#[test]
fn perfect_and_far_estimators() {
    let model = PathLossModel::default();
    let dep = Deployment::simulated_layout();
    let mut rng = common::rng(52);
    let test = tagged_points(&mut rng, &dep, 200);
    let perfect = Lookup {
        table: test.iter().map(|s| (Lookup::key(&s.rss), s.position)).collect(),
    };
    let r = containment_metrics(&perfect, &test, &model, &dep, &DEFAULT_CONFIDENCE_LEVELS).unwrap();
    assert!(r.records.iter().all(|c| c.fraction == 1.0));
    let h = error_histogram(&perfect, &test, &model, &dep, 10.0).unwrap();
    assert_eq!(h.counts, vec![200]);
    assert_eq!(h.mean_error_m, 0.0);

    let far = Lookup {
        table: test.iter().map(|s| (Lookup::key(&s.rss), Position::new(1e6, 1e6))).collect(),
    };
    let r = containment_metrics(&far, &test, &model, &dep, &[0.3935]).unwrap();
    assert_eq!(r.records[0].fraction, 0.0);
}

#[test]
fn one_sigma_crb_matches_crb_module() {
    let model = PathLossModel::default();
    let dep = Deployment::simulated_layout();
    let truth = Position::new(100.0, 100.0);
    // The centre RSU sits on (100, 100); step just off it.
    let p = Position::new(100.0, 103.0);
    let test = vec![LabeledSample { position: p, rss: vec![0.0] }];
    let est = Lookup {
        table: [(Lookup::key(&[0.0]), p)].into_iter().collect(),
    };
    let h = error_histogram(&est, &test, &model, &dep, 10.0).unwrap();
    let c = rssloc::crb::crb_at(&model, &dep, p).unwrap();
    assert_eq!(h.one_sigma_crb_m, c.rho_sq.sqrt());
    let (cxx, _, cyy) = common::crb_oracle(&model, &dep, p);
    assert!((h.one_sigma_crb_m - (cxx + cyy).sqrt()).abs() < 1e-9 * h.one_sigma_crb_m);

    // On the second layout (100, 100) is a regular point.
    let dep2 = Deployment::ellipse_layout();
    let test = vec![LabeledSample { position: truth, rss: vec![0.0] }];
    let est = Lookup {
        table: [(Lookup::key(&[0.0]), truth)].into_iter().collect(),
    };
    let h = error_histogram(&est, &test, &model, &dep2, 10.0).unwrap();
    let (cxx, _, cyy) = common::crb_oracle(&model, &dep2, truth);
    assert!((h.one_sigma_crb_m - (cxx + cyy).sqrt()).abs() < 1e-9 * h.one_sigma_crb_m);
}

#[test]
fn rsu_location_is_excluded_not_fatal() {
    let model = PathLossModel::default();
    let dep = Deployment::simulated_layout();
    let test = vec![
        LabeledSample { position: Position::new(100.0, 100.0), rss: vec![0.0] },
        LabeledSample { position: Position::new(50.0, 60.0), rss: vec![1.0] },
    ];
    let est = Lookup {
        table: test.iter().map(|s| (Lookup::key(&s.rss), s.position)).collect(),
    };
    let r = containment_metrics(&est, &test, &model, &dep, &[0.95]).unwrap();
    assert_eq!(r.excluded, 1);
    assert_eq!(r.records[0].test_count, 1);
    assert_eq!(r.records[0].fraction, 1.0);
}

fn desk_task() -> (Vec<LabeledSample>, Vec<LabeledSample>) {
    let model = PathLossModel::default();
    let c = generate_campaign(
        &model,
        &Deployment::simulated_layout(),
        &CampaignConfig::desk_scale(),
        &mut seed::rng(seed::derive(5, seed::CAMPAIGN)),
    )
    .unwrap();
    split_dataset(&c.dataset, 0.1, &mut seed::rng(seed::derive(5, seed::SPLIT)))
        .unwrap()
        .partition()
        .unwrap()
}

#[test]
fn reports_are_order_invariant_and_repeatable() {
    let model = PathLossModel::default();
    let dep = Deployment::simulated_layout();
    let (train, test) = desk_task();
    let baseline = NearestRss::new(train).unwrap();
    let setup = EvalSetup {
        model: &model,
        deployment: &dep,
        confidence_levels: &DEFAULT_CONFIDENCE_LEVELS,
        bin_width_m: 10.0,
    };
    let a = evaluate(&baseline, &test, &setup).unwrap();
    let mut shuffled = test.clone();
    shuffled.shuffle(&mut common::rng(53));
    let b = evaluate(&baseline, &shuffled, &setup).unwrap();
    assert_eq!(a.containment, b.containment);
    assert_eq!(a.histogram.counts, b.histogram.counts);
    assert!((a.histogram.mean_error_m - b.histogram.mean_error_m).abs() < 1e-12 * a.histogram.mean_error_m);

    let twice = compare_estimators(&[&baseline, &baseline], &test, &setup).unwrap();
    assert_eq!(twice[0], twice[1]);
    assert_eq!(twice[0], a);
}

#[test]
fn baseline_recalls_training_points() {
    let model = PathLossModel::default();
    let dep = Deployment::simulated_layout();
    let (train, _) = desk_task();
    let subset: Vec<LabeledSample> = train.iter().step_by(7).cloned().collect();
    let baseline = NearestRss::new(train).unwrap();
    let r = containment_metrics(&baseline, &subset, &model, &dep, &DEFAULT_CONFIDENCE_LEVELS).unwrap();
    assert!(r.records.iter().all(|c| c.fraction == 1.0), "{r:?}");
}

#[test]
fn trained_net_does_not_beat_the_bound() {
    let model = PathLossModel::default();
    let dep = Deployment::simulated_layout();
    let (train, test) = desk_task();
    let cfg = TrainConfig {
        seed: seed::derive(5, seed::TRAIN),
        ..TrainConfig::default()
    };
    let (net, _) = fit(&train, 8, Activation::Relu, &cfg).unwrap();
    let r = containment_metrics(&net, &test, &model, &dep, &DEFAULT_CONFIDENCE_LEVELS).unwrap();
    for rec in &r.records {
        let n = rec.test_count as f64;
        let band = 3.0 * (rec.confidence * (1.0 - rec.confidence) / n).sqrt();
        assert!(rec.fraction <= rec.confidence + band, "{rec:?}");
    }
}

#[test]
fn smoothing_is_presentation_only() {
    let (train, test) = desk_task();
    let model = PathLossModel::default();
    let dep = Deployment::simulated_layout();
    let cfg = rssloc::eval::SweepConfig {
        hidden_sizes: vec![2, 3, 4],
        activation: Activation::Relu,
        train: TrainConfig {
            epochs: 5,
            ..TrainConfig::default()
        },
        master_seed: 1,
        confidence_levels: DEFAULT_CONFIDENCE_LEVELS.to_vec(),
        bin_width_m: 10.0,
        parallel: false,
    };
    let sweep = rssloc::eval::sweep_hidden_layer(&train, &test, &model, &dep, &cfg).unwrap();
    let before = sweep.clone();
    let plot = report::sweep_plot_csv(&sweep).unwrap();
    assert_eq!(sweep, before);
    // Raw column equals the stored fractions.
    for line in plot.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let e = sweep.entry(f[0].parse().unwrap()).unwrap();
        let cl: f64 = f[1].parse().unwrap();
        let raw: f64 = f[2].parse().unwrap();
        assert_eq!(raw, 100.0 * e.containment.as_ref().unwrap().fraction_at(cl).unwrap());
    }
}

#[test]
fn order_seven_fit_reduces_variance() {
    let mut rng = common::rng(54);
    let xs: Vec<f64> = (0..20).map(|i| 3.0 + 2.0 * i as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 60.0 + 20.0 * (x / 40.0).tanh() + rng.random_range(-3.0..3.0)).collect();
    let fit = smooth_polynomial(&xs, &ys, 7).unwrap();
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let raw_var: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let resid: f64 = ys.iter().zip(&fit).map(|(y, f)| (y - f).powi(2)).sum();
    assert!(resid <= raw_var, "{resid} > {raw_var}");

    let line: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
    let fit = smooth_polynomial(&xs, &line, 1).unwrap();
    assert!(line.iter().zip(&fit).all(|(a, b)| (a - b).abs() < 1e-9));
}
