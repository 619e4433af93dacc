mod common;

use proptest::prelude::*;
use rssloc::channel::{
    generate_campaign, mean_path_loss, sample_rss, split_dataset, CampaignConfig, Deployment, PathLossModel,
    Position,
};
use rssloc::seed;

#[test]
fn shadowing_moments() {
    // A single RSU 10 m away: mean RSS is -50 dBm.
    let model = PathLossModel::default();
    let dep = Deployment::new(vec![Position::new(10.0, 0.0)]).unwrap();
    let mut rng = common::rng(11);
    let n = 100_000;
    let draws: Vec<f64> = (0..n)
        .map(|_| sample_rss(&model, &dep, Position::new(0.0, 0.0), &mut rng).unwrap()[0])
        .collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let sd = (draws.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    // Standard error of the mean is 5/sqrt(1e5) ~ 0.016.
    assert!((mean + 50.0).abs() < 0.05, "mean {mean}");
    assert!((sd - 5.0).abs() < 0.05, "sd {sd}");
}

#[test]
fn shadowing_is_uncorrelated_across_rsus() {
    let model = PathLossModel::default();
    let dep = Deployment::simulated_layout();
    let truth = Position::new(60.0, 140.0);
    let mu: Vec<f64> = dep.rsus().iter().map(|&r| common::mean_rss(&model, r, truth)).collect();
    let mut rng = common::rng(12);
    let n = 50_000;
    let noise: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let r = sample_rss(&model, &dep, truth, &mut rng).unwrap();
            r.iter().zip(&mu).map(|(a, b)| a - b).collect()
        })
        .collect();
    for i in 0..dep.len() {
        for j in (i + 1)..dep.len() {
            let cov: f64 = noise.iter().map(|v| v[i] * v[j]).sum::<f64>() / n as f64;
            let corr = cov / 25.0;
            assert!(corr.abs() < 0.02, "corr({i},{j}) = {corr}");
        }
    }
}

#[test]
fn noiseless_campaign_matches_closed_form() {
    let model = PathLossModel::with_channel(3.0, 0.0).unwrap();
    let dep = Deployment::simulated_layout();
    let cfg = CampaignConfig::desk_scale();
    let c = generate_campaign(&model, &dep, &cfg, &mut common::rng(1)).unwrap();
    for s in &c.dataset.samples {
        for (r, &rsu) in s.rss.iter().zip(dep.rsus()) {
            let want = common::mean_rss(&model, rsu, s.position);
            assert!((r - want).abs() < 1e-9, "{r} vs {want}");
        }
    }
}

#[test]
fn campaign_is_bit_reproducible() {
    let model = PathLossModel::default();
    let dep = Deployment::simulated_layout();
    let cfg = CampaignConfig::desk_scale();
    let s = seed::derive(7, seed::CAMPAIGN);
    let a = generate_campaign(&model, &dep, &cfg, &mut seed::rng(s)).unwrap();
    let b = generate_campaign(&model, &dep, &cfg, &mut seed::rng(s)).unwrap();
    assert_eq!(a.dataset, b.dataset);
    let c = generate_campaign(&model, &dep, &cfg, &mut seed::rng(s + 1)).unwrap();
    assert_ne!(a.dataset, c.dataset);
}

#[test]
fn off_grid_rsus_keep_every_grid_point() {
    let dep = Deployment::new(vec![
        Position::new(2.5, 2.5),
        Position::new(2.5, 197.5),
        Position::new(102.5, 97.5),
        Position::new(197.5, 2.5),
        Position::new(197.5, 197.5),
    ])
    .unwrap();
    let c = generate_campaign(&PathLossModel::default(), &dep, &CampaignConfig::desk_scale(), &mut common::rng(3)).unwrap();
    assert_eq!(c.dataset.len(), 1681);
    assert_eq!(c.skipped_points, 0);
}

#[test]
fn repeats_multiply_samples() {
    let cfg = CampaignConfig {
        repeats_per_point: 5,
        ..CampaignConfig::desk_scale()
    };
    let c = generate_campaign(
        &PathLossModel::default(),
        &Deployment::simulated_layout(),
        &cfg,
        &mut common::rng(4),
    )
    .unwrap();
    assert_eq!(c.dataset.len(), 5 * 1676);
    assert_eq!(c.skipped_points, 5);
}

#[test]
fn split_covers_dataset_without_overlap() {
    let model = PathLossModel::default();
    let c = generate_campaign(
        &model,
        &Deployment::simulated_layout(),
        &CampaignConfig::desk_scale(),
        &mut common::rng(5),
    )
    .unwrap();
    let ds = split_dataset(&c.dataset, 0.1, &mut common::rng(6)).unwrap();
    let split = ds.split.as_ref().unwrap();
    assert_eq!(split.test.len(), (0.1 * ds.len() as f64).round() as usize);
    let mut all: Vec<usize> = split.train.iter().chain(&split.test).copied().collect();
    all.sort_unstable();
    assert_eq!(all, (0..ds.len()).collect::<Vec<_>>());
}

proptest! {
    #[test]
    fn path_loss_increases_with_distance(d1 in 1.0f64..1e4, d2 in 1.0f64..1e4, gamma in 1.5f64..6.0) {
        prop_assume!(d1 < d2);
        let m = PathLossModel::with_channel(gamma, 5.0).unwrap();
        prop_assert!(mean_path_loss(&m, d1).unwrap() < mean_path_loss(&m, d2).unwrap());
    }

    #[test]
    fn below_reference_distance_is_rejected(d in 0.0f64..0.999) {
        prop_assert!(mean_path_loss(&PathLossModel::default(), d).is_err());
    }
}
