//! Desk-scale hidden-layer sweep on the simulated 5-RSU layout.
//!
//! `cargo run --release -p rssloc --example desk_sweep [seed]`
//!
//! `REPEATS` (default 1) sets measurements per grid point, `EPOCHS` (default 500) the training length.

use rssloc::baseline::NearestRss;
use rssloc::channel::{generate_campaign, split_dataset, CampaignConfig, Deployment, PathLossModel};
use rssloc::eval::{self, EvalSetup, SweepConfig, DEFAULT_CONFIDENCE_LEVELS};
use rssloc::net::{Activation, TrainConfig};
use rssloc::{seed, Estimator};

fn main() -> rssloc::Result<()> {
    let master: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let model = PathLossModel::with_channel(3.0, 5.0)?;
    let deployment = Deployment::simulated_layout();
    let env = |k: &str, d: usize| std::env::var(k).ok().and_then(|v| v.parse().ok()).unwrap_or(d);
    let campaign_cfg = CampaignConfig {
        repeats_per_point: env("REPEATS", 1),
        ..CampaignConfig::desk_scale()
    };
    let campaign = generate_campaign(
        &model,
        &deployment,
        &campaign_cfg,
        &mut seed::rng(seed::derive(master, seed::CAMPAIGN)),
    )?;
    let ds = split_dataset(&campaign.dataset, 0.1, &mut seed::rng(seed::derive(master, seed::SPLIT)))?;
    let (train, test) = ds.partition()?;

    let cfg = SweepConfig {
        hidden_sizes: vec![3, 8, 16, 32],
        activation: Activation::Relu,
        train: TrainConfig {
            epochs: env("EPOCHS", 500),
            ..TrainConfig::default()
        },
        master_seed: master,
        confidence_levels: DEFAULT_CONFIDENCE_LEVELS.to_vec(),
        bin_width_m: 10.0,
        parallel: true,
    };
    let report = eval::sweep_hidden_layer(&train, &test, &model, &deployment, &cfg)?;
    for e in &report.entries {
        let (Some(c), Some(h)) = (&e.containment, &e.histogram) else {
            println!("P_n={:>3} failed: {}", e.hidden, e.error.as_deref().unwrap_or("?"));
            continue;
        };
        println!(
            "P_n={:>3} params={:>4} cl: {:?} mean_err={:.2} crb1s={:.2} t={:.1}s",
            e.hidden,
            e.parameter_count,
            c.records.iter().map(|r| (r.fraction * 1000.0).round() / 10.0).collect::<Vec<_>>(),
            h.mean_error_m,
            h.one_sigma_crb_m,
            e.wall_time_s
        );
    }
    let baseline = NearestRss::new(train.clone())?;
    let setup = EvalSetup {
        model: &model,
        deployment: &deployment,
        confidence_levels: &DEFAULT_CONFIDENCE_LEVELS,
        bin_width_m: 10.0,
    };
    let b = eval::evaluate(&baseline, &test, &setup)?;
    println!(
        "{}: cl: {:?} mean_err={:.2}",
        baseline.name(),
        b.containment.records.iter().map(|r| (r.fraction * 1000.0).round() / 10.0).collect::<Vec<_>>(),
        b.histogram.mean_error_m
    );
    Ok(())
}
