//! `rssloc` command-line front end.
//!
//! Exit codes: 0 on success, 2 on usage errors (unknown flags, bad values),
//! 1 on runtime failures. Every run that writes files writes them into its
//! own `--out` directory together with the resolved `config.toml`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use rssloc::baseline::NearestRss;
use rssloc::channel::{self, Dataset, Deployment, LabeledSample, PathLossModel, Position};
use rssloc::crb::{self, ErrorNorm};
use rssloc::eval::{self, EvalSetup, SweepConfig};
use rssloc::io::config::{RunConfig, KEYS_HELP};
use rssloc::io::{dataset, fmt_f64, ingest, model as model_io, report};
use rssloc::net::{self, Activation, Optimizer};
use rssloc::{seed, Estimator};

const EXIT_RUNTIME: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "rssloc", version, about = "RSS localization toolkit", after_help = KEYS_HELP)]
struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat TOML config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a grid measurement campaign.
    Generate(GenerateArgs),
    /// Add a random train/test split to a dataset.
    Split(SplitArgs),
    /// Train a shallow network on the training partition.
    Train(TrainArgs),
    /// Predict positions for every sample of a dataset.
    Predict(PredictArgs),
    /// Containment and error histogram of a trained model.
    Evaluate(EvaluateArgs),
    /// Train and evaluate one network per hidden-layer size.
    Sweep(SweepArgs),
    /// Shallow network against the nearest-RSS baseline.
    Compare(CompareArgs),
    /// Fisher information, CRB and confidence ellipses at one position.
    Crb(CrbArgs),
    /// Recommended hidden-layer size.
    Size(SizeArgs),
    /// Join per-RSU RSS streams with a position track into a dataset.
    Ingest(IngestArgs),
}

#[derive(Args, Debug, Default)]
struct ChannelArgs {
    /// Shadowing standard deviation in dB.
    #[arg(long)]
    sigma: Option<f64>,
    /// Path-loss exponent.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    tx_power: Option<f64>,
    #[arg(long)]
    ref_loss: Option<f64>,
    #[arg(long)]
    ref_distance: Option<f64>,
}

impl ChannelArgs {
    fn apply(&self, c: &mut RunConfig) {
        set(&mut c.sigma_db, self.sigma);
        set(&mut c.gamma, self.gamma);
        set(&mut c.tx_power_dbm, self.tx_power);
        set(&mut c.ref_loss_db, self.ref_loss);
        set(&mut c.ref_distance_m, self.ref_distance);
    }
}

#[derive(Args, Debug, Default)]
struct NetArgs {
    #[arg(long)]
    activation: Option<Activation>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    optimizer: Option<Optimizer>,
    #[arg(long)]
    validation_fraction: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
}

impl NetArgs {
    fn apply(&self, c: &mut RunConfig) {
        set(&mut c.activation, self.activation);
        set(&mut c.epochs, self.epochs);
        set(&mut c.batch_size, self.batch_size);
        set(&mut c.learning_rate, self.learning_rate);
        set(&mut c.optimizer, self.optimizer);
        set(&mut c.validation_fraction, self.validation_fraction);
        set(&mut c.patience, self.patience);
    }
}

#[derive(Args, Debug, Default)]
struct EvalArgs {
    /// Comma-separated confidence levels.
    #[arg(long, value_delimiter = ',')]
    confidence: Option<Vec<f64>>,
    #[arg(long)]
    bin_width: Option<f64>,
    /// Also write raw and smoothed series for plotting.
    #[arg(long)]
    plot_data: bool,
}

impl EvalArgs {
    fn apply(&self, c: &mut RunConfig) {
        set(&mut c.confidence_levels, self.confidence.clone());
        set(&mut c.bin_width_m, self.bin_width);
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Area as WIDTHxHEIGHT in meters, anchored at the origin.
    #[arg(long, value_parser = parse_area)]
    area: Option<(f64, f64)>,
    #[arg(long)]
    spacing: Option<f64>,
    #[arg(long)]
    repeats: Option<usize>,
    /// RSU coordinates (`x_m,y_m`); defaults to the built-in five-RSU layout.
    #[arg(long)]
    rsus: Option<PathBuf>,
    /// Also split the samples with this test fraction.
    #[arg(long)]
    test_fraction: Option<f64>,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SplitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    test_fraction: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    hidden: Option<usize>,
    #[command(flatten)]
    net: NetArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    eval: EvalArgs,
    /// Channel used for the CRB when the dataset does not record one.
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated hidden-layer sizes.
    #[arg(long, value_delimiter = ',')]
    pn: Option<Vec<usize>>,
    /// Train the sizes one after another.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    net: NetArgs,
    #[command(flatten)]
    eval: EvalArgs,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long)]
    data: PathBuf,
    /// Trained model; one is trained on the training partition when omitted.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    hidden: Option<usize>,
    #[command(flatten)]
    net: NetArgs,
    #[command(flatten)]
    eval: EvalArgs,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CrbArgs {
    #[arg(long, allow_hyphen_values = true)]
    x: f64,
    #[arg(long, allow_hyphen_values = true)]
    y: f64,
    #[arg(long)]
    rsus: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    confidence: Option<Vec<f64>>,
    #[command(flatten)]
    channel: ChannelArgs,
    /// Write ellipse boundary points to this CSV.
    #[arg(long)]
    ellipse_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 72)]
    points: usize,
}

#[derive(Args, Debug)]
struct SizeArgs {
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    distance_scale: Option<f64>,
    #[arg(long)]
    eval_distance: Option<f64>,
    #[arg(long)]
    norm: Option<ErrorNorm>,
    #[arg(long)]
    calibration: Option<f64>,
    #[arg(long)]
    max_neurons: Option<usize>,
    /// Largest P_n listed in the table.
    #[arg(long, default_value_t = 32)]
    table_max: usize,
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// Comma-separated RSS stream files, in RSU order.
    #[arg(long, value_delimiter = ',', required = true)]
    streams: Vec<PathBuf>,
    #[arg(long)]
    track: PathBuf,
    #[arg(long)]
    rsus: PathBuf,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

fn set<T>(slot: &mut Option<T>, value: Option<T>) {
    if value.is_some() {
        *slot = value;
    }
}

fn parse_area(s: &str) -> Result<(f64, f64), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    let w: f64 = w.trim().parse().map_err(|e| format!("width: {e}"))?;
    let h: f64 = h.trim().parse().map_err(|e| format!("height: {e}"))?;
    Ok((w, h))
}

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

struct Run {
    cfg: RunConfig,
}

impl Run {
    fn new(cli: &Cli) -> AnyResult<Self> {
        let mut cfg = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        set(&mut cfg.seed, cli.seed);
        Ok(Self { cfg })
    }

    fn master(&self) -> u64 {
        self.cfg.seed()
    }

    /// Create `out` and echo the resolved configuration into it.
    fn prepare_out(&self, out: &Path) -> AnyResult<()> {
        fs::create_dir_all(out)?;
        fs::write(out.join("config.toml"), self.cfg.resolved()?.to_toml_string()?)?;
        Ok(())
    }

    fn setup<'a>(&self, model: &'a PathLossModel, dep: &'a Deployment, levels: &'a [f64]) -> EvalSetup<'a> {
        EvalSetup {
            model,
            deployment: dep,
            confidence_levels: levels,
            bin_width_m: self.cfg.bin_width_m(),
        }
    }
}

fn write(path: &Path, text: &str) -> AnyResult<()> {
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn deployment_from(path: Option<&Path>) -> AnyResult<Deployment> {
    Ok(match path {
        Some(p) => dataset::read_rsus(p)?,
        None => Deployment::simulated_layout(),
    })
}

/// Channel recorded with the dataset, else the configured one.
fn eval_model(ds: &Dataset, run: &Run) -> AnyResult<PathLossModel> {
    match ds.model {
        Some(m) => {
            log::info!("using the channel recorded in the dataset metadata");
            Ok(m)
        }
        None => Ok(run.cfg.path_loss_model()?),
    }
}

/// Training and test partitions; datasets without a split train on everything.
fn partitions(ds: &Dataset) -> AnyResult<(Vec<LabeledSample>, Vec<LabeledSample>)> {
    match ds.split {
        Some(_) => Ok(ds.partition()?),
        None => {
            log::warn!("dataset has no split; using every sample");
            Ok((ds.samples.clone(), ds.samples.clone()))
        }
    }
}

fn ensure_split(ds: Dataset, run: &Run) -> AnyResult<Dataset> {
    if ds.split.is_some() {
        return Ok(ds);
    }
    let mut rng = seed::rng(seed::derive(run.master(), seed::SPLIT));
    log::info!("dataset has no split; splitting at {}", run.cfg.test_fraction());
    Ok(channel::split_dataset(&ds, run.cfg.test_fraction(), &mut rng)?)
}

fn cmd_generate(run: &mut Run, a: &GenerateArgs) -> AnyResult<()> {
    if let Some((w, h)) = a.area {
        run.cfg.area_width_m = Some(w);
        run.cfg.area_height_m = Some(h);
    }
    set(&mut run.cfg.spacing_m, a.spacing);
    set(&mut run.cfg.repeats, a.repeats);
    set(&mut run.cfg.test_fraction, a.test_fraction);
    a.channel.apply(&mut run.cfg);
    let model = run.cfg.path_loss_model()?;
    let campaign_cfg = run.cfg.campaign_config()?;
    let dep = deployment_from(a.rsus.as_deref())?;
    let master = run.master();
    let mut rng = seed::rng(seed::derive(master, seed::CAMPAIGN));
    let campaign = channel::generate_campaign(&model, &dep, &campaign_cfg, &mut rng)?;
    let mut ds = campaign.dataset;
    if a.test_fraction.is_some() {
        let mut rng = seed::rng(seed::derive(master, seed::SPLIT));
        ds = channel::split_dataset(&ds, run.cfg.test_fraction(), &mut rng)?;
    }
    run.prepare_out(&a.out)?;
    let path = a.out.join("dataset.csv");
    dataset::write_dataset(&ds, &path, Some(master))?;
    println!(
        "wrote {} samples ({} grid points skipped) to {}",
        ds.len(),
        campaign.skipped_points,
        path.display()
    );
    Ok(())
}

fn cmd_split(run: &mut Run, a: &SplitArgs) -> AnyResult<()> {
    set(&mut run.cfg.test_fraction, a.test_fraction);
    let (ds, _) = dataset::read_dataset(&a.data)?;
    let mut rng = seed::rng(seed::derive(run.master(), seed::SPLIT));
    let ds = channel::split_dataset(&ds, run.cfg.test_fraction(), &mut rng)?;
    run.prepare_out(&a.out)?;
    let path = a.out.join("dataset.csv");
    dataset::write_dataset(&ds, &path, Some(run.master()))?;
    let split = ds.split.as_ref().expect("just split");
    println!("train {} / test {} -> {}", split.train.len(), split.test.len(), path.display());
    Ok(())
}

fn cmd_train(run: &mut Run, a: &TrainArgs) -> AnyResult<()> {
    set(&mut run.cfg.hidden, a.hidden);
    a.net.apply(&mut run.cfg);
    let (ds, _) = dataset::read_dataset(&a.data)?;
    let (train, _) = partitions(&ds)?;
    let cfg = run.cfg.train_config(seed::derive(run.master(), seed::TRAIN))?;
    let (net, log) = net::fit(&train, run.cfg.hidden(), run.cfg.activation(), &cfg)?;
    run.prepare_out(&a.out)?;
    model_io::write_model(&net, &a.out.join("model.json"))?;
    write(&a.out.join("training_log.csv"), &report::training_log_csv(&log))?;
    println!(
        "trained {} on {} samples; final loss {}",
        net.name(),
        train.len(),
        log.train_loss.last().map_or_else(String::new, |l| fmt_f64(*l))
    );
    Ok(())
}

fn cmd_predict(_run: &mut Run, a: &PredictArgs) -> AnyResult<()> {
    let net = model_io::read_model(&a.model)?;
    let (ds, _) = dataset::read_dataset(&a.data)?;
    let mut out = String::from("x_m,y_m,x_hat_m,y_hat_m\n");
    for s in &ds.samples {
        let p = net.predict(&s.rss)?;
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(s.position.x),
            fmt_f64(s.position.y),
            fmt_f64(p.x),
            fmt_f64(p.y)
        ));
    }
    match &a.out {
        Some(p) => write(p, &out)?,
        None => print!("{out}"),
    }
    Ok(())
}

fn write_reports(out: &Path, reports: &[eval::EstimatorReport], plot: bool, run: &Run) -> AnyResult<()> {
    let (containment, histogram) = report::estimator_reports_csv(reports);
    write(&out.join("containment.csv"), &containment)?;
    write(&out.join("histogram.csv"), &histogram)?;
    let summary = json!({
        "seed": run.master(),
        "estimators": reports,
    });
    write(&out.join("summary.json"), &report::to_json(&summary)?)?;
    if plot {
        let mut text = String::new();
        for (i, r) in reports.iter().enumerate() {
            let csv = report::histogram_plot_csv(&r.name, &r.histogram)?;
            // Keep a single header across estimators.
            let body = if i == 0 { &csv[..] } else { csv.split_once('\n').map_or("", |x| x.1) };
            text.push_str(body);
        }
        write(&out.join("histogram_plot.csv"), &text)?;
    }
    for r in reports {
        let pct: Vec<String> = r
            .containment
            .records
            .iter()
            .map(|c| format!("CL {}: {:.1}%", c.confidence, 100.0 * c.fraction))
            .collect();
        println!(
            "{}: mean error {:.2} m (1-sigma CRB {:.2} m); {}",
            r.name,
            r.histogram.mean_error_m,
            r.histogram.one_sigma_crb_m,
            pct.join(", ")
        );
    }
    Ok(())
}

fn cmd_evaluate(run: &mut Run, a: &EvaluateArgs) -> AnyResult<()> {
    a.eval.apply(&mut run.cfg);
    a.channel.apply(&mut run.cfg);
    let net = model_io::read_model(&a.model)?;
    let (ds, _) = dataset::read_dataset(&a.data)?;
    let (_, test) = partitions(&ds)?;
    let model = eval_model(&ds, run)?;
    let levels = run.cfg.confidence_levels();
    let r = eval::evaluate(&net, &test, &run.setup(&model, &ds.deployment, &levels))?;
    run.prepare_out(&a.out)?;
    write_reports(&a.out, &[r], a.eval.plot_data, run)
}

fn cmd_sweep(run: &mut Run, a: &SweepArgs) -> AnyResult<()> {
    set(&mut run.cfg.pn_values, a.pn.clone());
    if a.sequential {
        run.cfg.parallel = Some(false);
    }
    a.net.apply(&mut run.cfg);
    a.eval.apply(&mut run.cfg);
    a.channel.apply(&mut run.cfg);
    let (ds, _) = dataset::read_dataset(&a.data)?;
    let ds = ensure_split(ds, run)?;
    let (train, test) = ds.partition()?;
    let model = eval_model(&ds, run)?;
    let cfg = SweepConfig {
        hidden_sizes: run.cfg.pn_values(),
        activation: run.cfg.activation(),
        train: run.cfg.train_config(0)?,
        master_seed: run.master(),
        confidence_levels: run.cfg.confidence_levels(),
        bin_width_m: run.cfg.bin_width_m(),
        parallel: run.cfg.parallel(),
    };
    let sweep = eval::sweep_hidden_layer(&train, &test, &model, &ds.deployment, &cfg)?;
    run.prepare_out(&a.out)?;
    write(&a.out.join("sweep.csv"), &report::sweep_csv(&sweep))?;
    write(&a.out.join("sweep_histogram.csv"), &report::sweep_histogram_csv(&sweep))?;
    write(&a.out.join("timing.csv"), &report::sweep_timing_csv(&sweep))?;
    // Wall times stay out of the summary so reruns are byte-identical.
    let entries: Vec<_> = sweep
        .entries
        .iter()
        .map(|e| {
            json!({
                "hidden": e.hidden,
                "parameter_count": e.parameter_count,
                "seed": e.seed,
                "containment": e.containment,
                "histogram": e.histogram,
                "final_train_loss": e.final_train_loss,
                "error": e.error,
            })
        })
        .collect();
    let summary = json!({ "seed": run.master(), "entries": entries });
    write(&a.out.join("summary.json"), &report::to_json(&summary)?)?;
    if a.eval.plot_data {
        write(&a.out.join("sweep_plot.csv"), &report::sweep_plot_csv(&sweep)?)?;
    }
    for e in &sweep.entries {
        match (&e.containment, &e.histogram) {
            (Some(c), Some(h)) => {
                let pct: Vec<String> = c.records.iter().map(|r| format!("{:.1}%", 100.0 * r.fraction)).collect();
                println!(
                    "P_n={:<3} params={:<4} containment [{}] mean error {:.2} m",
                    e.hidden,
                    e.parameter_count,
                    pct.join(", "),
                    h.mean_error_m
                );
            }
            _ => println!("P_n={:<3} failed: {}", e.hidden, e.error.as_deref().unwrap_or("unknown")),
        }
    }
    if sweep.entries.iter().all(|e| e.error.is_some()) {
        return Err("every sweep entry failed".into());
    }
    Ok(())
}

fn cmd_compare(run: &mut Run, a: &CompareArgs) -> AnyResult<()> {
    set(&mut run.cfg.hidden, a.hidden);
    a.net.apply(&mut run.cfg);
    a.eval.apply(&mut run.cfg);
    a.channel.apply(&mut run.cfg);
    let (ds, _) = dataset::read_dataset(&a.data)?;
    let ds = ensure_split(ds, run)?;
    let (train, test) = ds.partition()?;
    let model = eval_model(&ds, run)?;
    let net = match &a.model {
        Some(p) => model_io::read_model(p)?,
        None => {
            let cfg = run.cfg.train_config(seed::derive(run.master(), seed::TRAIN))?;
            net::fit(&train, run.cfg.hidden(), run.cfg.activation(), &cfg)?.0
        }
    };
    let baseline = NearestRss::new(train)?;
    let levels = run.cfg.confidence_levels();
    let reports = eval::compare_estimators(
        &[&net as &dyn Estimator, &baseline],
        &test,
        &run.setup(&model, &ds.deployment, &levels),
    )?;
    run.prepare_out(&a.out)?;
    write_reports(&a.out, &reports, a.eval.plot_data, run)
}

fn cmd_crb(run: &mut Run, a: &CrbArgs) -> AnyResult<()> {
    a.channel.apply(&mut run.cfg);
    set(&mut run.cfg.confidence_levels, a.confidence.clone());
    let model = run.cfg.path_loss_model()?;
    let dep = deployment_from(a.rsus.as_deref())?;
    let truth = Position::new(a.x, a.y);
    let f = crb::fisher(&model, &dep, truth)?;
    let c = crb::crb_covariance(&f)?;
    let mut out = String::new();
    let mut kv = |k: &str, v: f64| out.push_str(&format!("{k} = {}\n", fmt_f64(v)));
    kv("x_m", truth.x);
    kv("y_m", truth.y);
    kv("fisher_xx", f.i_xx);
    kv("fisher_xy", f.i_xy);
    kv("fisher_yy", f.i_yy);
    kv("cov_xx", c.c_xx);
    kv("cov_xy", c.c_xy);
    kv("cov_yy", c.c_yy);
    kv("rho_sq", c.rho_sq);
    kv("rho_m", c.rho_sq.sqrt());
    let mut csv = String::from("confidence,x_m,y_m\n");
    for cl in run.cfg.confidence_levels() {
        let e = crb::confidence_ellipse(&c, truth, cl)?;
        out.push_str(&format!(
            "ellipse[{cl}] = k {} semi_major_m {} semi_minor_m {} theta_rad {}\n",
            fmt_f64(e.k_scale),
            fmt_f64(e.semi_major_m),
            fmt_f64(e.semi_minor_m),
            fmt_f64(e.theta_rad)
        ));
        for p in e.boundary(a.points) {
            csv.push_str(&format!("{},{},{}\n", fmt_f64(cl), fmt_f64(p.x), fmt_f64(p.y)));
        }
    }
    print!("{out}");
    if let Some(p) = &a.ellipse_csv {
        write(p, &csv)?;
    }
    Ok(())
}

fn cmd_size(run: &mut Run, a: &SizeArgs) -> AnyResult<()> {
    let c = &mut run.cfg;
    set(&mut c.sigma_db, a.sigma);
    set(&mut c.gamma, a.gamma);
    set(&mut c.sizing_distance_scale_m, a.distance_scale);
    set(&mut c.sizing_eval_distance_m, a.eval_distance);
    set(&mut c.sizing_norm, a.norm);
    set(&mut c.sizing_calibration, a.calibration);
    set(&mut c.sizing_max_neurons, a.max_neurons);
    let cfg = c.sizing_config()?;
    let threshold = cfg.threshold_m();
    println!(
        "gamma = {}\nsigma_db = {}\nnorm = {:?}\ndistance_crb_m = {}\ncalibration = {}\nthreshold_m = {}",
        fmt_f64(cfg.exponent),
        fmt_f64(cfg.shadow_sigma_db),
        cfg.error_norm,
        fmt_f64(crb::distance_crb(cfg.exponent, cfg.shadow_sigma_db, cfg.eval_distance_m)),
        fmt_f64(cfg.calibration),
        fmt_f64(threshold)
    );
    let recommended = crb::size_hidden_layer(&cfg);
    println!("\nP_n,epsilon_m,below_threshold");
    for p in 1..=a.table_max.max(1) {
        let eps = crb::rectangle_error(&cfg, p)?;
        println!("{p},{:.4},{}", eps, eps < threshold);
    }
    println!();
    println!("recommended_p_n = {}", recommended?);
    Ok(())
}

fn cmd_ingest(run: &mut Run, a: &IngestArgs) -> AnyResult<()> {
    set(&mut run.cfg.join_tolerance_s, a.tolerance);
    let dep = dataset::read_rsus(&a.rsus)?;
    let streams = a
        .streams
        .iter()
        .enumerate()
        .map(|(i, p)| ingest::read_stream(p, i))
        .collect::<Result<Vec<_>, _>>()?;
    let track = ingest::read_track(&a.track)?;
    let joined = ingest::join_streams(&streams, &track, &dep, run.cfg.join_tolerance_s())?;
    run.prepare_out(&a.out)?;
    dataset::write_dataset(&joined.dataset, &a.out.join("dataset.csv"), None)?;
    write(&a.out.join("join_stats.json"), &report::to_json(&joined.stats)?)?;
    let s = &joined.stats;
    println!(
        "{} track records: {} samples, {} dropped (unmatched per stream {:?})",
        s.track_records, s.emitted, s.dropped, s.unmatched_per_stream
    );
    Ok(())
}

fn dispatch(cli: &Cli) -> AnyResult<()> {
    let mut run = Run::new(cli)?;
    match &cli.command {
        Command::Generate(a) => cmd_generate(&mut run, a),
        Command::Split(a) => cmd_split(&mut run, a),
        Command::Train(a) => cmd_train(&mut run, a),
        Command::Predict(a) => cmd_predict(&mut run, a),
        Command::Evaluate(a) => cmd_evaluate(&mut run, a),
        Command::Sweep(a) => cmd_sweep(&mut run, a),
        Command::Compare(a) => cmd_compare(&mut run, a),
        Command::Crb(a) => cmd_crb(&mut run, a),
        Command::Size(a) => cmd_size(&mut run, a),
        Command::Ingest(a) => cmd_ingest(&mut run, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
