//! Evaluation harness: CRB-ellipse containment, error histograms, hidden-layer
//! sweeps and estimator comparisons.
//!
//! Ellipses are always centred on the true test position and built from the
//! CRB covariance at that position. Test points where the CRB is undefined
//! (degenerate geometry, or within the reference distance of an RSU) are
//! excluded and counted rather than failing the whole evaluation.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::{Deployment, LabeledSample, PathLossModel, Position};
use crate::crb::{self, PositionCovariance};
use crate::error::{invalid, Error, Result};
use crate::estimator::Estimator;
use crate::net::{self, Activation, TrainConfig};
use crate::seed;

/// 1-sigma (K = 1), 66 % and 95 % confidence levels.
pub const DEFAULT_CONFIDENCE_LEVELS: [f64; 3] = [0.3935, 0.66, 0.95];
pub const DEFAULT_BIN_WIDTH_M: f64 = 10.0;
pub const SMOOTHING_ORDER: usize = 7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentRecord {
    pub confidence: f64,
    pub fraction: f64,
    pub inside: usize,
    pub test_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub records: Vec<ContainmentRecord>,
    /// Test points skipped because the CRB is undefined there.
    pub excluded: usize,
}

impl ContainmentReport {
    pub fn fraction_at(&self, confidence: f64) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.confidence == confidence)
            .map(|r| r.fraction)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorHistogram {
    pub bin_width_m: f64,
    /// `counts[k]` holds errors in `[k * w, (k + 1) * w)`.
    pub counts: Vec<usize>,
    pub test_count: usize,
    pub mean_error_m: f64,
    /// Mean over test points of `sqrt(trace(C))`.
    pub one_sigma_crb_m: f64,
    pub crb_excluded: usize,
}

fn validate_levels(cls: &[f64]) -> Result<()> {
    if cls.is_empty() {
        return Err(invalid("at least one confidence level is required"));
    }
    for &cl in cls {
        crb::k_for_confidence(cl)?;
    }
    Ok(())
}

fn predict_all<E: Estimator + ?Sized>(estimator: &E, test: &[LabeledSample]) -> Result<Vec<Position>> {
    if test.is_empty() {
        return Err(Error::Empty("test set is empty".into()));
    }
    test.iter().map(|s| estimator.predict(&s.rss)).collect()
}

fn crb_per_point(model: &PathLossModel, deployment: &Deployment, truths: &[Position]) -> Vec<Option<PositionCovariance>> {
    truths
        .iter()
        .map(|&t| crb::crb_at(model, deployment, t).ok())
        .collect()
}

/// Containment of precomputed `estimates` in CRB ellipses around `truths`.
pub fn containment_from_estimates(
    estimates: &[Position],
    truths: &[Position],
    model: &PathLossModel,
    deployment: &Deployment,
    cls: &[f64],
) -> Result<ContainmentReport> {
    validate_levels(cls)?;
    if estimates.len() != truths.len() {
        return Err(Error::DimensionMismatch {
            expected: truths.len(),
            got: estimates.len(),
        });
    }
    if truths.is_empty() {
        return Err(Error::Empty("test set is empty".into()));
    }
    let covs = crb_per_point(model, deployment, truths);
    let excluded = covs.iter().filter(|c| c.is_none()).count();
    let test_count = truths.len() - excluded;
    let mut records = Vec::with_capacity(cls.len());
    for &cl in cls {
        let mut inside = 0;
        for ((est, truth), cov) in estimates.iter().zip(truths).zip(&covs) {
            let Some(cov) = cov else { continue };
            let ellipse = crb::confidence_ellipse(cov, *truth, cl)?;
            if crb::ellipse_contains(&ellipse, *est) {
                inside += 1;
            }
        }
        let fraction = if test_count > 0 {
            inside as f64 / test_count as f64
        } else {
            0.0
        };
        records.push(ContainmentRecord {
            confidence: cl,
            fraction,
            inside,
            test_count,
        });
    }
    Ok(ContainmentReport { records, excluded })
}

pub fn containment_metrics<E: Estimator + ?Sized>(
    estimator: &E,
    test: &[LabeledSample],
    model: &PathLossModel,
    deployment: &Deployment,
    cls: &[f64],
) -> Result<ContainmentReport> {
    validate_levels(cls)?;
    let estimates = predict_all(estimator, test)?;
    let truths: Vec<Position> = test.iter().map(|s| s.position).collect();
    containment_from_estimates(&estimates, &truths, model, deployment, cls)
}

/// Histogram of Euclidean errors plus the mean 1-sigma CRB over the test points.
pub fn histogram_from_estimates(
    estimates: &[Position],
    truths: &[Position],
    model: &PathLossModel,
    deployment: &Deployment,
    bin_width_m: f64,
) -> Result<ErrorHistogram> {
    if !(bin_width_m > 0.0 && bin_width_m.is_finite()) {
        return Err(invalid(format!("bin width must be positive, got {bin_width_m}")));
    }
    if estimates.len() != truths.len() {
        return Err(Error::DimensionMismatch {
            expected: truths.len(),
            got: estimates.len(),
        });
    }
    if truths.is_empty() {
        return Err(Error::Empty("test set is empty".into()));
    }
    let errors: Vec<f64> = estimates.iter().zip(truths).map(|(e, t)| e.distance(t)).collect();
    let counts = bin_errors(&errors, bin_width_m)?;
    let mean_error_m = errors.iter().sum::<f64>() / errors.len() as f64;

    let covs = crb_per_point(model, deployment, truths);
    let sigmas: Vec<f64> = covs.iter().flatten().map(|c| c.rho_sq.sqrt()).collect();
    let one_sigma_crb_m = if sigmas.is_empty() {
        f64::NAN
    } else {
        sigmas.iter().sum::<f64>() / sigmas.len() as f64
    };
    Ok(ErrorHistogram {
        bin_width_m,
        counts,
        test_count: truths.len(),
        mean_error_m,
        one_sigma_crb_m,
        crb_excluded: covs.len() - sigmas.len(),
    })
}

/// Bin non-negative errors into `[k w, (k+1) w)` buckets.
pub fn bin_errors(errors: &[f64], bin_width_m: f64) -> Result<Vec<usize>> {
    let mut counts = vec![0usize; 1];
    for &e in errors {
        if !(e >= 0.0 && e.is_finite()) {
            return Err(invalid(format!("localization error {e} is not a finite distance")));
        }
        let bin = (e / bin_width_m).floor() as usize;
        if bin >= counts.len() {
            counts.resize(bin + 1, 0);
        }
        counts[bin] += 1;
    }
    Ok(counts)
}

pub fn error_histogram<E: Estimator + ?Sized>(
    estimator: &E,
    test: &[LabeledSample],
    model: &PathLossModel,
    deployment: &Deployment,
    bin_width_m: f64,
) -> Result<ErrorHistogram> {
    let estimates = predict_all(estimator, test)?;
    let truths: Vec<Position> = test.iter().map(|s| s.position).collect();
    histogram_from_estimates(&estimates, &truths, model, deployment, bin_width_m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub name: String,
    pub containment: ContainmentReport,
    pub histogram: ErrorHistogram,
}

/// Shared evaluation settings.
#[derive(Debug, Clone)]
pub struct EvalSetup<'a> {
    pub model: &'a PathLossModel,
    pub deployment: &'a Deployment,
    pub confidence_levels: &'a [f64],
    pub bin_width_m: f64,
}

pub fn evaluate<E: Estimator + ?Sized>(estimator: &E, test: &[LabeledSample], setup: &EvalSetup<'_>) -> Result<EstimatorReport> {
    validate_levels(setup.confidence_levels)?;
    let estimates = predict_all(estimator, test)?;
    let truths: Vec<Position> = test.iter().map(|s| s.position).collect();
    Ok(EstimatorReport {
        name: estimator.name(),
        containment: containment_from_estimates(
            &estimates,
            &truths,
            setup.model,
            setup.deployment,
            setup.confidence_levels,
        )?,
        histogram: histogram_from_estimates(&estimates, &truths, setup.model, setup.deployment, setup.bin_width_m)?,
    })
}

pub fn compare_estimators(
    estimators: &[&dyn Estimator],
    test: &[LabeledSample],
    setup: &EvalSetup<'_>,
) -> Result<Vec<EstimatorReport>> {
    estimators.iter().map(|e| evaluate(*e, test, setup)).collect()
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub hidden_sizes: Vec<usize>,
    pub activation: Activation,
    /// Shared training settings; the seed is replaced per hidden size.
    pub train: TrainConfig,
    pub master_seed: u64,
    pub confidence_levels: Vec<f64>,
    pub bin_width_m: f64,
    /// Run jobs on separate threads.
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub hidden: usize,
    pub parameter_count: usize,
    pub seed: u64,
    pub containment: Option<ContainmentReport>,
    pub histogram: Option<ErrorHistogram>,
    pub final_train_loss: Option<f64>,
    pub wall_time_s: f64,
    /// Training or evaluation failure for this size.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub entries: Vec<SweepEntry>,
}

impl SweepReport {
    pub fn entry(&self, hidden: usize) -> Option<&SweepEntry> {
        self.entries.iter().find(|e| e.hidden == hidden)
    }
}

fn sweep_job(
    hidden: usize,
    train: &[LabeledSample],
    test: &[LabeledSample],
    model: &PathLossModel,
    deployment: &Deployment,
    cfg: &SweepConfig,
) -> SweepEntry {
    let seed = seed::for_hidden_size(cfg.master_seed, hidden);
    let train_cfg = TrainConfig { seed, ..cfg.train };
    let start = Instant::now();
    let setup = EvalSetup {
        model,
        deployment,
        confidence_levels: &cfg.confidence_levels,
        bin_width_m: cfg.bin_width_m,
    };
    let outcome = net::fit(train, hidden, cfg.activation, &train_cfg)
        .and_then(|(net, log)| Ok((evaluate(&net, test, &setup)?, log.train_loss.last().copied())));
    let wall_time_s = start.elapsed().as_secs_f64();
    let parameter_count = net::parameter_count(deployment.len(), hidden);
    match outcome {
        Ok((report, loss)) => SweepEntry {
            hidden,
            parameter_count,
            seed,
            containment: Some(report.containment),
            histogram: Some(report.histogram),
            final_train_loss: loss,
            wall_time_s,
            error: None,
        },
        Err(e) => {
            log::warn!("sweep entry P_n={hidden} failed: {e}");
            SweepEntry {
                hidden,
                parameter_count,
                seed,
                containment: None,
                histogram: None,
                final_train_loss: None,
                wall_time_s,
                error: Some(e.to_string()),
            }
        }
    }
}

/// Train and evaluate one network per hidden size on identical data.
///
/// Hidden sizes are sorted and deduplicated; each job is seeded with
/// [`seed::for_hidden_size`], so results do not depend on scheduling.
pub fn sweep_hidden_layer(
    train: &[LabeledSample],
    test: &[LabeledSample],
    model: &PathLossModel,
    deployment: &Deployment,
    cfg: &SweepConfig,
) -> Result<SweepReport> {
    let mut sizes = cfg.hidden_sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.is_empty() {
        return Err(invalid("sweep needs at least one hidden-layer size"));
    }
    if sizes[0] == 0 {
        return Err(invalid("hidden-layer sizes must be at least 1"));
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::Empty("sweep needs non-empty train and test sets".into()));
    }
    validate_levels(&cfg.confidence_levels)?;
    cfg.train.validate()?;

    let entries = if cfg.parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = sizes
                .iter()
                .map(|&h| scope.spawn(move || sweep_job(h, train, test, model, deployment, cfg)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sweep job panicked"))
                .collect()
        })
    } else {
        sizes
            .iter()
            .map(|&h| sweep_job(h, train, test, model, deployment, cfg))
            .collect()
    };
    Ok(SweepReport { entries })
}

/// Least-squares polynomial of degree `order` through `(xs, ys)`, evaluated at `xs`.
pub fn smooth_polynomial(xs: &[f64], ys: &[f64], order: usize) -> Result<Vec<f64>> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    if xs.len() < order + 1 {
        return Err(invalid(format!(
            "polynomial of order {order} needs at least {} points, got {}",
            order + 1,
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(invalid("smoothing input must be finite"));
    }
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    // Map to [-1, 1] to keep the Vandermonde matrix well conditioned.
    let t: Vec<f64> = xs
        .iter()
        .map(|&x| if half > 0.0 { (x - mid) / half } else { 0.0 })
        .collect();
    let n = xs.len();
    let a = DMatrix::from_fn(n, order + 1, |i, j| t[i].powi(j as i32));
    let b = DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax.is_nan() || smax <= 0.0 || smin <= 1e-10 * smax {
        return Err(Error::RankDeficient);
    }
    let coeffs = svd.solve(&b, 0.0).map_err(|_| Error::RankDeficient)?;
    Ok((a * coeffs).iter().copied().collect())
}
