//! CSV and JSON renderings of evaluation reports.
//!
//! Report files never contain wall-clock times so that reruns with the same
//! seed are byte-identical; timings go to a separate table.

use serde::Serialize;

use super::fmt_f64;
use crate::error::{Error, Result};
use crate::eval::{self, ContainmentReport, ErrorHistogram, EstimatorReport, SweepReport};
use crate::net::TrainLog;

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// `estimator,confidence,fraction,inside,test_count,excluded`
pub fn containment_csv(reports: &[(&str, &ContainmentReport)]) -> String {
    let mut out = String::from("estimator,confidence,fraction,inside,test_count,excluded\n");
    for (name, r) in reports {
        for rec in &r.records {
            out.push_str(&format!(
                "{name},{},{},{},{},{}\n",
                fmt_f64(rec.confidence),
                fmt_f64(rec.fraction),
                rec.inside,
                rec.test_count,
                r.excluded
            ));
        }
    }
    out
}

/// `estimator,bin_start_m,bin_end_m,count`
pub fn histogram_csv(reports: &[(&str, &ErrorHistogram)]) -> String {
    let mut out = String::from("estimator,bin_start_m,bin_end_m,count\n");
    for (name, h) in reports {
        for (k, c) in h.counts.iter().enumerate() {
            out.push_str(&format!(
                "{name},{},{},{c}\n",
                fmt_f64(k as f64 * h.bin_width_m),
                fmt_f64((k + 1) as f64 * h.bin_width_m)
            ));
        }
    }
    out
}

pub fn estimator_reports_csv(reports: &[EstimatorReport]) -> (String, String) {
    let c: Vec<_> = reports.iter().map(|r| (r.name.as_str(), &r.containment)).collect();
    let h: Vec<_> = reports.iter().map(|r| (r.name.as_str(), &r.histogram)).collect();
    (containment_csv(&c), histogram_csv(&h))
}

/// One row per (P_n, CL).
pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = String::from(
        "hidden,parameter_count,confidence,fraction,inside,test_count,excluded,mean_error_m,one_sigma_crb_m,error\n",
    );
    for e in &report.entries {
        let hist = e.histogram.as_ref();
        let mean = opt(hist.map(|h| h.mean_error_m));
        let crb = opt(hist.map(|h| h.one_sigma_crb_m));
        let err = e.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        match &e.containment {
            Some(c) => {
                for rec in &c.records {
                    out.push_str(&format!(
                        "{},{},{},{},{},{},{},{mean},{crb},\n",
                        e.hidden,
                        e.parameter_count,
                        fmt_f64(rec.confidence),
                        fmt_f64(rec.fraction),
                        rec.inside,
                        rec.test_count,
                        c.excluded
                    ));
                }
            }
            None => out.push_str(&format!("{},{},,,,,,,,{err}\n", e.hidden, e.parameter_count)),
        }
    }
    out
}

/// `hidden,bin_start_m,bin_end_m,count`
pub fn sweep_histogram_csv(report: &SweepReport) -> String {
    let mut out = String::from("hidden,bin_start_m,bin_end_m,count\n");
    for e in &report.entries {
        if let Some(h) = &e.histogram {
            for (k, c) in h.counts.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{c}\n",
                    e.hidden,
                    fmt_f64(k as f64 * h.bin_width_m),
                    fmt_f64((k + 1) as f64 * h.bin_width_m)
                ));
            }
        }
    }
    out
}

pub fn sweep_timing_csv(report: &SweepReport) -> String {
    let mut out = String::from("hidden,seed,wall_time_s\n");
    for e in &report.entries {
        out.push_str(&format!("{},{},{}\n", e.hidden, e.seed, fmt_f64(e.wall_time_s)));
    }
    out
}

/// Containment vs P_n per CL, raw and polynomially smoothed, in percent.
///
/// `hidden,confidence,percent_raw,percent_smoothed`. The smoothing order is
/// [`eval::SMOOTHING_ORDER`], reduced to `points - 1` for short sweeps.
pub fn sweep_plot_csv(report: &SweepReport) -> Result<String> {
    let ok: Vec<_> = report.entries.iter().filter(|e| e.containment.is_some()).collect();
    let mut out = String::from("hidden,confidence,percent_raw,percent_smoothed\n");
    let Some(first) = ok.first() else {
        return Ok(out);
    };
    let xs: Vec<f64> = ok.iter().map(|e| e.hidden as f64).collect();
    let order = eval::SMOOTHING_ORDER.min(xs.len() - 1);
    let levels: Vec<f64> = first
        .containment
        .as_ref()
        .map(|c| c.records.iter().map(|r| r.confidence).collect())
        .unwrap_or_default();
    for (j, cl) in levels.iter().enumerate() {
        let ys: Vec<f64> = ok
            .iter()
            .map(|e| 100.0 * e.containment.as_ref().map_or(f64::NAN, |c| c.records[j].fraction))
            .collect();
        let smooth = eval::smooth_polynomial(&xs, &ys, order)?;
        for ((x, y), s) in xs.iter().zip(&ys).zip(&smooth) {
            out.push_str(&format!("{},{},{},{}\n", *x as usize, fmt_f64(*cl), fmt_f64(*y), fmt_f64(*s)));
        }
    }
    Ok(out)
}

/// Histogram counts per bin with an order-limited polynomial smoothing.
pub fn histogram_plot_csv(name: &str, h: &ErrorHistogram) -> Result<String> {
    let mut out = String::from("estimator,bin_center_m,count,count_smoothed\n");
    let xs: Vec<f64> = (0..h.counts.len()).map(|k| (k as f64 + 0.5) * h.bin_width_m).collect();
    let ys: Vec<f64> = h.counts.iter().map(|&c| c as f64).collect();
    let order = eval::SMOOTHING_ORDER.min(xs.len().saturating_sub(1));
    let smooth = eval::smooth_polynomial(&xs, &ys, order)?;
    for ((x, y), s) in xs.iter().zip(&ys).zip(&smooth) {
        out.push_str(&format!("{name},{},{},{}\n", fmt_f64(*x), *y as usize, fmt_f64(*s)));
    }
    Ok(out)
}

pub fn training_log_csv(log: &TrainLog) -> String {
    let mut out = String::from("epoch,train_loss,validation_loss\n");
    for (i, l) in log.train_loss.iter().enumerate() {
        let v = log.validation_loss.get(i).copied();
        out.push_str(&format!("{},{},{}\n", i + 1, fmt_f64(*l), opt(v)));
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
