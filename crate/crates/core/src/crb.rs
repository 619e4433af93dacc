//! Cramer-Rao bound on position accuracy and related geometry.
//!
//! For RSS under log-normal shadowing the Fisher information about the
//! transmitter position `(x0, y0)` is
//!
//! ```text
//! I_xx = (a*gamma/sigma)^2 * sum (x_i - x0)^2 / d_i^4
//! I_yy = (a*gamma/sigma)^2 * sum (y_i - y0)^2 / d_i^4
//! I_xy = (a*gamma/sigma)^2 * sum (x_i - x0)(y_i - y0) / d_i^4,   a = 10 / ln 10
//! ```
//!
//! It depends neither on the transmit power nor on the reference loss.

use std::f64::consts::{LN_10, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::channel::{Deployment, PathLossModel, Position};
use crate::error::{invalid, Error, Result};

/// dB per neper-like unit: 10 / ln(10).
pub const DB_PER_LN: f64 = 10.0 / LN_10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FisherMatrix {
    pub i_xx: f64,
    pub i_xy: f64,
    pub i_yy: f64,
}

impl FisherMatrix {
    pub fn determinant(&self) -> f64 {
        self.i_xx * self.i_yy - self.i_xy * self.i_xy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionCovariance {
    pub c_xx: f64,
    pub c_xy: f64,
    pub c_yy: f64,
    /// Trace of the covariance; `sqrt(rho_sq)` is the 1-sigma CRB in meters.
    pub rho_sq: f64,
}

impl PositionCovariance {
    pub fn new(c_xx: f64, c_xy: f64, c_yy: f64) -> Result<Self> {
        let cov = Self {
            c_xx,
            c_xy,
            c_yy,
            rho_sq: c_xx + c_yy,
        };
        if !cov.is_positive_definite() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(cov)
    }

    pub fn is_positive_definite(&self) -> bool {
        let det = self.c_xx * self.c_yy - self.c_xy * self.c_xy;
        self.c_xx.is_finite()
            && self.c_yy.is_finite()
            && self.c_xy.is_finite()
            && self.c_xx > 0.0
            && det > 0.0
    }

    /// Eigenvalues `(larger, smaller)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let half_trace = 0.5 * (self.c_xx + self.c_yy);
        let half_diff = 0.5 * (self.c_xx - self.c_yy);
        let r = half_diff.hypot(self.c_xy);
        (half_trace + r, half_trace - r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceEllipse {
    pub center: Position,
    /// Orientation of the major axis, in `[0, 2*pi)`.
    pub theta_rad: f64,
    pub semi_major_m: f64,
    pub semi_minor_m: f64,
    pub confidence: f64,
    pub k_scale: f64,
}

impl ConfidenceEllipse {
    /// `n` points on the boundary, counter-clockwise starting on the major axis.
    pub fn boundary(&self, n: usize) -> Vec<Position> {
        let (s, c) = self.theta_rad.sin_cos();
        (0..n)
            .map(|k| {
                let t = TAU * k as f64 / n as f64;
                let (u, v) = (self.semi_major_m * t.cos(), self.semi_minor_m * t.sin());
                Position::new(self.center.x + c * u - s * v, self.center.y + s * u + c * v)
            })
            .collect()
    }
}

/// Fisher information at `truth`. Needs at least two RSUs, none closer than `d_0`.
pub fn fisher(model: &PathLossModel, deployment: &Deployment, truth: Position) -> Result<FisherMatrix> {
    model.validate()?;
    if deployment.len() < 2 {
        return Err(invalid("Fisher information needs at least two RSUs"));
    }
    if model.shadow_sigma_db <= 0.0 {
        return Err(invalid("Fisher information is unbounded without shadowing (sigma = 0)"));
    }
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for rsu in deployment.rsus() {
        let (dx, dy) = (rsu.x - truth.x, rsu.y - truth.y);
        let d2 = dx * dx + dy * dy;
        if d2.sqrt() < model.ref_distance_m {
            return Err(Error::SingularGeometry(format!(
                "position ({}, {}) is within the reference distance of RSU ({}, {})",
                truth.x, truth.y, rsu.x, rsu.y
            )));
        }
        let d4 = d2 * d2;
        sxx += dx * dx / d4;
        sxy += dx * dy / d4;
        syy += dy * dy / d4;
    }
    let scale = (DB_PER_LN * model.exponent / model.shadow_sigma_db).powi(2);
    Ok(FisherMatrix {
        i_xx: scale * sxx,
        i_xy: scale * sxy,
        i_yy: scale * syy,
    })
}

/// Inverse of the Fisher matrix.
pub fn crb_covariance(f: &FisherMatrix) -> Result<PositionCovariance> {
    let det = f.determinant();
    let scale = f.i_xx.abs() + f.i_yy.abs();
    // Relative test: collinear geometries leave det at rounding-noise level.
    if !(det.is_finite() && f.i_xx > 0.0 && det > 1e-12 * scale * scale) {
        return Err(Error::DegenerateGeometry { det });
    }
    PositionCovariance::new(f.i_yy / det, -f.i_xy / det, f.i_xx / det)
}

/// CRB covariance at `truth`.
pub fn crb_at(model: &PathLossModel, deployment: &Deployment, truth: Position) -> Result<PositionCovariance> {
    crb_covariance(&fisher(model, deployment, truth)?)
}

/// Scale `K` for which a 2-D Gaussian falls inside the ellipse with probability `confidence`.
pub fn k_for_confidence(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(invalid(format!("confidence must be in (0, 1), got {confidence}")));
    }
    Ok(-2.0 * (-confidence).ln_1p())
}

pub fn confidence_for_k(k: f64) -> f64 {
    -(-k / 2.0).exp_m1()
}

pub fn confidence_ellipse(c: &PositionCovariance, center: Position, confidence: f64) -> Result<ConfidenceEllipse> {
    let k = k_for_confidence(confidence)?;
    if !c.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let (major, minor) = c.eigenvalues();
    if minor <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    // Eigenvector of the larger eigenvalue; (lambda - c_yy, c_xy) is the
    // well-conditioned choice unless c_xy vanishes.
    let theta = if c.c_xy.abs() > f64::EPSILON * (c.c_xx.abs() + c.c_yy.abs()) {
        (c.c_xy).atan2(major - c.c_yy)
    } else if c.c_xx >= c.c_yy {
        0.0
    } else {
        PI / 2.0
    };
    Ok(ConfidenceEllipse {
        center,
        theta_rad: theta.rem_euclid(TAU),
        semi_major_m: (k * major).sqrt(),
        semi_minor_m: (k * minor).sqrt(),
        confidence,
        k_scale: k,
    })
}

/// Point-in-ellipse test using squared semi-axes as denominators.
pub fn ellipse_contains(e: &ConfidenceEllipse, p: Position) -> bool {
    let (s, c) = e.theta_rad.sin_cos();
    let (dx, dy) = (p.x - e.center.x, p.y - e.center.y);
    let along = c * dx + s * dy;
    let across = s * dx - c * dy;
    along * along / (e.semi_major_m * e.semi_major_m) + across * across / (e.semi_minor_m * e.semi_minor_m)
        <= 1.0
}

/// Single-anchor distance CRB: `ln(10) * sigma * d / (10 * n)`.
pub fn distance_crb(exponent: f64, shadow_sigma_db: f64, distance_m: f64) -> f64 {
    LN_10 * shadow_sigma_db * distance_m / (10.0 * exponent)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorNorm {
    Rms,
    Sup,
}

impl std::str::FromStr for ErrorNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rms" => Ok(Self::Rms),
            "sup" => Ok(Self::Sup),
            other => Err(invalid(format!("unknown error norm {other:?} (expected rms or sup)"))),
        }
    }
}

/// Parameters of the hidden-layer sizing rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizingConfig {
    pub exponent: f64,
    pub shadow_sigma_db: f64,
    pub distance_scale_m: f64,
    pub d0_m: f64,
    pub error_norm: ErrorNorm,
    pub eval_distance_m: f64,
    /// Divides the distance CRB to form the error threshold.
    pub calibration: f64,
    pub max_neurons: usize,
}

/// Calibration under which the sup-norm rule gives 15, 9, 5 neurons for
/// sigma = 3, 5, 8 dB at n = 3, D = 100 m.
pub const DEFAULT_CALIBRATION: f64 = 1.6;

impl SizingConfig {
    pub fn new(exponent: f64, shadow_sigma_db: f64) -> Self {
        Self {
            exponent,
            shadow_sigma_db,
            distance_scale_m: 100.0,
            d0_m: 1.0,
            error_norm: ErrorNorm::Sup,
            eval_distance_m: 100.0,
            calibration: DEFAULT_CALIBRATION,
            max_neurons: 128,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("exponent", self.exponent),
            ("shadow_sigma_db", self.shadow_sigma_db),
            ("distance_scale_m", self.distance_scale_m),
            ("d0_m", self.d0_m),
            ("eval_distance_m", self.eval_distance_m),
            ("calibration", self.calibration),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.distance_scale_m <= self.d0_m {
            return Err(invalid("distance scale must exceed the reference distance"));
        }
        if self.max_neurons == 0 {
            return Err(invalid("max_neurons must be at least 1"));
        }
        Ok(())
    }

    pub fn threshold_m(&self) -> f64 {
        distance_crb(self.exponent, self.shadow_sigma_db, self.eval_distance_m) / self.calibration
    }
}

/// Error of a `neurons`-step staircase approximation of the RSS-to-distance map.
///
/// Working in `u = P_T - PL_0 - r`, the map is `d(u) = d0 * 10^(u / (10 n))`
/// on `u in [0, 10 n log10(D / d0)]`. Each of the equal-width steps holds
/// the value of `d` at its midpoint.
pub fn rectangle_error(cfg: &SizingConfig, neurons: usize) -> Result<f64> {
    cfg.validate()?;
    if neurons == 0 {
        return Err(invalid("neurons must be at least 1"));
    }
    // d(u) = d0 * exp(alpha u); measure everything in log-distance units.
    let alpha = LN_10 / (10.0 * cfg.exponent);
    let span = 10.0 * cfg.exponent * (cfg.distance_scale_m / cfg.d0_m).log10();
    let width = span / neurons as f64;
    let d = |u: f64| cfg.d0_m * (alpha * u).exp();
    match cfg.error_norm {
        ErrorNorm::Sup => {
            // d is increasing and convex, so the largest gap on every step is
            // at its right edge; the last step dominates.
            let mut worst: f64 = 0.0;
            for k in 0..neurons {
                let lo = k as f64 * width;
                let mid = d(lo + 0.5 * width);
                worst = worst.max(d(lo + width) - mid).max(mid - d(lo));
            }
            Ok(worst)
        }
        ErrorNorm::Rms => {
            // Integral of (c - d(u))^2 over each step in closed form.
            let mut sum_sq = 0.0;
            for k in 0..neurons {
                let (lo, hi) = (k as f64 * width, (k + 1) as f64 * width);
                let c = d(lo + 0.5 * width);
                let int_d = cfg.d0_m * ((alpha * hi).exp() - (alpha * lo).exp()) / alpha;
                let int_d2 = cfg.d0_m * cfg.d0_m * ((2.0 * alpha * hi).exp() - (2.0 * alpha * lo).exp())
                    / (2.0 * alpha);
                sum_sq += c * c * width - 2.0 * c * int_d + int_d2;
            }
            Ok((sum_sq.max(0.0) / span).sqrt())
        }
    }
}

/// Smallest hidden-layer size whose staircase error is below the calibrated distance CRB.
pub fn size_hidden_layer(cfg: &SizingConfig) -> Result<usize> {
    cfg.validate()?;
    let threshold = cfg.threshold_m();
    for p in 1..=cfg.max_neurons {
        if rectangle_error(cfg, p)? < threshold {
            return Ok(p);
        }
    }
    Err(Error::NeuronsExhausted {
        max_neurons: cfg.max_neurons,
        threshold_m: threshold,
    })
}
