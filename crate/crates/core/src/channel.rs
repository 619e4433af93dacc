//! Log-normal shadowing channel and synthetic measurement campaigns.
//!
//! Received power at RSU `i` for a transmitter at distance `d_i` is
//!
//! ```text
//! r_i = P_T - PL_0 - 10 * gamma * log10(d_i / d_0) - X_i,   X_i ~ N(0, sigma^2)
//! ```
//!
//! with every quantity in dB/dBm. Noise is drawn independently per RSU and
//! per measurement.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossModel {
    pub transmit_power_dbm: f64,
    pub ref_loss_db: f64,
    pub ref_distance_m: f64,
    pub exponent: f64,
    pub shadow_sigma_db: f64,
}

impl Default for PathLossModel {
    /// 20 dBm transmitter, 40 dB at 1 m, exponent 3, 5 dB shadowing.
    fn default() -> Self {
        Self {
            transmit_power_dbm: 20.0,
            ref_loss_db: 40.0,
            ref_distance_m: 1.0,
            exponent: 3.0,
            shadow_sigma_db: 5.0,
        }
    }
}

impl PathLossModel {
    /// Default power levels with the given exponent and shadowing deviation.
    pub fn with_channel(exponent: f64, shadow_sigma_db: f64) -> Result<Self> {
        let model = Self {
            exponent,
            shadow_sigma_db,
            ..Self::default()
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.transmit_power_dbm.is_finite() || !self.ref_loss_db.is_finite() {
            return Err(invalid("transmit power and reference loss must be finite"));
        }
        if !(self.ref_distance_m > 0.0 && self.ref_distance_m.is_finite()) {
            return Err(invalid(format!(
                "reference distance must be positive, got {}",
                self.ref_distance_m
            )));
        }
        if !(self.exponent > 0.0 && self.exponent.is_finite()) {
            return Err(invalid(format!(
                "path-loss exponent must be positive, got {}",
                self.exponent
            )));
        }
        if !(self.shadow_sigma_db >= 0.0 && self.shadow_sigma_db.is_finite()) {
            return Err(invalid(format!(
                "shadowing deviation must be non-negative, got {}",
                self.shadow_sigma_db
            )));
        }
        Ok(())
    }

    /// Noise-free RSS (dBm) at `distance_m`.
    pub fn mean_rss(&self, distance_m: f64) -> Result<f64> {
        Ok(self.transmit_power_dbm - mean_path_loss(self, distance_m)?)
    }
}

/// Mean path loss in dB, excluding shadowing.
pub fn mean_path_loss(model: &PathLossModel, distance_m: f64) -> Result<f64> {
    if distance_m.is_nan() || distance_m < model.ref_distance_m {
        return Err(Error::BelowReferenceDistance {
            distance: distance_m,
            reference: model.ref_distance_m,
        });
    }
    Ok(model.ref_loss_db + 10.0 * model.exponent * (distance_m / model.ref_distance_m).log10())
}

/// The set of RSUs with publicly known coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Position>", into = "Vec<Position>")]
pub struct Deployment {
    rsus: Vec<Position>,
}

impl Deployment {
    pub fn new(rsus: Vec<Position>) -> Result<Self> {
        if rsus.is_empty() {
            return Err(Error::Empty("deployment needs at least one RSU".into()));
        }
        if let Some(p) = rsus.iter().find(|p| !p.is_finite()) {
            return Err(invalid(format!("RSU position ({}, {}) is not finite", p.x, p.y)));
        }
        for (i, a) in rsus.iter().enumerate() {
            if rsus[..i].contains(a) {
                return Err(invalid(format!("duplicate RSU at ({}, {})", a.x, a.y)));
            }
        }
        Ok(Self { rsus })
    }

    /// Five RSUs on the corners and centre of a 200 m x 200 m area.
    pub fn simulated_layout() -> Self {
        Self::from_coords(&[(0.0, 0.0), (0.0, 200.0), (100.0, 100.0), (200.0, 0.0), (200.0, 200.0)])
    }

    /// Five RSUs inset from the corners; used for illustrating ellipses.
    pub fn ellipse_layout() -> Self {
        Self::from_coords(&[
            (50.0, 50.0),
            (50.0, 200.0),
            (125.0, 125.0),
            (200.0, 50.0),
            (200.0, 200.0),
        ])
    }

    fn from_coords(coords: &[(f64, f64)]) -> Self {
        Self::new(coords.iter().map(|&(x, y)| Position::new(x, y)).collect())
            .expect("built-in layout is valid")
    }

    pub fn len(&self) -> usize {
        self.rsus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rsus.is_empty()
    }

    pub fn rsus(&self) -> &[Position] {
        &self.rsus
    }
}

impl TryFrom<Vec<Position>> for Deployment {
    type Error = Error;

    fn try_from(rsus: Vec<Position>) -> Result<Self> {
        Self::new(rsus)
    }
}

impl From<Deployment> for Vec<Position> {
    fn from(d: Deployment) -> Self {
        d.rsus
    }
}

/// Axis-aligned rectangle in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub x_min: f64,
    pub y_min: f64,
    pub width: f64,
    pub height: f64,
}

impl Area {
    pub fn new(x_min: f64, y_min: f64, width: f64, height: f64) -> Result<Self> {
        let area = Self {
            x_min,
            y_min,
            width,
            height,
        };
        if !(x_min.is_finite() && y_min.is_finite()) {
            return Err(invalid("area origin must be finite"));
        }
        if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
            return Err(invalid(format!("degenerate area {width} x {height}")));
        }
        Ok(area)
    }

    /// Rectangle anchored at the origin.
    pub fn square_at_origin(width: f64, height: f64) -> Result<Self> {
        Self::new(0.0, 0.0, width, height)
    }

    /// Grid cross-sections at `spacing_m`, row-major (y outer, x inner).
    pub fn grid(&self, spacing_m: f64) -> Result<Vec<Position>> {
        if !(spacing_m > 0.0 && spacing_m.is_finite()) {
            return Err(invalid(format!("grid spacing must be positive, got {spacing_m}")));
        }
        let steps = |len: f64| (len / spacing_m + 1e-9).floor() as usize + 1;
        let (nx, ny) = (steps(self.width), steps(self.height));
        if nx.saturating_mul(ny) > 50_000_000 {
            return Err(invalid(format!("grid of {nx} x {ny} points is too large")));
        }
        let mut points = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                points.push(Position::new(
                    self.x_min + ix as f64 * spacing_m,
                    self.y_min + iy as f64 * spacing_m,
                ));
            }
        }
        Ok(points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub position: Position,
    pub rss: Vec<f64>,
}

/// Disjoint, covering partition of sample indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub deployment: Deployment,
    pub model: Option<PathLossModel>,
    pub samples: Vec<LabeledSample>,
    pub split: Option<Split>,
}

impl Dataset {
    pub fn new(
        deployment: Deployment,
        model: Option<PathLossModel>,
        samples: Vec<LabeledSample>,
    ) -> Result<Self> {
        let n = deployment.len();
        if let Some(s) = samples.iter().find(|s| s.rss.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: s.rss.len(),
            });
        }
        Ok(Self {
            deployment,
            model,
            samples,
            split: None,
        })
    }

    pub fn with_split(mut self, split: Split) -> Result<Self> {
        validate_split(&split, self.samples.len())?;
        self.split = Some(split);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Copies of the (train, test) samples; errors when no split exists.
    pub fn partition(&self) -> Result<(Vec<LabeledSample>, Vec<LabeledSample>)> {
        let split = self
            .split
            .as_ref()
            .ok_or_else(|| invalid("dataset has no train/test split"))?;
        let pick = |idx: &[usize]| idx.iter().map(|&i| self.samples[i].clone()).collect();
        Ok((pick(&split.train), pick(&split.test)))
    }
}

fn validate_split(split: &Split, total: usize) -> Result<()> {
    let mut seen = vec![false; total];
    for &i in split.train.iter().chain(&split.test) {
        if i >= total {
            return Err(invalid(format!("split index {i} out of range for {total} samples")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(invalid(format!("split index {i} appears more than once")));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(invalid("split does not cover every sample"));
    }
    Ok(())
}

/// One noisy RSS vector for a transmitter at `truth`.
pub fn sample_rss<R: Rng + ?Sized>(
    model: &PathLossModel,
    deployment: &Deployment,
    truth: Position,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut rss = Vec::with_capacity(deployment.len());
    for rsu in deployment.rsus() {
        let mean = model.mean_rss(truth.distance(rsu))?;
        let z: f64 = rng.sample(StandardNormal);
        rss.push(mean - model.shadow_sigma_db * z);
    }
    Ok(rss)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignConfig {
    pub area: Area,
    pub grid_spacing_m: f64,
    pub repeats_per_point: usize,
}

impl CampaignConfig {
    /// 200 m x 200 m at 5 m spacing (41 x 41 points), one measurement each.
    pub fn desk_scale() -> Self {
        Self {
            area: Area::square_at_origin(200.0, 200.0).expect("valid area"),
            grid_spacing_m: 5.0,
            repeats_per_point: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Campaign {
    pub dataset: Dataset,
    /// Grid points dropped because they lie within the reference distance of an RSU.
    pub skipped_points: usize,
}

/// Measure every grid point `repeats_per_point` times, then shuffle.
///
/// Noise is drawn in grid order (row-major, repeats innermost) from `rng`,
/// after which the same generator shuffles the sample order.
pub fn generate_campaign<R: Rng + ?Sized>(
    model: &PathLossModel,
    deployment: &Deployment,
    cfg: &CampaignConfig,
    rng: &mut R,
) -> Result<Campaign> {
    model.validate()?;
    if cfg.repeats_per_point == 0 {
        return Err(invalid("repeats_per_point must be at least 1"));
    }
    let grid = cfg.area.grid(cfg.grid_spacing_m)?;
    let mut samples = Vec::with_capacity(grid.len() * cfg.repeats_per_point);
    let mut skipped = 0;
    for point in grid {
        let too_close = deployment
            .rsus()
            .iter()
            .any(|rsu| point.distance(rsu) < model.ref_distance_m);
        if too_close {
            skipped += 1;
            continue;
        }
        for _ in 0..cfg.repeats_per_point {
            let rss = sample_rss(model, deployment, point, rng)?;
            samples.push(LabeledSample {
                position: point,
                rss,
            });
        }
    }
    if skipped > 0 {
        log::info!("skipped {skipped} grid points within the reference distance of an RSU");
    }
    if samples.is_empty() {
        return Err(Error::Empty("campaign grid has no usable points".into()));
    }
    samples.shuffle(rng);
    Ok(Campaign {
        dataset: Dataset::new(deployment.clone(), Some(*model), samples)?,
        skipped_points: skipped,
    })
}

/// Uniformly random train/test split; `round(test_fraction * len)` test samples.
pub fn split_dataset<R: Rng + ?Sized>(
    ds: &Dataset,
    test_fraction: f64,
    rng: &mut R,
) -> Result<Dataset> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(invalid(format!("test fraction must be in (0, 1), got {test_fraction}")));
    }
    let total = ds.len();
    let n_test = (test_fraction * total as f64).round() as usize;
    if n_test == 0 || n_test >= total {
        return Err(Error::Empty(format!(
            "splitting {total} samples at fraction {test_fraction} leaves an empty partition"
        )));
    }
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(rng);
    let mut test = order[..n_test].to_vec();
    let mut train = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    ds.clone().with_split(Split { train, test })
}
