//! Nearest-RSS matching against a labeled training database.

use crate::channel::{LabeledSample, Position};
use crate::error::{Error, Result};
use crate::estimator::Estimator;

/// Root mean square difference between two RSS vectors of equal length.
pub fn rss_rms_distance(a: &[f64], b: &[f64]) -> f64 {
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (sum / a.len() as f64).sqrt()
}

/// Index of the training sample closest to `query` in RSS space.
///
/// Ties go to the lowest index.
pub fn nearest_index(train: &[LabeledSample], query: &[f64]) -> Result<usize> {
    let first = train
        .first()
        .ok_or_else(|| Error::Empty("nearest-RSS matching needs training samples".into()))?;
    let n = first.rss.len();
    if query.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: query.len(),
        });
    }
    let mut best = (0, f64::INFINITY);
    for (m, s) in train.iter().enumerate() {
        if s.rss.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: s.rss.len(),
            });
        }
        // Squared sum has the same argmin as the RMS and avoids the sqrt.
        let d: f64 = s.rss.iter().zip(query).map(|(x, y)| (x - y) * (x - y)).sum();
        if d < best.1 {
            best = (m, d);
        }
    }
    Ok(best.0)
}

pub fn estimate_nearest_rss(train: &[LabeledSample], query: &[f64]) -> Result<Position> {
    Ok(train[nearest_index(train, query)?].position)
}

/// Owned training database exposed through [`Estimator`].
#[derive(Debug, Clone)]
pub struct NearestRss {
    train: Vec<LabeledSample>,
    input_dim: usize,
}

impl NearestRss {
    pub fn new(train: Vec<LabeledSample>) -> Result<Self> {
        let input_dim = train
            .first()
            .map(|s| s.rss.len())
            .ok_or_else(|| Error::Empty("nearest-RSS matching needs training samples".into()))?;
        if let Some(s) = train.iter().find(|s| s.rss.len() != input_dim) {
            return Err(Error::DimensionMismatch {
                expected: input_dim,
                got: s.rss.len(),
            });
        }
        Ok(Self { train, input_dim })
    }

    pub fn samples(&self) -> &[LabeledSample] {
        &self.train
    }
}

impl Estimator for NearestRss {
    fn name(&self) -> String {
        "nearest-rss".into()
    }

    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn predict(&self, rss: &[f64]) -> Result<Position> {
        estimate_nearest_rss(&self.train, rss)
    }
}
