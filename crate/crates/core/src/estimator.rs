use crate::channel::Position;
use crate::error::Result;

/// Anything that maps an RSS vector to a position estimate.
pub trait Estimator: Sync {
    fn name(&self) -> String;

    /// Number of RSS values expected per query.
    fn input_dim(&self) -> usize;

    fn predict(&self, rss: &[f64]) -> Result<Position>;
}

impl<E: Estimator + ?Sized> Estimator for &E {
    fn name(&self) -> String {
        (**self).name()
    }

    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }

    fn predict(&self, rss: &[f64]) -> Result<Position> {
        (**self).predict(rss)
    }
}
