//! RSS-based localization under log-normal shadowing.
//!
//! The crate covers the full pipeline for received-signal-strength (RSS)
//! positioning with a set of fixed anchors (road side units, RSUs):
//!
//! - [`channel`]: the log-distance path-loss model with Gaussian shadowing in
//!   dB, synthetic grid measurement campaigns and train/test splitting.
//! - [`crb`]: Fisher information, the Cramer-Rao bound covariance, confidence
//!   ellipses and the step-approximation rule used to size the hidden layer.
//! - [`net`]: a single-hidden-layer feedforward regressor from RSS vectors to
//!   positions, trained by backpropagation.
//! - [`baseline`]: nearest-RSS matching against the training database.
//! - [`eval`]: containment of estimates in CRB ellipses, error histograms,
//!   hidden-layer sweeps and estimator comparisons.
//! - [`io`]: dataset/model persistence, run configuration and timestamp
//!   joining of recorded RSS streams with a position track.
//!
//! All randomness flows from explicit seeds; see [`seed`].

pub mod baseline;
pub mod channel;
pub mod crb;
mod error;
pub mod estimator;
pub mod eval;
pub mod io;
pub mod net;
pub mod seed;

pub use error::{Error, Result};
pub use estimator::Estimator;
