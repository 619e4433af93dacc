//! Flat key-value run configuration (TOML syntax, one `key = value` per line).
//!
//! Every key is optional; unset keys fall back to the library defaults.
//! Unknown keys are rejected. [`RunConfig::resolved`] fills in every default
//! so a run can echo exactly the parameter set it used.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::read_text;
use crate::channel::{Area, CampaignConfig, PathLossModel};
use crate::crb::{ErrorNorm, SizingConfig};
use crate::error::{invalid, Error, Result};
use crate::eval::{DEFAULT_BIN_WIDTH_M, DEFAULT_CONFIDENCE_LEVELS};
use crate::io::ingest::DEFAULT_TOLERANCE_S;
use crate::net::{Activation, Optimizer, TrainConfig};

/// Key reference printed by `--help`.
pub const KEYS_HELP: &str = "\
Config file keys (flat TOML, all optional):
  seed                     master seed (integer < 2^63)
  tx_power_dbm             transmit power [20]
  ref_loss_db              path loss at the reference distance [40]
  ref_distance_m           reference distance [1]
  gamma                    path-loss exponent [3]
  sigma_db                 shadowing standard deviation [5]
  area_x_min, area_y_min   campaign area origin [0, 0]
  area_width_m, area_height_m  campaign area size [200, 200]
  spacing_m                grid spacing [5]
  repeats                  measurements per grid point [1]
  test_fraction            test share of the split [0.1]
  hidden                   hidden-layer neurons [8]
  activation               relu | logistic | tanh [relu]
  epochs, batch_size, learning_rate   [500, 32, 0.001]
  optimizer                adaptive | sgd_momentum [adaptive]
  momentum, beta1, beta2, epsilon     optimizer constants [0.9, 0.9, 0.999, 1e-8]
  validation_fraction, patience       early stopping [0 (off), 50]
  confidence_levels        list of CLs [[0.3935, 0.66, 0.95]]
  bin_width_m              error histogram bin width [10]
  pn_values                hidden sizes for sweeps [[3, 8, 16, 32]]
  parallel                 run sweep jobs concurrently [true]
  sizing_distance_scale_m  distance scale D [100]
  sizing_eval_distance_m   distance of the CRB threshold [D]
  sizing_norm              sup | rms [sup]
  sizing_calibration       threshold divisor [1.6]
  sizing_max_neurons       search limit [128]
  join_tolerance_s         ingestion timestamp tolerance [0.5]";

pub const DEFAULT_HIDDEN: usize = 8;
pub const DEFAULT_TEST_FRACTION: f64 = 0.1;
pub const DEFAULT_SWEEP: [usize; 4] = [3, 8, 16, 32];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tx_power_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ref_loss_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ref_distance_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub area_x_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub area_y_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub area_width_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub area_height_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repeats: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub activation: Option<Activation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<Optimizer>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub momentum: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patience: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confidence_levels: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bin_width_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pn_values: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallel: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizing_distance_scale_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizing_eval_distance_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizing_norm: Option<ErrorNorm>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizing_calibration: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizing_max_neurons: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub join_tolerance_s: Option<f64>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($field:ident),* $(,)?) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?).map_err(|e| match e {
            Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(format!("config: {e}")))
    }

    /// Values set in `other` take precedence.
    pub fn overlay(&mut self, other: &RunConfig) {
        overlay!(self, other;
            seed, tx_power_dbm, ref_loss_db, ref_distance_m, gamma, sigma_db,
            area_x_min, area_y_min, area_width_m, area_height_m, spacing_m, repeats,
            test_fraction, hidden, activation, epochs, batch_size, learning_rate,
            optimizer, momentum, beta1, beta2, epsilon, validation_fraction, patience,
            confidence_levels, bin_width_m, pn_values, parallel,
            sizing_distance_scale_m, sizing_eval_distance_m, sizing_norm,
            sizing_calibration, sizing_max_neurons, join_tolerance_s,
        );
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn path_loss_model(&self) -> Result<PathLossModel> {
        let d = PathLossModel::default();
        let m = PathLossModel {
            transmit_power_dbm: self.tx_power_dbm.unwrap_or(d.transmit_power_dbm),
            ref_loss_db: self.ref_loss_db.unwrap_or(d.ref_loss_db),
            ref_distance_m: self.ref_distance_m.unwrap_or(d.ref_distance_m),
            exponent: self.gamma.unwrap_or(d.exponent),
            shadow_sigma_db: self.sigma_db.unwrap_or(d.shadow_sigma_db),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn campaign_config(&self) -> Result<CampaignConfig> {
        let d = CampaignConfig::desk_scale();
        Ok(CampaignConfig {
            area: Area::new(
                self.area_x_min.unwrap_or(d.area.x_min),
                self.area_y_min.unwrap_or(d.area.y_min),
                self.area_width_m.unwrap_or(d.area.width),
                self.area_height_m.unwrap_or(d.area.height),
            )?,
            grid_spacing_m: self.spacing_m.unwrap_or(d.grid_spacing_m),
            repeats_per_point: self.repeats.unwrap_or(d.repeats_per_point),
        })
    }

    pub fn test_fraction(&self) -> f64 {
        self.test_fraction.unwrap_or(DEFAULT_TEST_FRACTION)
    }

    pub fn hidden(&self) -> usize {
        self.hidden.unwrap_or(DEFAULT_HIDDEN)
    }

    pub fn activation(&self) -> Activation {
        self.activation.unwrap_or(Activation::Relu)
    }

    /// Training settings; the seed is derived by the caller.
    pub fn train_config(&self, seed: u64) -> Result<TrainConfig> {
        let d = TrainConfig::default();
        let cfg = TrainConfig {
            epochs: self.epochs.unwrap_or(d.epochs),
            batch_size: self.batch_size.unwrap_or(d.batch_size),
            learning_rate: self.learning_rate.unwrap_or(d.learning_rate),
            optimizer: self.optimizer.unwrap_or(d.optimizer),
            momentum: self.momentum.unwrap_or(d.momentum),
            beta1: self.beta1.unwrap_or(d.beta1),
            beta2: self.beta2.unwrap_or(d.beta2),
            epsilon: self.epsilon.unwrap_or(d.epsilon),
            seed,
            validation_fraction: self.validation_fraction.unwrap_or(d.validation_fraction),
            patience: self.patience.unwrap_or(d.patience),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn confidence_levels(&self) -> Vec<f64> {
        self.confidence_levels
            .clone()
            .unwrap_or_else(|| DEFAULT_CONFIDENCE_LEVELS.to_vec())
    }

    pub fn bin_width_m(&self) -> f64 {
        self.bin_width_m.unwrap_or(DEFAULT_BIN_WIDTH_M)
    }

    pub fn pn_values(&self) -> Vec<usize> {
        self.pn_values.clone().unwrap_or_else(|| DEFAULT_SWEEP.to_vec())
    }

    pub fn parallel(&self) -> bool {
        self.parallel.unwrap_or(true)
    }

    pub fn sizing_config(&self) -> Result<SizingConfig> {
        let mut cfg = SizingConfig::new(self.gamma.unwrap_or(3.0), self.sigma_db.unwrap_or(5.0));
        cfg.d0_m = self.ref_distance_m.unwrap_or(cfg.d0_m);
        if let Some(d) = self.sizing_distance_scale_m {
            cfg.distance_scale_m = d;
            cfg.eval_distance_m = d;
        }
        cfg.eval_distance_m = self.sizing_eval_distance_m.unwrap_or(cfg.eval_distance_m);
        cfg.error_norm = self.sizing_norm.unwrap_or(cfg.error_norm);
        cfg.calibration = self.sizing_calibration.unwrap_or(cfg.calibration);
        cfg.max_neurons = self.sizing_max_neurons.unwrap_or(cfg.max_neurons);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn join_tolerance_s(&self) -> f64 {
        self.join_tolerance_s.unwrap_or(DEFAULT_TOLERANCE_S)
    }

    /// Every key set to the value a run would use.
    pub fn resolved(&self) -> Result<RunConfig> {
        if self.seed.is_some_and(|s| s > i64::MAX as u64) {
            return Err(invalid("seed must be below 2^63"));
        }
        let m = self.path_loss_model()?;
        let c = self.campaign_config()?;
        let t = self.train_config(0)?;
        let s = self.sizing_config()?;
        Ok(RunConfig {
            seed: Some(self.seed()),
            tx_power_dbm: Some(m.transmit_power_dbm),
            ref_loss_db: Some(m.ref_loss_db),
            ref_distance_m: Some(m.ref_distance_m),
            gamma: Some(m.exponent),
            sigma_db: Some(m.shadow_sigma_db),
            area_x_min: Some(c.area.x_min),
            area_y_min: Some(c.area.y_min),
            area_width_m: Some(c.area.width),
            area_height_m: Some(c.area.height),
            spacing_m: Some(c.grid_spacing_m),
            repeats: Some(c.repeats_per_point),
            test_fraction: Some(self.test_fraction()),
            hidden: Some(self.hidden()),
            activation: Some(self.activation()),
            epochs: Some(t.epochs),
            batch_size: Some(t.batch_size),
            learning_rate: Some(t.learning_rate),
            optimizer: Some(t.optimizer),
            momentum: Some(t.momentum),
            beta1: Some(t.beta1),
            beta2: Some(t.beta2),
            epsilon: Some(t.epsilon),
            validation_fraction: Some(t.validation_fraction),
            patience: Some(t.patience),
            confidence_levels: Some(self.confidence_levels()),
            bin_width_m: Some(self.bin_width_m()),
            pn_values: Some(self.pn_values()),
            parallel: Some(self.parallel()),
            sizing_distance_scale_m: Some(s.distance_scale_m),
            sizing_eval_distance_m: Some(s.eval_distance_m),
            sizing_norm: Some(s.error_norm),
            sizing_calibration: Some(s.calibration),
            sizing_max_neurons: Some(s.max_neurons),
            join_tolerance_s: Some(self.join_tolerance_s()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_keys() {
        let cfg = RunConfig::parse("seed = 7\nsigma_db = 3.0\nactivation = \"tanh\"\npn_values = [3, 8]\n").unwrap();
        assert_eq!(cfg.seed, Some(7));
        assert_eq!(cfg.path_loss_model().unwrap().shadow_sigma_db, 3.0);
        assert_eq!(cfg.activation(), Activation::Tanh);
        assert_eq!(cfg.pn_values(), vec![3, 8]);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(RunConfig::parse("sigma = 5\n").is_err());
        assert!(RunConfig::parse("[model]\ngamma = 3\n").is_err());
    }

    #[test]
    fn overlay_prefers_other() {
        let mut base = RunConfig::parse("seed = 1\ngamma = 2.5\n").unwrap();
        base.overlay(&RunConfig {
            seed: Some(9),
            ..RunConfig::default()
        });
        assert_eq!(base.seed, Some(9));
        assert_eq!(base.gamma, Some(2.5));
    }

    #[test]
    fn resolved_round_trips() {
        let resolved = RunConfig::default().resolved().unwrap();
        let text = resolved.to_toml_string().unwrap();
        assert_eq!(RunConfig::parse(&text).unwrap(), resolved);
        assert_eq!(resolved.resolved().unwrap(), resolved);
    }

    #[test]
    fn invalid_values_surface() {
        assert!(RunConfig::parse("gamma = -1.0\n").unwrap().resolved().is_err());
        assert!(RunConfig::parse("epochs = 0\n").unwrap().resolved().is_err());
    }
}
