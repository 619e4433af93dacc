//! Single-hidden-layer feedforward regressor from RSS vectors to positions.
//!
//! Inputs and outputs are standardized with statistics fitted on the
//! training samples; the network itself only ever sees normalized values.
//! The loss is the batch mean of the squared error summed over both
//! normalized coordinates.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{LabeledSample, Position};
use crate::error::{invalid, Error, Result};
use crate::estimator::Estimator;
use crate::seed;

pub const OUTPUT_DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Logistic,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Logistic => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative with respect to the pre-activation `z`.
    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Logistic => {
                let s = 1.0 / (1.0 + (-z).exp());
                s * (1.0 - s)
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Logistic => "logistic",
            Activation::Tanh => "tanh",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "logistic" | "sigmoid" => Ok(Activation::Logistic),
            "tanh" => Ok(Activation::Tanh),
            other => Err(invalid(format!("unknown activation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub input_mean: Vec<f64>,
    pub input_std: Vec<f64>,
    pub output_mean: [f64; OUTPUT_DIM],
    pub output_std: [f64; OUTPUT_DIM],
}

impl NormalizationStats {
    pub fn identity(input_dim: usize) -> Self {
        Self {
            input_mean: vec![0.0; input_dim],
            input_std: vec![1.0; input_dim],
            output_mean: [0.0; OUTPUT_DIM],
            output_std: [1.0; OUTPUT_DIM],
        }
    }

    /// Per-feature mean and population standard deviation; zero spread maps to 1.
    pub fn fit(samples: &[LabeledSample]) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::Empty("cannot fit normalization on no samples".into()))?;
        let n_in = first.rss.len();
        let count = samples.len() as f64;
        let mut input_mean = vec![0.0; n_in];
        let mut output_mean = [0.0; OUTPUT_DIM];
        for s in samples {
            check_dim(n_in, s.rss.len())?;
            for (m, v) in input_mean.iter_mut().zip(&s.rss) {
                *m += v;
            }
            output_mean[0] += s.position.x;
            output_mean[1] += s.position.y;
        }
        input_mean.iter_mut().for_each(|m| *m /= count);
        output_mean.iter_mut().for_each(|m| *m /= count);

        let mut input_var = vec![0.0; n_in];
        let mut output_var = [0.0; OUTPUT_DIM];
        for s in samples {
            for ((acc, v), m) in input_var.iter_mut().zip(&s.rss).zip(&input_mean) {
                *acc += (v - m) * (v - m);
            }
            let out = [s.position.x, s.position.y];
            for k in 0..OUTPUT_DIM {
                output_var[k] += (out[k] - output_mean[k]).powi(2);
            }
        }
        let to_std = |var: f64| {
            let sd = (var / count).sqrt();
            if sd > 0.0 && sd.is_finite() {
                sd
            } else {
                1.0
            }
        };
        Ok(Self {
            input_mean,
            input_std: input_var.into_iter().map(to_std).collect(),
            output_mean,
            output_std: output_var.map(to_std),
        })
    }

    fn normalize_input(&self, rss: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = (rss[i] - self.input_mean[i]) / self.input_std[i];
        }
    }

    fn normalize_output(&self, p: Position) -> [f64; OUTPUT_DIM] {
        [
            (p.x - self.output_mean[0]) / self.output_std[0],
            (p.y - self.output_mean[1]) / self.output_std[1],
        ]
    }

    fn denormalize_output(&self, y: [f64; OUTPUT_DIM]) -> Position {
        Position::new(
            y[0] * self.output_std[0] + self.output_mean[0],
            y[1] * self.output_std[1] + self.output_mean[1],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    SgdMomentum,
    /// Adam-style per-parameter step sizes.
    Adaptive,
}

impl std::str::FromStr for Optimizer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd_momentum" | "sgd" => Ok(Optimizer::SgdMomentum),
            "adaptive" | "adam" => Ok(Optimizer::Adaptive),
            other => Err(invalid(format!("unknown optimizer {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    pub momentum: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Fraction of the training samples held out for early stopping; 0 disables it.
    pub validation_fraction: f64,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 500,
            batch_size: 32,
            learning_rate: 1e-3,
            optimizer: Optimizer::Adaptive,
            momentum: 0.9,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
            validation_fraction: 0.0,
            patience: 50,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(invalid("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch_size must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        for (name, v) in [("momentum", self.momentum), ("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&v) {
                return Err(invalid(format!("{name} must be in [0, 1), got {v}")));
            }
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(invalid("epsilon must be positive"));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(invalid(format!(
                "validation fraction must be in [0, 1), got {}",
                self.validation_fraction
            )));
        }
        Ok(())
    }
}

/// Weights are row-major: `w1[h * input_dim + i]`, `w2[k * hidden_dim + h]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShallowNet {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub activation: Activation,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub norm: NormalizationStats,
    /// Configuration that produced the weights, when trained.
    #[serde(default)]
    pub train_config: Option<TrainConfig>,
}

/// Gradient with the same layout as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
}

impl Gradients {
    fn zeros(net: &ShallowNet) -> Self {
        Self {
            w1: vec![0.0; net.w1.len()],
            b1: vec![0.0; net.b1.len()],
            w2: vec![0.0; net.w2.len()],
            b2: vec![0.0; net.b2.len()],
        }
    }

    fn clear(&mut self) {
        for s in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            s.iter_mut().for_each(|g| *g = 0.0);
        }
    }

    /// Flattened in parameter order: w1, b1, w2, b2.
    pub fn to_vec(&self) -> Vec<f64> {
        [&self.w1, &self.b1, &self.w2, &self.b2]
            .into_iter()
            .flatten()
            .copied()
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.to_vec().into_iter().fold(0.0, |m, g| m.max(g.abs()))
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Per-sample activations kept for the backward pass.
struct Trace {
    input: Vec<f64>,
    pre: Vec<f64>,
    hidden: Vec<f64>,
    output: [f64; OUTPUT_DIM],
}

impl Trace {
    fn new(net: &ShallowNet) -> Self {
        Self {
            input: vec![0.0; net.input_dim],
            pre: vec![0.0; net.hidden_dim],
            hidden: vec![0.0; net.hidden_dim],
            output: [0.0; OUTPUT_DIM],
        }
    }
}

impl ShallowNet {
    /// Random fan-in scaled uniform weights, zero biases, identity normalization.
    pub fn init(input_dim: usize, hidden_dim: usize, activation: Activation, seed: u64) -> Result<Self> {
        if input_dim == 0 || hidden_dim == 0 {
            return Err(invalid("network dimensions must be at least 1"));
        }
        let mut rng = seed::rng(seed);
        // He-uniform for ReLU, LeCun-uniform for the saturating activations.
        let gain = if activation == Activation::Relu { 6.0 } else { 3.0 };
        let mut uniform = |fan_in: usize, count: usize| -> Vec<f64> {
            let limit = (gain / fan_in as f64).sqrt();
            (0..count).map(|_| rng.random_range(-limit..limit)).collect()
        };
        let w1 = uniform(input_dim, hidden_dim * input_dim);
        let w2 = uniform(hidden_dim, OUTPUT_DIM * hidden_dim);
        Ok(Self {
            input_dim,
            hidden_dim,
            activation,
            w1,
            b1: vec![0.0; hidden_dim],
            w2,
            b2: vec![0.0; OUTPUT_DIM],
            norm: NormalizationStats::identity(input_dim),
            train_config: None,
        })
    }

    pub fn parameter_count(&self) -> usize {
        parameter_count(self.input_dim, self.hidden_dim)
    }

    /// Checks shapes and finiteness, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_dim == 0 {
            return Err(invalid("network dimensions must be at least 1"));
        }
        let shapes = [
            ("w1", self.w1.len(), self.hidden_dim * self.input_dim),
            ("b1", self.b1.len(), self.hidden_dim),
            ("w2", self.w2.len(), OUTPUT_DIM * self.hidden_dim),
            ("b2", self.b2.len(), OUTPUT_DIM),
            ("input_mean", self.norm.input_mean.len(), self.input_dim),
            ("input_std", self.norm.input_std.len(), self.input_dim),
        ];
        for (name, got, expected) in shapes {
            if got != expected {
                return Err(Error::Format(format!("{name} has {got} entries, expected {expected}")));
            }
        }
        let all_finite = self.parameters().iter().all(|v| v.is_finite())
            && self.norm.input_mean.iter().all(|v| v.is_finite())
            && self.norm.output_mean.iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Format("non-finite weight or normalization value".into()));
        }
        let stds = self.norm.input_std.iter().chain(&self.norm.output_std);
        if stds.clone().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::Format("normalization std entries must be positive".into()));
        }
        Ok(())
    }

    /// Flattened parameters: w1, b1, w2, b2.
    pub fn parameters(&self) -> Vec<f64> {
        [&self.w1, &self.b1, &self.w2, &self.b2]
            .into_iter()
            .flatten()
            .copied()
            .collect()
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        check_dim(self.parameter_count(), params.len())?;
        let mut rest = params;
        for dst in [&mut self.w1, &mut self.b1, &mut self.w2, &mut self.b2] {
            let (head, tail) = rest.split_at(dst.len());
            dst.copy_from_slice(head);
            rest = tail;
        }
        Ok(())
    }

    fn run(&self, rss: &[f64], t: &mut Trace) {
        self.norm.normalize_input(rss, &mut t.input);
        let n = self.input_dim;
        for h in 0..self.hidden_dim {
            let row = &self.w1[h * n..(h + 1) * n];
            let z = self.b1[h] + row.iter().zip(&t.input).map(|(w, x)| w * x).sum::<f64>();
            t.pre[h] = z;
            t.hidden[h] = self.activation.apply(z);
        }
        for k in 0..OUTPUT_DIM {
            let row = &self.w2[k * self.hidden_dim..(k + 1) * self.hidden_dim];
            t.output[k] = self.b2[k] + row.iter().zip(&t.hidden).map(|(w, a)| w * a).sum::<f64>();
        }
    }

    pub fn forward(&self, rss: &[f64]) -> Result<Position> {
        check_dim(self.input_dim, rss.len())?;
        let mut t = Trace::new(self);
        self.run(rss, &mut t);
        Ok(self.norm.denormalize_output(t.output))
    }

    pub fn forward_batch(&self, batch: &[Vec<f64>]) -> Result<Vec<Position>> {
        let mut t = Trace::new(self);
        batch
            .iter()
            .map(|rss| {
                check_dim(self.input_dim, rss.len())?;
                self.run(rss, &mut t);
                Ok(self.norm.denormalize_output(t.output))
            })
            .collect()
    }

    /// Same as [`forward`](Self::forward); the estimator-facing name.
    pub fn predict(&self, rss: &[f64]) -> Result<Position> {
        self.forward(rss)
    }

    /// Accumulates `scale * d(squared error)/d(params)` for one sample; returns its squared error.
    #[allow(clippy::needless_range_loop)] // indexes several parallel buffers
    fn accumulate(&self, sample: &LabeledSample, scale: f64, t: &mut Trace, delta: &mut [f64], g: &mut Gradients) -> f64 {
        self.run(&sample.rss, t);
        let target = self.norm.normalize_output(sample.position);
        let err = [t.output[0] - target[0], t.output[1] - target[1]];
        let hd = self.hidden_dim;
        delta.iter_mut().for_each(|d| *d = 0.0);
        for k in 0..OUTPUT_DIM {
            let d_out = 2.0 * err[k] * scale;
            g.b2[k] += d_out;
            let w_row = &self.w2[k * hd..(k + 1) * hd];
            let g_row = &mut g.w2[k * hd..(k + 1) * hd];
            for h in 0..hd {
                g_row[h] += d_out * t.hidden[h];
                delta[h] += d_out * w_row[h];
            }
        }
        let n = self.input_dim;
        for h in 0..hd {
            let dz = delta[h] * self.activation.derivative(t.pre[h]);
            if dz == 0.0 {
                continue;
            }
            g.b1[h] += dz;
            for (gw, x) in g.w1[h * n..(h + 1) * n].iter_mut().zip(&t.input) {
                *gw += dz * x;
            }
        }
        err[0] * err[0] + err[1] * err[1]
    }

    /// Mean squared normalized-coordinate error over `batch` and its gradient.
    pub fn loss_and_gradient(&self, batch: &[LabeledSample]) -> Result<(f64, Gradients)> {
        if batch.is_empty() {
            return Err(Error::Empty("loss needs a non-empty batch".into()));
        }
        for s in batch {
            check_dim(self.input_dim, s.rss.len())?;
        }
        let mut g = Gradients::zeros(self);
        let mut t = Trace::new(self);
        let mut delta = vec![0.0; self.hidden_dim];
        let scale = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        for s in batch {
            loss += self.accumulate(s, scale, &mut t, &mut delta, &mut g);
        }
        Ok((loss * scale, g))
    }

    /// Mean squared normalized-coordinate error without gradients.
    pub fn loss(&self, samples: &[LabeledSample]) -> Result<f64> {
        if samples.is_empty() {
            return Err(Error::Empty("loss needs at least one sample".into()));
        }
        let mut t = Trace::new(self);
        let mut total = 0.0;
        for s in samples {
            check_dim(self.input_dim, s.rss.len())?;
            self.run(&s.rss, &mut t);
            let target = self.norm.normalize_output(s.position);
            total += (t.output[0] - target[0]).powi(2) + (t.output[1] - target[1]).powi(2);
        }
        Ok(total / samples.len() as f64)
    }
}

pub fn parameter_count(input_dim: usize, hidden_dim: usize) -> usize {
    hidden_dim * (input_dim + 1) + OUTPUT_DIM * (hidden_dim + 1)
}

impl Estimator for ShallowNet {
    fn name(&self) -> String {
        format!("shallow-net(P_n={})", self.hidden_dim)
    }

    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn predict(&self, rss: &[f64]) -> Result<Position> {
        self.forward(rss)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    /// Full-pass training loss after each epoch.
    pub train_loss: Vec<f64>,
    /// Validation loss per epoch when early stopping is enabled.
    pub validation_loss: Vec<f64>,
    /// Epoch (1-based) whose weights were returned.
    pub best_epoch: usize,
}

enum OptimizerState {
    Momentum { velocity: Vec<f64> },
    Adaptive { m: Vec<f64>, v: Vec<f64>, step: i32 },
}

impl OptimizerState {
    fn new(kind: Optimizer, size: usize) -> Self {
        match kind {
            Optimizer::SgdMomentum => Self::Momentum {
                velocity: vec![0.0; size],
            },
            Optimizer::Adaptive => Self::Adaptive {
                m: vec![0.0; size],
                v: vec![0.0; size],
                step: 0,
            },
        }
    }

    fn step(&mut self, cfg: &TrainConfig, net: &mut ShallowNet, g: &Gradients) {
        let params = [&mut net.w1, &mut net.b1, &mut net.w2, &mut net.b2];
        let grads = [&g.w1, &g.b1, &g.w2, &g.b2];
        match self {
            Self::Momentum { velocity } => {
                let mut offset = 0;
                for (p, gr) in params.into_iter().zip(grads) {
                    let vel = &mut velocity[offset..offset + p.len()];
                    for ((w, gi), vi) in p.iter_mut().zip(gr).zip(vel) {
                        *vi = cfg.momentum * *vi - cfg.learning_rate * gi;
                        *w += *vi;
                    }
                    offset += p.len();
                }
            }
            Self::Adaptive { m, v, step } => {
                *step = step.saturating_add(1);
                let bc1 = 1.0 - cfg.beta1.powi(*step);
                let bc2 = 1.0 - cfg.beta2.powi(*step);
                let mut offset = 0;
                for (p, gr) in params.into_iter().zip(grads) {
                    let ms = &mut m[offset..offset + p.len()];
                    let vs = &mut v[offset..offset + p.len()];
                    for (((w, gi), mi), vi) in p.iter_mut().zip(gr).zip(ms).zip(vs) {
                        *mi = cfg.beta1 * *mi + (1.0 - cfg.beta1) * gi;
                        *vi = cfg.beta2 * *vi + (1.0 - cfg.beta2) * gi * gi;
                        *w -= cfg.learning_rate * (*mi / bc1) / ((*vi / bc2).sqrt() + cfg.epsilon);
                    }
                    offset += p.len();
                }
            }
        }
    }
}

/// Mini-batch training starting from `net`'s weights.
///
/// Normalization is refitted on `samples`. With a validation fraction the
/// held-out tail of a seeded shuffle is used for early stopping and the
/// best-validation weights are returned.
pub fn train(net: &ShallowNet, samples: &[LabeledSample], cfg: &TrainConfig) -> Result<(ShallowNet, TrainLog)> {
    cfg.validate()?;
    if samples.is_empty() {
        return Err(Error::Empty("training set is empty".into()));
    }
    for s in samples {
        check_dim(net.input_dim, s.rss.len())?;
    }
    let mut rng = seed::rng(seed::derive(cfg.seed, seed::TRAIN));

    let mut order: Vec<usize> = (0..samples.len()).collect();
    let (train_set, val_set): (Vec<LabeledSample>, Vec<LabeledSample>) = if cfg.validation_fraction > 0.0 {
        order.shuffle(&mut rng);
        let n_val = (cfg.validation_fraction * samples.len() as f64).round() as usize;
        if n_val == 0 || n_val >= samples.len() {
            return Err(invalid("validation fraction leaves an empty partition"));
        }
        let (val_idx, train_idx) = order.split_at(n_val);
        (
            train_idx.iter().map(|&i| samples[i].clone()).collect(),
            val_idx.iter().map(|&i| samples[i].clone()).collect(),
        )
    } else {
        (samples.to_vec(), Vec::new())
    };

    let mut net = net.clone();
    net.norm = NormalizationStats::fit(&train_set)?;
    net.train_config = Some(*cfg);

    let mut opt = OptimizerState::new(cfg.optimizer, net.parameter_count());
    let mut grad = Gradients::zeros(&net);
    let mut trace = Trace::new(&net);
    let mut delta = vec![0.0; net.hidden_dim];
    let mut log = TrainLog::default();
    let mut best: Option<(f64, ShallowNet)> = None;
    let mut since_best = 0;
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grad.clear();
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                net.accumulate(&train_set[i], scale, &mut trace, &mut delta, &mut grad);
            }
            opt.step(cfg, &mut net, &grad);
        }
        let loss = net.loss(&train_set)?;
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        log.train_loss.push(loss);
        log.best_epoch = epoch;

        if !val_set.is_empty() {
            let val = net.loss(&val_set)?;
            if !val.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            log.validation_loss.push(val);
            match &best {
                Some((b, _)) if val >= *b => since_best += 1,
                _ => {
                    best = Some((val, net.clone()));
                    since_best = 0;
                }
            }
            if since_best > cfg.patience {
                break;
            }
        }
    }

    if let Some((_, best_net)) = best {
        log.best_epoch = log
            .validation_loss
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i + 1)
            .unwrap_or(log.best_epoch);
        net = best_net;
    }
    Ok((net, log))
}

/// Initialize from `cfg.seed` and train.
pub fn fit(
    samples: &[LabeledSample],
    hidden_dim: usize,
    activation: Activation,
    cfg: &TrainConfig,
) -> Result<(ShallowNet, TrainLog)> {
    let input_dim = samples
        .first()
        .map(|s| s.rss.len())
        .ok_or_else(|| Error::Empty("training set is empty".into()))?;
    let net = ShallowNet::init(input_dim, hidden_dim, activation, cfg.seed)?;
    train(&net, samples, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(rss: Vec<f64>, x: f64, y: f64) -> LabeledSample {
        LabeledSample {
            position: Position::new(x, y),
            rss,
        }
    }

    #[test]
    fn paper_parameter_counts() {
        let counts: Vec<usize> = [8, 30, 40, 50].iter().map(|&p| parameter_count(5, p)).collect();
        assert_eq!(counts, vec![66, 242, 322, 402]);
        let net = ShallowNet::init(5, 8, Activation::Relu, 1).unwrap();
        assert_eq!(net.parameter_count(), 66);
        assert_eq!(net.parameters().len(), 66);
    }

    #[test]
    fn init_is_deterministic() {
        let a = ShallowNet::init(5, 8, Activation::Relu, 42).unwrap();
        let b = ShallowNet::init(5, 8, Activation::Relu, 42).unwrap();
        assert_eq!(a, b);
        let c = ShallowNet::init(5, 8, Activation::Relu, 43).unwrap();
        assert_ne!(a.w1, c.w1);
        assert!(a.b1.iter().all(|&b| b == 0.0));
        assert!(ShallowNet::init(0, 8, Activation::Relu, 1).is_err());
    }

    #[test]
    fn zero_weights_output_mean() {
        let mut net = ShallowNet::init(3, 4, Activation::Tanh, 1).unwrap();
        let zeros = vec![0.0; net.parameter_count()];
        net.set_parameters(&zeros).unwrap();
        net.norm.output_mean = [12.5, -3.0];
        assert_eq!(net.forward(&[1.0, 2.0, 3.0]).unwrap(), Position::new(12.5, -3.0));
    }

    #[test]
    fn dead_relu_units_yield_bias() {
        let mut net = ShallowNet::init(2, 3, Activation::Relu, 1).unwrap();
        net.w1.iter_mut().for_each(|w| *w = 1.0);
        net.b1.iter_mut().for_each(|b| *b = -100.0);
        net.b2 = vec![0.5, -0.5];
        net.norm.output_mean = [10.0, 20.0];
        net.norm.output_std = [2.0, 4.0];
        assert_eq!(net.forward(&[1.0, 1.0]).unwrap(), Position::new(11.0, 18.0));
    }

    #[test]
    fn forward_rejects_wrong_dimension() {
        let net = ShallowNet::init(5, 8, Activation::Relu, 1).unwrap();
        assert!(matches!(
            net.forward(&[0.0; 4]),
            Err(Error::DimensionMismatch { expected: 5, got: 4 })
        ));
        assert!(net.loss_and_gradient(&[]).is_err());
    }

    #[test]
    fn perfect_prediction_has_zero_loss_and_gradient() {
        let net = ShallowNet::init(3, 4, Activation::Logistic, 9).unwrap();
        let rss = vec![-40.0, -55.0, -70.0];
        let p = net.forward(&rss).unwrap();
        let (loss, g) = net.loss_and_gradient(&[sample(rss, p.x, p.y)]).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn memorizes_single_sample() {
        let samples = vec![sample(vec![-50.0, -60.0, -70.0], 30.0, 40.0)];
        let cfg = TrainConfig {
            epochs: 3000,
            learning_rate: 1e-2,
            ..TrainConfig::default()
        };
        let (net, log) = fit(&samples, 4, Activation::Tanh, &cfg).unwrap();
        assert!(*log.train_loss.last().unwrap() < 1e-6);
        let p = net.predict(&samples[0].rss).unwrap();
        assert!((p.x - 30.0).abs() < 1e-2 && (p.y - 40.0).abs() < 1e-2);
    }

    #[test]
    fn divergence_is_reported() {
        let samples: Vec<_> = (0..20)
            .map(|i| sample(vec![i as f64, (i * i) as f64], i as f64, -(i as f64)))
            .collect();
        let cfg = TrainConfig {
            epochs: 200,
            learning_rate: 1e6,
            optimizer: Optimizer::SgdMomentum,
            ..TrainConfig::default()
        };
        let err = fit(&samples, 8, Activation::Relu, &cfg).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }), "{err}");
    }

    #[test]
    fn early_stopping_returns_best_epoch() {
        let samples: Vec<_> = (0..60)
            .map(|i| {
                let t = i as f64 / 10.0;
                sample(vec![t.sin(), t.cos()], t, 2.0 * t)
            })
            .collect();
        let cfg = TrainConfig {
            epochs: 80,
            validation_fraction: 0.2,
            patience: 5,
            ..TrainConfig::default()
        };
        let (_, log) = fit(&samples, 6, Activation::Tanh, &cfg).unwrap();
        let best = log.best_epoch;
        assert!(best >= 1 && best <= log.validation_loss.len());
        let min = log.validation_loss.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(log.validation_loss[best - 1], min);
    }

    #[test]
    fn normalization_clamps_constant_features() {
        let samples = vec![sample(vec![1.0, 5.0], 0.0, 3.0), sample(vec![3.0, 5.0], 2.0, 3.0)];
        let norm = NormalizationStats::fit(&samples).unwrap();
        assert_eq!(norm.input_mean, vec![2.0, 5.0]);
        assert_eq!(norm.input_std, vec![1.0, 1.0]);
        assert_eq!(norm.output_std, [1.0, 1.0]);
    }

    #[test]
    fn config_validation() {
        let bad = [
            TrainConfig {
                epochs: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                batch_size: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                learning_rate: 0.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                validation_fraction: 1.0,
                ..TrainConfig::default()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err());
        }
    }
}
