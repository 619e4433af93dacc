//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls into the library's numerics; each helper recomputes its
//! quantity from first principles so the tests compare two implementations.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use rssloc::channel::{Deployment, LabeledSample, PathLossModel, Position};
use rssloc::io::ingest::{GpsTrack, RssStream, TrackRecord};
use rssloc::net::{Activation, ShallowNet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mean RSS written out directly from the log-distance model.
pub fn mean_rss(m: &PathLossModel, rsu: Position, p: Position) -> f64 {
    let d = ((rsu.x - p.x).powi(2) + (rsu.y - p.y).powi(2)).sqrt();
    m.transmit_power_dbm - m.ref_loss_db - 10.0 * m.exponent * (d / m.ref_distance_m).log10()
}

/// Gaussian log-likelihood of `rss` for a transmitter at `p`, up to a constant.
pub fn log_likelihood(m: &PathLossModel, dep: &Deployment, rss: &[f64], p: Position) -> f64 {
    let s2 = m.shadow_sigma_db * m.shadow_sigma_db;
    dep.rsus()
        .iter()
        .zip(rss)
        .map(|(&rsu, &r)| -(r - mean_rss(m, rsu, p)).powi(2) / (2.0 * s2))
        .sum()
}

/// Fisher matrix as the covariance of the numerically differentiated score.
///
/// Returns `[[i_xx, i_xy], [i_xy, i_yy]]`.
pub fn monte_carlo_fisher(
    m: &PathLossModel,
    dep: &Deployment,
    truth: Position,
    draws: usize,
    seed: u64,
) -> [[f64; 2]; 2] {
    let mut r = rng(seed);
    let h = 1e-3;
    let means: Vec<f64> = dep.rsus().iter().map(|&rsu| mean_rss(m, rsu, truth)).collect();
    let mut acc = [[0.0; 2]; 2];
    let mut rss = vec![0.0; means.len()];
    for _ in 0..draws {
        for (v, mu) in rss.iter_mut().zip(&means) {
            let z: f64 = StandardNormal.sample(&mut r);
            *v = mu + m.shadow_sigma_db * z;
        }
        let ll = |dx: f64, dy: f64| log_likelihood(m, dep, &rss, Position::new(truth.x + dx, truth.y + dy));
        let sx = (ll(h, 0.0) - ll(-h, 0.0)) / (2.0 * h);
        let sy = (ll(0.0, h) - ll(0.0, -h)) / (2.0 * h);
        acc[0][0] += sx * sx;
        acc[0][1] += sx * sy;
        acc[1][1] += sy * sy;
    }
    let n = draws as f64;
    [[acc[0][0] / n, acc[0][1] / n], [acc[0][1] / n, acc[1][1] / n]]
}

/// `x ~ N(mean, C)` via a hand-rolled 2x2 Cholesky factor.
pub fn gaussian_2d<R: Rng>(rng: &mut R, mean: Position, c_xx: f64, c_xy: f64, c_yy: f64) -> Position {
    let l11 = c_xx.sqrt();
    let l21 = c_xy / l11;
    let l22 = (c_yy - l21 * l21).sqrt();
    let z1: f64 = StandardNormal.sample(rng);
    let z2: f64 = StandardNormal.sample(rng);
    Position::new(mean.x + l11 * z1, mean.y + l21 * z1 + l22 * z2)
}

/// Mahalanobis membership `d^T C^{-1} d <= k`.
pub fn inside_mahalanobis(d: (f64, f64), c_xx: f64, c_xy: f64, c_yy: f64, k: f64) -> bool {
    let det = c_xx * c_yy - c_xy * c_xy;
    let q = (c_yy * d.0 * d.0 - 2.0 * c_xy * d.0 * d.1 + c_xx * d.1 * d.1) / det;
    q <= k
}

/// Uniform interior point of the 200 m x 200 m area, at least `margin` from every RSU.
pub fn interior_point<R: Rng>(rng: &mut R, dep: &Deployment, margin: f64) -> Position {
    loop {
        let p = Position::new(rng.random_range(10.0..190.0), rng.random_range(10.0..190.0));
        if dep.rsus().iter().all(|r| r.distance(&p) > margin) {
            return p;
        }
    }
}

pub fn frobenius_rel_error(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            num += (a[i][j] - b[i][j]).powi(2);
            den += b[i][j].powi(2);
        }
    }
    (num / den).sqrt()
}

/// CRB covariance `(c_xx, c_xy, c_yy)` from the closed-form Fisher sums.
pub fn crb_oracle(m: &PathLossModel, dep: &Deployment, p: Position) -> (f64, f64, f64) {
    let a = 10.0 / std::f64::consts::LN_10 * m.exponent / m.shadow_sigma_db;
    let (mut fxx, mut fxy, mut fyy) = (0.0, 0.0, 0.0);
    for r in dep.rsus() {
        let (dx, dy) = (p.x - r.x, p.y - r.y);
        let d4 = (dx * dx + dy * dy).powi(2);
        fxx += a * a * dx * dx / d4;
        fxy += a * a * dx * dy / d4;
        fyy += a * a * dy * dy / d4;
    }
    let det = fxx * fyy - fxy * fxy;
    (fyy / det, -fxy / det, fxx / det)
}

pub fn random_samples<R: Rng>(rng: &mut R, n: usize, dim: usize) -> Vec<LabeledSample> {
    (0..n)
        .map(|_| LabeledSample {
            position: Position::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
            rss: (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect(),
        })
        .collect()
}

/// Forward pass and MSE written out from the weight layout, identity normalization.
pub fn oracle_loss(net: &ShallowNet, batch: &[LabeledSample]) -> f64 {
    let (n, h) = (net.input_dim, net.hidden_dim);
    let act = |z: f64| match net.activation {
        Activation::Relu => z.max(0.0),
        Activation::Logistic => 1.0 / (1.0 + (-z).exp()),
        Activation::Tanh => z.tanh(),
    };
    let mut total = 0.0;
    for s in batch {
        let hidden: Vec<f64> = (0..h)
            .map(|j| act(net.b1[j] + (0..n).map(|i| net.w1[j * n + i] * s.rss[i]).sum::<f64>()))
            .collect();
        let out: Vec<f64> = (0..2)
            .map(|k| net.b2[k] + (0..h).map(|j| net.w2[k * h + j] * hidden[j]).sum::<f64>())
            .collect();
        total += (out[0] - s.position.x).powi(2) + (out[1] - s.position.y).powi(2);
    }
    total / batch.len() as f64
}

pub fn pre_activations(net: &ShallowNet, batch: &[LabeledSample]) -> Vec<f64> {
    let n = net.input_dim;
    batch
        .iter()
        .flat_map(|s| (0..net.hidden_dim).map(move |j| net.b1[j] + (0..n).map(|i| net.w1[j * n + i] * s.rss[i]).sum::<f64>()))
        .collect()
}

/// Worst relative gap between analytic and central-difference gradients.
///
/// The denominator is floored at 1e-4 so components that are zero up to
/// rounding do not dominate.
pub fn gradient_gap(net: &ShallowNet, batch: &[LabeledSample]) -> f64 {
    let step = 1e-5;
    let analytic = net.loss_and_gradient(batch).unwrap().1.to_vec();
    let params = net.parameters();
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for (i, &g) in analytic.iter().enumerate() {
        let mut p = params.clone();
        p[i] += step;
        probe.set_parameters(&p).unwrap();
        let up = oracle_loss(&probe, batch);
        p[i] -= 2.0 * step;
        probe.set_parameters(&p).unwrap();
        let down = oracle_loss(&probe, batch);
        let numeric = (up - down) / (2.0 * step);
        worst = worst.max((g - numeric).abs() / g.abs().max(numeric.abs()).max(1e-4));
    }
    worst
}

pub fn random_net<R: Rng>(rng: &mut R, act: Activation) -> ShallowNet {
    let mut net = ShallowNet::init(5, 7, act, rng.random()).unwrap();
    let p: Vec<f64> = (0..net.parameter_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
    net.set_parameters(&p).unwrap();
    net
}

/// Exhaustive argmin: all distances first, then the first index attaining the minimum.
pub fn brute_force_nearest(train: &[LabeledSample], query: &[f64]) -> usize {
    let dists: Vec<f64> = train
        .iter()
        .map(|s| {
            let ss: f64 = s.rss.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
            (ss / query.len() as f64).sqrt()
        })
        .collect();
    let best = dists.iter().copied().fold(f64::INFINITY, f64::min);
    dists.iter().position(|&d| d == best).unwrap()
}

/// Brute-force join: scan every record of every stream for each track record.
pub fn oracle_join(streams: &[RssStream], track: &GpsTrack, tol: f64) -> Vec<LabeledSample> {
    let mut out = Vec::new();
    for rec in &track.records {
        let mut rss = Vec::new();
        for s in streams {
            let mut best: Option<(f64, f64, f64)> = None; // (gap, time, value)
            for &(t, v) in &s.records {
                let gap = (t - rec.timestamp_s).abs();
                if gap > tol {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((g, bt, _)) => gap < g || (gap == g && t < bt),
                };
                if better {
                    best = Some((gap, t, v));
                }
            }
            if let Some((_, _, v)) = best {
                rss.push(v);
            }
        }
        if rss.len() == streams.len() {
            out.push(LabeledSample {
                position: rec.position,
                rss,
            });
        }
    }
    out
}

pub fn jittered_streams<R: Rng>(rng: &mut R, n_streams: usize, seconds: usize) -> (Vec<RssStream>, GpsTrack) {
    let streams = (0..n_streams)
        .map(|k| {
            let mut records = Vec::new();
            for t in 0..seconds {
                // Random gaps make some records unmatched.
                if rng.random_bool(0.08) {
                    continue;
                }
                let ts = t as f64 + rng.random_range(-0.2..0.2);
                records.push((ts, rng.random_range(-100.0..-40.0)));
            }
            RssStream::new(k, records).unwrap()
        })
        .collect();
    let track = GpsTrack::new(
        (0..seconds)
            .map(|t| TrackRecord {
                timestamp_s: t as f64 + rng.random_range(-0.2..0.2),
                position: Position::new(rng.random_range(0.0..200.0), rng.random_range(0.0..200.0)),
            })
            .collect(),
    )
    .unwrap();
    (streams, track)
}
