use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::par;
use crate::seed;

#[derive(Clone, Debug, PartialEq)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub iterations: usize,
    pub seed: u64,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    pub exaggeration_iters: usize,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    /// Per-iteration learning-rate factor applied after the exaggeration phase.
    pub lr_decay: f64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            perplexity: 30.0,
            iterations: 1000,
            seed: 0,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iters: 250,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            lr_decay: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Embedding2D {
    pub points: Vec<[f64; 2]>,
    /// KL(P‖Q) after every iteration (without exaggeration).
    pub kl_history: Vec<f64>,
}

/// Entropy tolerance (nats) of the bandwidth search.
pub const ENTROPY_TOL: f64 = 1e-4;

/// Row-conditional affinities `p_{j|i}` matching `perplexity`, found by
/// bisection on the Gaussian precision.
pub fn conditional_affinities(d2: &[f64], n: usize, perplexity: f64) -> Vec<f64> {
    let target = perplexity.ln();
    let rows: Vec<Vec<f64>> = par::map_range(n, |i| {
        let row = &d2[i * n..(i + 1) * n];
        let (mut lo, mut hi, mut beta) = (0.0f64, f64::INFINITY, 1.0f64);
        let mut p = vec![0.0; n];
        for _ in 0..200 {
            let dmin = row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &d)| d).fold(f64::INFINITY, f64::min);
            let mut sum = 0.0;
            for j in 0..n {
                p[j] = if j == i { 0.0 } else { (-beta * (row[j] - dmin)).exp() };
                sum += p[j];
            }
            let mut h = 0.0;
            for j in 0..n {
                if j != i {
                    p[j] /= sum;
                    if p[j] > 0.0 {
                        h -= p[j] * p[j].ln();
                    }
                }
            }
            let diff = h - target;
            if diff.abs() < ENTROPY_TOL {
                break;
            }
            if diff > 0.0 {
                lo = beta;
                beta = if hi.is_finite() { 0.5 * (beta + hi) } else { beta * 2.0 };
            } else {
                hi = beta;
                beta = 0.5 * (beta + lo);
            }
        }
        p
    });
    rows.concat()
}

fn squared_distances(x: &[Vec<f64>]) -> Vec<f64> {
    let n = x.len();
    par::map_range(n, |i| (0..n).map(|j| x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)).sum()).collect::<Vec<f64>>())
        .concat()
}

/// Exact t-SNE into two dimensions.
pub fn tsne(features: &[Vec<f64>], cfg: &TsneConfig) -> Result<Embedding2D> {
    let n = features.len();
    if n < 4 {
        return Err(Error::Data(format!("t-SNE needs ≥ 4 points, got {n}")));
    }
    if !(cfg.perplexity > 0.0 && cfg.perplexity < (n as f64 - 1.0) / 3.0) {
        return Err(Error::Parameter(format!(
            "perplexity {} infeasible for {n} points (must be in (0, {:.3}))",
            cfg.perplexity,
            (n as f64 - 1.0) / 3.0
        )));
    }
    let d = features[0].len();
    if features.iter().any(|r| r.len() != d || r.iter().any(|v| !v.is_finite())) {
        return Err(Error::Data("t-SNE features must be finite rows of equal length".into()));
    }

    let cond = conditional_affinities(&squared_distances(features), n, cfg.perplexity);
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = ((cond[i * n + j] + cond[j * n + i]) / (2.0 * n as f64)).max(1e-12);
        }
        p[i * n + i] = 0.0;
    }

    let mut rng = seed::rng(cfg.seed);
    let mut y: Vec<[f64; 2]> =
        (0..n).map(|_| [1e-4 * rng.sample::<f64, _>(StandardNormal), 1e-4 * rng.sample::<f64, _>(StandardNormal)]).collect();
    let mut update = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let mut kl_history = Vec::with_capacity(cfg.iterations);

    for it in 0..cfg.iterations {
        let exaggerate = it < cfg.exaggeration_iters;
        let ex = if exaggerate { cfg.early_exaggeration } else { 1.0 };
        let momentum = if exaggerate { cfg.initial_momentum } else { cfg.final_momentum };
        let lr = if exaggerate { cfg.learning_rate } else { cfg.learning_rate * cfg.lr_decay.powi((it - cfg.exaggeration_iters) as i32) };

        // Student-t kernel w_ij = 1 / (1 + ‖y_i − y_j‖²).
        let w: Vec<f64> = par::map_range(n, |i| {
            (0..n)
                .map(|j| if i == j { 0.0 } else { 1.0 / (1.0 + (y[i][0] - y[j][0]).powi(2) + (y[i][1] - y[j][1]).powi(2)) })
                .collect::<Vec<f64>>()
        })
        .concat();
        let z: f64 = w.iter().sum();
        let grad: Vec<[f64; 2]> = par::map_range(n, |i| {
            let mut g = [0.0; 2];
            for j in 0..n {
                let wij = w[i * n + j];
                let m = (ex * p[i * n + j] - wij / z) * wij;
                g[0] += 4.0 * m * (y[i][0] - y[j][0]);
                g[1] += 4.0 * m * (y[i][1] - y[j][1]);
            }
            g
        });
        for i in 0..n {
            for k in 0..2 {
                let same_sign = (grad[i][k] > 0.0) == (update[i][k] > 0.0);
                gains[i][k] = if same_sign { (gains[i][k] * 0.8).max(0.01) } else { gains[i][k] + 0.2 };
                update[i][k] = momentum * update[i][k] - lr * gains[i][k] * grad[i][k];
                y[i][k] += update[i][k];
            }
        }
        let mean = y.iter().fold([0.0; 2], |a, v| [a[0] + v[0] / n as f64, a[1] + v[1] / n as f64]);
        y.iter_mut().for_each(|v| *v = [v[0] - mean[0], v[1] - mean[1]]);
        kl_history.push(kl_divergence(&p, &y));
        if y.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
            return Err(Error::NumericalAbort(format!("t-SNE diverged at iteration {it}")));
        }
    }
    Ok(Embedding2D { points: y, kl_history })
}

/// `KL(P‖Q)` for joint affinities `p` and the embedding `y`.
pub fn kl_divergence(p: &[f64], y: &[[f64; 2]]) -> f64 {
    let n = y.len();
    let w: Vec<f64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            if i == j { 0.0 } else { 1.0 / (1.0 + (y[i][0] - y[j][0]).powi(2) + (y[i][1] - y[j][1]).powi(2)) }
        })
        .collect();
    let z: f64 = w.iter().sum();
    p.iter()
        .zip(&w)
        .enumerate()
        .filter(|(k, (pv, _))| k / n != k % n && **pv > 0.0)
        .map(|(_, (pv, wv))| pv * (pv / (wv / z).max(1e-300)).ln())
        .sum()
}
