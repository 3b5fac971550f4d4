use super::Real;
use crate::error::{Error, Result};

/// Adam hyper-parameters. The defaults are the GAN-training choice
/// (β₁ = 0.5, β₂ = 0.9) with learning rate 0.001.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 1e-3, beta1: 0.5, beta2: 0.9, eps: 1e-8 }
    }
}

/// First/second moment estimates and the step counter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T> {
    pub m: Vec<Vec<T>>,
    pub v: Vec<Vec<T>>,
    pub t: u64,
}

impl<T: Real> AdamState<T> {
    /// Zeroed moments matching `params`, `t = 0`.
    pub fn new(params: &[Vec<T>]) -> Self {
        let zeros: Vec<Vec<T>> = params.iter().map(|p| vec![T::zero(); p.len()]).collect();
        AdamState { m: zeros.clone(), v: zeros, t: 0 }
    }
}

/// One bias-corrected Adam update of every parameter buffer.
pub fn adam_step<T: Real>(
    params: &mut [Vec<T>],
    grads: &[Vec<T>],
    state: &mut AdamState<T>,
    cfg: &AdamConfig,
) -> Result<()> {
    let shapes_ok = params.len() == grads.len()
        && params.len() == state.m.len()
        && params.iter().zip(grads).all(|(p, g)| p.len() == g.len())
        && params.iter().zip(&state.m).all(|(p, m)| p.len() == m.len());
    if !shapes_ok {
        return Err(Error::shape("adam_step", "parameter, gradient and state buffers differ in length"));
    }
    state.t += 1;
    let t = state.t as i32;
    let (b1, b2) = (cfg.beta1, cfg.beta2);
    let step = cfg.lr / (1.0 - b1.powi(t));
    let v_corr = 1.0 / (1.0 - b2.powi(t));
    let (b1t, b2t, eps) = (T::lit(b1), T::lit(b2), T::lit(cfg.eps));
    let (step, v_corr) = (T::lit(step), T::lit(v_corr));
    for (((p, g), m), v) in params.iter_mut().zip(grads).zip(&mut state.m).zip(&mut state.v) {
        for i in 0..p.len() {
            m[i] = b1t * m[i] + (T::one() - b1t) * g[i];
            v[i] = b2t * v[i] + (T::one() - b2t) * g[i] * g[i];
            p[i] -= step * m[i] / ((v[i] * v_corr).sqrt() + eps);
        }
    }
    Ok(())
}
