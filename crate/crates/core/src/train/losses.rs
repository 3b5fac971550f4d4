use crate::autodiff::{
    add_scalar, backward, l2_norm_per_sample, mean, mul, no_grad, row_sum, scale, square, sub, Real, Tensor,
};
use crate::error::{Error, Result};

/// `sqrt(Σ g² + eps)` regulariser for the per-sample gradient norm.
const NORM_EPS: f64 = 1e-12;

/// Scalar critic: `[N, 1, H, W] → [N]`.
pub type CriticFn<'a, T> = dyn Fn(&Tensor<T>) -> Result<Tensor<T>> + 'a;
/// Feature extractor: `[N, 1, H, W] → [N, d]`.
pub type FeatureFn<'a, T> = dyn Fn(&Tensor<T>) -> Result<Tensor<T>> + 'a;

/// Critic objective and its parts. `total` carries the graph for the
/// optimiser; the rest are plain numbers for logging.
pub struct CriticLoss<T: Real> {
    pub total: Tensor<T>,
    pub wasserstein: f64,
    pub gp_term: f64,
    pub mean_grad_norm: f64,
}

/// `mean D(fake) − mean D(real) + λ · mean (‖∇D(x̂)‖ − 1)²`.
///
/// `gp_points` are the x̂ samples; `None` evaluates the penalty at `fake`
/// itself, sharing one critic pass between both terms.
pub fn critic_loss<T: Real>(
    critic: &CriticFn<'_, T>,
    real: &Tensor<T>,
    fake: &Tensor<T>,
    gp_points: Option<&Tensor<T>>,
    lambda_gp: f64,
) -> Result<CriticLoss<T>> {
    if real.shape() != fake.shape() {
        return Err(Error::shape("critic_loss", format!("real {:?} vs fake {:?}", real.shape(), fake.shape())));
    }
    let d_real = mean(&critic(&real.detach())?);
    let (d_fake, points, d_points) = match gp_points {
        None => {
            let leaf = fake.detach_tracked();
            let d = critic(&leaf)?;
            (mean(&d), leaf, d)
        }
        Some(p) => {
            if p.shape() != fake.shape() {
                return Err(Error::shape("critic_loss", format!("penalty points {:?} vs fake {:?}", p.shape(), fake.shape())));
            }
            let leaf = p.detach_tracked();
            let d = critic(&leaf)?;
            (mean(&critic(&fake.detach())?), leaf, d)
        }
    };
    let wasserstein = sub(&d_fake, &d_real)?;
    let (norms, penalty) = if lambda_gp > 0.0 {
        let g = backward(&crate::autodiff::sum(&d_points), std::slice::from_ref(&points), true)?.remove(0);
        let norms = l2_norm_per_sample(&g, T::lit(NORM_EPS))?;
        let penalty = scale(&mean(&square(&add_scalar(&norms, -T::one()))), T::lit(lambda_gp));
        (norms, Some(penalty))
    } else {
        (input_grad_norms(&d_points, &points)?, None)
    };
    let mean_grad_norm = norms.data().iter().map(|v| v.as_f64()).sum::<f64>() / norms.len() as f64;
    let w = wasserstein.item()?.as_f64();
    let (total, gp_term) = match penalty {
        Some(p) => {
            let gp = p.item()?.as_f64();
            (crate::autodiff::add(&wasserstein, &p)?, gp)
        }
        None => (wasserstein, 0.0),
    };
    Ok(CriticLoss { total, wasserstein: w, gp_term, mean_grad_norm })
}

/// Per-sample `‖∂ Σ scores / ∂ x‖` without recording a graph.
fn input_grad_norms<T: Real>(scores: &Tensor<T>, x: &Tensor<T>) -> Result<Tensor<T>> {
    let g = backward(&crate::autodiff::sum(scores), std::slice::from_ref(x), false)?.remove(0);
    no_grad(|| l2_norm_per_sample(&g, T::lit(NORM_EPS)))
}

/// Per-sample gradient norms of `critic` at `x`, for monitoring.
pub fn critic_grad_norms<T: Real>(critic: &CriticFn<'_, T>, x: &Tensor<T>) -> Result<Vec<f64>> {
    let leaf = x.detach_tracked();
    let n = input_grad_norms(&critic(&leaf)?, &leaf)?;
    Ok(n.data().iter().map(|v| v.as_f64()).collect())
}

pub struct GeneratorLoss<T: Real> {
    pub total: Tensor<T>,
    pub adversarial: f64,
    /// `μ_φ · mean ‖φ(p) − φ(G(p))‖²`.
    pub phi_term: f64,
    /// Per-sample `‖φ(p) − φ(G(p))‖`, reported against γ.
    pub phi_dist: Vec<f64>,
}

/// `−mean D(G(p)) + μ_φ · mean ‖φ(p) − φ(G(p))‖²`, with `φ(p)` held fixed.
pub fn generator_loss<T: Real>(
    critic: &CriticFn<'_, T>,
    phi: Option<&FeatureFn<'_, T>>,
    renders: &Tensor<T>,
    generated: &Tensor<T>,
    mu_phi: f64,
) -> Result<GeneratorLoss<T>> {
    if renders.shape() != generated.shape() {
        return Err(Error::shape("generator_loss", format!("renders {:?} vs generated {:?}", renders.shape(), generated.shape())));
    }
    let adv = scale(&mean(&critic(generated)?), -T::one());
    let adversarial = adv.item()?.as_f64();
    let Some(phi) = phi else {
        if mu_phi != 0.0 {
            return Err(Error::Config("feature penalty requested but no trained autoencoder was supplied".into()));
        }
        return Ok(GeneratorLoss { total: adv, adversarial, phi_term: 0.0, phi_dist: Vec::new() });
    };
    let target = no_grad(|| phi(&renders.detach()))?;
    let diff = sub(&phi(generated)?, &target)?;
    let sq = row_sum(&mul(&diff, &diff)?)?;
    let phi_dist = sq.data().iter().map(|v| v.as_f64().max(0.0).sqrt()).collect();
    if mu_phi == 0.0 {
        return Ok(GeneratorLoss { total: adv, adversarial, phi_term: 0.0, phi_dist });
    }
    let pen = scale(&mean(&sq), T::lit(mu_phi));
    let phi_term = pen.item()?.as_f64();
    Ok(GeneratorLoss { total: crate::autodiff::add(&adv, &pen)?, adversarial, phi_term, phi_dist })
}
