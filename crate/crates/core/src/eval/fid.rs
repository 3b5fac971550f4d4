use crate::error::{Error, Result};
use crate::models::Autoencoder;
use crate::render::Image;

use super::linalg::{matmul_square, psd_sqrt, symmetric_eigen};

/// Gaussian fit of a feature set: mean and unbiased covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureStats {
    pub mean: Vec<f64>,
    /// Row-major `d × d`.
    pub cov: Vec<f64>,
}

impl FeatureStats {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn new(mean: Vec<f64>, cov: Vec<f64>) -> Result<Self> {
        let d = mean.len();
        if cov.len() != d * d {
            return Err(Error::shape("FeatureStats", format!("mean of length {d} with {} covariance entries", cov.len())));
        }
        Ok(FeatureStats { mean, cov })
    }

    /// Sample mean and unbiased covariance of `rows`.
    pub fn from_features(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::Data(format!("feature statistics need ≥ 2 samples, got {}", rows.len())));
        }
        let d = rows[0].len();
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::shape("feature_stats", format!("rows of length {d} and {}", r.len())));
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        // Centred data matrix X (n × d); cov = XᵀX / (n − 1).
        let mut x = Vec::with_capacity(rows.len() * d);
        for r in rows {
            x.extend(r.iter().zip(&mean).map(|(v, m)| v - m));
        }
        let mut cov = vec![0.0; d * d];
        unsafe {
            matrixmultiply::dgemm(
                d,
                rows.len(),
                d,
                1.0 / (n - 1.0),
                x.as_ptr(),
                1,
                d as isize,
                x.as_ptr(),
                d as isize,
                1,
                0.0,
                cov.as_mut_ptr(),
                d as isize,
                1,
            );
        }
        for i in 0..d {
            for j in 0..i {
                let v = 0.5 * (cov[i * d + j] + cov[j * d + i]);
                cov[i * d + j] = v;
                cov[j * d + i] = v;
            }
        }
        Ok(FeatureStats { mean, cov })
    }

    fn check(&self) -> Result<()> {
        if self.mean.iter().chain(&self.cov).any(|v| !v.is_finite()) {
            return Err(Error::Data("feature statistics contain non-finite values".into()));
        }
        Ok(())
    }
}

/// Autoencoder-feature statistics of an image set.
pub fn feature_stats(images: &[&Image], phi: &Autoencoder) -> Result<FeatureStats> {
    if images.len() < 2 {
        return Err(Error::Data(format!("feature statistics need ≥ 2 images, got {}", images.len())));
    }
    FeatureStats::from_features(&phi.features(images)?)
}

/// Fréchet distance between the Gaussian fits:
/// `‖μa − μb‖² + Tr(Ca + Cb − 2 (Cb^{1/2} Ca Cb^{1/2})^{1/2})`, clamped at 0.
pub fn fid(a: &FeatureStats, b: &FeatureStats) -> Result<f64> {
    let d = a.dim();
    if b.dim() != d || a.cov.len() != d * d || b.cov.len() != d * d {
        return Err(Error::shape("fid", format!("dimensions {} and {}", a.dim(), b.dim())));
    }
    a.check()?;
    b.check()?;
    let mean_term: f64 = a.mean.iter().zip(&b.mean).map(|(x, y)| (x - y).powi(2)).sum();
    let trace = |m: &[f64]| (0..d).map(|i| m[i * d + i]).sum::<f64>();
    let sb = psd_sqrt(&b.cov, d)?;
    let inner = matmul_square(&matmul_square(&sb, &a.cov, d), &sb, d);
    let cross: f64 = symmetric_eigen(&inner, d, false)?.values.iter().map(|l| l.max(0.0).sqrt()).sum();
    let value = mean_term + trace(&a.cov) + trace(&b.cov) - 2.0 * cross;
    Ok(value.max(0.0))
}
