//! Pseudo-real degradation: anisotropic blur, multiplicative speckle and a
//! contrast curve.

use rand::Rng;
use rand_distr::Gamma;

use crate::error::{Error, Result};
use crate::render::Image;
use crate::seed;

#[derive(Clone, Debug, PartialEq)]
pub struct DegradeConfig {
    /// Number of looks L; speckle is the mean of L unit-mean exponentials.
    pub speckle_looks: u32,
    /// Gaussian blur std in pixels along the track (image rows direction, y).
    pub blur_sigma_along: f64,
    /// Gaussian blur std in pixels across the track (x).
    pub blur_sigma_across: f64,
    pub contrast_gamma: f64,
    pub seed: u64,
}

impl Default for DegradeConfig {
    fn default() -> Self {
        DegradeConfig { speckle_looks: 4, blur_sigma_along: 1.0, blur_sigma_across: 0.5, contrast_gamma: 1.3, seed: 0 }
    }
}

impl DegradeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.speckle_looks == 0 {
            return Err(Error::Validation("speckle_looks must be ≥ 1".into()));
        }
        for (name, v) in [("blur_sigma_along", self.blur_sigma_along), ("blur_sigma_across", self.blur_sigma_across)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("{name} must be finite and ≥ 0, got {v}")));
            }
        }
        if !(self.contrast_gamma > 0.0 && self.contrast_gamma.is_finite()) {
            return Err(Error::Validation(format!("contrast_gamma must be > 0, got {}", self.contrast_gamma)));
        }
        Ok(())
    }
}

/// Normalised Gaussian taps with radius `ceil(3σ)`; σ = 0 is the identity.
fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    if sigma == 0.0 {
        return vec![1.0];
    }
    let r = (3.0 * sigma).ceil() as i64;
    let k: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = k.iter().sum();
    k.into_iter().map(|v| v / s).collect()
}

/// Separable blur with clamp-to-edge borders.
pub fn anisotropic_blur(img: &Image, sigma_along: f64, sigma_across: f64) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let kx = gaussian_kernel(sigma_across);
    let ky = gaussian_kernel(sigma_along);
    let (rx, ry) = ((kx.len() / 2) as i64, (ky.len() / 2) as i64);
    let src = img.pixels();
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            tmp[y * w + x] = kx
                .iter()
                .enumerate()
                .map(|(i, k)| k * src[y * w + (x as i64 + i as i64 - rx).clamp(0, w as i64 - 1) as usize])
                .sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            out[y * w + x] = ky
                .iter()
                .enumerate()
                .map(|(i, k)| k * tmp[(y as i64 + i as i64 - ry).clamp(0, h as i64 - 1) as usize * w + x])
                .sum();
        }
    }
    out
}

/// Blurred, speckled and contrast-adjusted values before the final clamp.
/// `stream` selects the per-image random stream.
pub fn degrade_unclamped(img: &Image, cfg: &DegradeConfig, stream: u64) -> Result<Vec<f64>> {
    cfg.validate()?;
    let looks = cfg.speckle_looks as f64;
    let speckle = Gamma::new(looks, 1.0 / looks).map_err(|e| Error::Validation(e.to_string()))?;
    let mut rng = seed::rng(seed::derive(cfg.seed, stream));
    Ok(anisotropic_blur(img, cfg.blur_sigma_along, cfg.blur_sigma_across)
        .into_iter()
        .map(|v| {
            let s: f64 = rng.sample(speckle);
            (v * s).max(0.0).powf(cfg.contrast_gamma)
        })
        .collect())
}

pub fn degrade(img: &Image, cfg: &DegradeConfig, stream: u64) -> Result<Image> {
    let v = degrade_unclamped(img, cfg, stream)?;
    Image::new(img.width(), img.height(), v.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blur_preserves_constants_and_mass() {
        let img = Image::filled(9, 7, 0.3).unwrap();
        assert!(anisotropic_blur(&img, 1.5, 0.7).iter().all(|v| (v - 0.3).abs() < 1e-12));
        let mut spot = Image::filled(21, 21, 0.0).unwrap();
        spot.set(10, 10, 1.0);
        let b = anisotropic_blur(&spot, 2.0, 1.0);
        assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // Wider along y than across x.
        assert!(b[13 * 21 + 10] > b[10 * 21 + 13]);
    }

    #[test]
    fn kernel_taps_are_normalised() {
        for s in [0.0, 0.3, 1.0, 2.5] {
            assert!((gaussian_kernel(s).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_parameters_fail() {
        let cfg = DegradeConfig { speckle_looks: 0, ..Default::default() };
        assert!(degrade(&Image::filled(4, 4, 0.5).unwrap(), &cfg, 0).is_err());
        let cfg = DegradeConfig { contrast_gamma: 0.0, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
