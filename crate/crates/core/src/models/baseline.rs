use rand::Rng;
use rand_distr::StandardNormal;

use crate::autodiff::{bias_add, conv2d, linear, relu, reshape, sigmoid, upsample2x, ConvGeometry, Real, Tensor};
use crate::error::{Error, Result};
use crate::render::Image;
use crate::seed;

use super::{tensor_to_images, Cursor, Init, Network, ParamSet};

const SAME3: ConvGeometry = ConvGeometry { stride: 1, pad: 1 };

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineConfig {
    pub latent_dim: usize,
    pub image_size: usize,
    /// Width of the initial `S/8 × S/8` feature map.
    pub base_channels: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig { latent_dim: 128, image_size: 64, base_channels: 64 }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.latent_dim == 0 || self.base_channels < 4 || self.image_size < 8 || self.image_size % 8 != 0 {
            return Err(Error::Validation(format!(
                "baseline generator needs latent ≥ 1, width ≥ 4 and size divisible by 8, got {self:?}"
            )));
        }
        Ok(())
    }

    fn widths(&self) -> [usize; 3] {
        let b = self.base_channels;
        [b / 2, b / 4, b / 4]
    }
}

/// Latent-to-image generator: linear projection to an `S/8` feature map and
/// three nearest-upsample + conv stages, ending in a sigmoid.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineGenerator {
    config: BaselineConfig,
    params: ParamSet,
}

impl BaselineGenerator {
    pub fn new(config: BaselineConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let s = config.image_size / 8;
        let mut rng = seed::rng(seed);
        let mut init = Init::new(&mut rng);
        init.linear("fc", config.base_channels * s * s, config.latent_dim)?;
        let mut prev = config.base_channels;
        for (i, &c) in config.widths().iter().enumerate() {
            init.conv(&format!("up{i}"), c, prev, 3, 1.0)?;
            prev = c;
        }
        init.conv("out", 1, prev, 3, 1.0)?;
        Ok(BaselineGenerator { config, params: init.finish() })
    }

    pub fn from_params(params: ParamSet) -> Result<Self> {
        let fc = params.shape_of("fc.w")?;
        let base_channels = params.shape_of("up0.w")?[1];
        let side = ((fc[0] / base_channels.max(1)) as f64).sqrt().round() as usize;
        let config = BaselineConfig { latent_dim: fc[1], image_size: side * 8, base_channels };
        let reference = BaselineGenerator::new(config.clone(), 0)?;
        params.check_layout(&reference.params, "baseline generator")?;
        Ok(BaselineGenerator { config, params })
    }

    pub fn config(&self) -> &BaselineConfig {
        &self.config
    }

    /// Standard normal latent batch `[n, latent_dim]`.
    pub fn sample_latent<T: Real>(&self, n: usize, rng: &mut impl Rng) -> Result<Tensor<T>> {
        let data = (0..n * self.config.latent_dim).map(|_| T::lit(rng.sample::<f64, _>(StandardNormal))).collect();
        Tensor::constant(&[n, self.config.latent_dim], data)
    }

    /// `[N, latent_dim] → [N, 1, S, S]` in `(0, 1)`.
    pub fn forward<T: Real>(&self, weights: &[Tensor<T>], z: &Tensor<T>) -> Result<Tensor<T>> {
        let mut w = Cursor::new(weights, self.params.len(), "baseline generator")?;
        if z.rank() != 2 || z.shape()[1] != self.config.latent_dim {
            return Err(Error::shape("baseline_generate", format!("expected [N, {}], got {:?}", self.config.latent_dim, z.shape())));
        }
        let n = z.shape()[0];
        let s = self.config.image_size / 8;
        let (fw, fb) = w.pair();
        let mut h = reshape(&relu(&linear(z, fw, fb)?), &[n, self.config.base_channels, s, s])?;
        for _ in 0..3 {
            let (cw, cb) = w.pair();
            h = relu(&bias_add(&conv2d(&upsample2x(&h)?, cw, SAME3)?, cb)?);
        }
        let (cw, cb) = w.pair();
        Ok(sigmoid(&bias_add(&conv2d(&h, cw, SAME3)?, cb)?))
    }

    /// Draws `n` images from latents seeded by `seed`.
    pub fn generate(&self, n: usize, seed: u64) -> Result<Vec<Image>> {
        let w = self.weights::<f32>()?;
        let mut rng = seed::rng(seed);
        crate::autodiff::no_grad(|| {
            let mut out = Vec::with_capacity(n);
            for chunk in (0..n).collect::<Vec<_>>().chunks(8) {
                let z = self.sample_latent::<f32>(chunk.len(), &mut rng)?;
                out.extend(tensor_to_images(&self.forward(&w, &z)?)?);
            }
            Ok(out)
        })
    }
}

impl Network for BaselineGenerator {
    fn params(&self) -> &ParamSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }
}
