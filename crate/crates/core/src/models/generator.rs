use crate::autodiff::{add, bias_add, conv2d, relu, sigmoid, upsample2x, ConvGeometry, Real, Tensor};
use crate::error::{Error, Result};
use crate::render::Image;
use crate::seed;

use super::{batched, tensor_to_images, Cursor, Init, Network, ParamSet};

/// Scale of the final convolution at initialisation.
pub const OUTPUT_INIT_GAIN: f64 = 0.1;
/// Input clamp applied before the logit skip.
const LOGIT_CLAMP: f64 = 0.005;

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    /// Width of the full-resolution stages; the downsampled trunk uses twice this.
    pub base_channels: usize,
    pub residual_blocks: usize,
    pub stem_kernel: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig { base_channels: 16, residual_blocks: 4, stem_kernel: 7 }
    }
}

impl GeneratorConfig {
    pub fn full() -> Self {
        GeneratorConfig { residual_blocks: 6, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_channels == 0 || self.stem_kernel % 2 == 0 {
            return Err(Error::Validation("generator needs positive width and an odd stem kernel".into()));
        }
        Ok(())
    }
}

/// Render-to-image refiner: a stem convolution, two stride-2 downsampling
/// convolutions, a residual trunk, two upsample+conv stages with an additive
/// skip from the stem, and a final convolution whose output is added to the
/// logit of the input before the sigmoid. The network therefore predicts a
/// correction to the render, which keeps target placement tied to the input.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    config: GeneratorConfig,
    params: ParamSet,
}

impl Generator {
    pub fn new(config: GeneratorConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let b = config.base_channels;
        let mut rng = seed::rng(seed);
        let mut init = Init::new(&mut rng);
        init.conv("stem", b, 1, config.stem_kernel, 1.0)?;
        init.conv("down0", 2 * b, b, 3, 1.0)?;
        init.conv("down1", 2 * b, 2 * b, 3, 1.0)?;
        for r in 0..config.residual_blocks {
            init.conv(&format!("res{r}.conv0"), 2 * b, 2 * b, 3, 1.0)?;
            init.conv(&format!("res{r}.conv1"), 2 * b, 2 * b, 3, 1.0)?;
        }
        init.conv("up0", b, 2 * b, 3, 1.0)?;
        init.conv("up1", b, b, 3, 1.0)?;
        init.conv("out", 1, b, 3, OUTPUT_INIT_GAIN)?;
        Ok(Generator { config, params: init.finish() })
    }

    pub fn from_params(params: ParamSet) -> Result<Self> {
        let stem = params.shape_of("stem.w")?;
        let (base_channels, stem_kernel) = (stem[0], stem[2]);
        let residual_blocks = (0..).take_while(|r| params.get(&format!("res{r}.conv0.w")).is_some()).count();
        let config = GeneratorConfig { base_channels, residual_blocks, stem_kernel };
        let reference = Generator::new(config.clone(), 0)?;
        params.check_layout(&reference.params, "generator")?;
        Ok(Generator { config, params })
    }

    pub fn config(&self) -> &GeneratorConfig {
        &self.config
    }

    /// `[N, 1, H, W] → [N, 1, H, W]` in `(0, 1)`; H and W must be multiples of 4.
    /// The input enters the logit skip as a constant.
    pub fn forward<T: Real>(&self, weights: &[Tensor<T>], x: &Tensor<T>) -> Result<Tensor<T>> {
        let mut w = Cursor::new(weights, self.params.len(), "generator")?;
        let s = x.shape();
        if s.len() != 4 || s[1] != 1 || s[2] % 4 != 0 || s[3] % 4 != 0 || s[2] == 0 || s[3] == 0 {
            return Err(Error::shape("generator_forward", format!("expected [N, 1, 4a, 4b], got {s:?}")));
        }
        let conv = |h: &Tensor<T>, (cw, cb): (&Tensor<T>, &Tensor<T>), stride: usize| -> Result<Tensor<T>> {
            let pad = cw.shape()[2] / 2;
            bias_add(&conv2d(h, cw, ConvGeometry { stride, pad })?, cb)
        };
        let stem = relu(&conv(x, w.pair(), 1)?);
        let mut h = relu(&conv(&stem, w.pair(), 2)?);
        h = relu(&conv(&h, w.pair(), 2)?);
        for _ in 0..self.config.residual_blocks {
            let r = relu(&conv(&h, w.pair(), 1)?);
            h = add(&h, &conv(&r, w.pair(), 1)?)?;
        }
        h = relu(&conv(&upsample2x(&h)?, w.pair(), 1)?);
        h = relu(&conv(&upsample2x(&h)?, w.pair(), 1)?);
        h = add(&h, &stem)?;
        let delta = conv(&h, w.pair(), 1)?;
        let lo = T::lit(LOGIT_CLAMP);
        let hi = T::lit(1.0 - LOGIT_CLAMP);
        let skip = x.detach().map_values(|v| {
            let v = v.max(lo).min(hi);
            (v / (T::one() - v)).ln()
        });
        Ok(sigmoid(&add(&delta, &skip)?))
    }

    /// Refines each image, batched and without gradients.
    pub fn refine(&self, images: &[&Image]) -> Result<Vec<Image>> {
        let w = self.weights::<f32>()?;
        batched(images, 8, |x| tensor_to_images(&self.forward(&w, x)?))
    }
}

impl Network for Generator {
    fn params(&self) -> &ParamSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_parameter_count() {
        let g = Generator::new(GeneratorConfig::default(), 0).unwrap();
        let conv = |o: usize, i: usize, k: usize| o * i * k * k + o;
        let expected = conv(16, 1, 7) + conv(32, 16, 3) + conv(32, 32, 3) + 8 * conv(32, 32, 3) + conv(16, 32, 3) + conv(16, 16, 3) + conv(1, 16, 3);
        assert_eq!(g.params().num_scalars(), expected);
        assert_eq!(expected, 95_761);
    }

    #[test]
    fn config_round_trips_through_params() {
        let cfg = GeneratorConfig { base_channels: 4, residual_blocks: 2, stem_kernel: 5 };
        let g = Generator::new(cfg.clone(), 1).unwrap();
        assert_eq!(Generator::from_params(g.params().clone()).unwrap().config(), &cfg);
    }

    #[test]
    fn rejects_sizes_not_divisible_by_four() {
        let g = Generator::new(GeneratorConfig { base_channels: 2, residual_blocks: 1, stem_kernel: 3 }, 0).unwrap();
        let x = Tensor::<f32>::zeros(&[1, 1, 18, 18]);
        assert!(g.forward(&g.weights().unwrap(), &x).is_err());
    }
}
