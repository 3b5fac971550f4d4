use crate::autodiff::{bias_add, conv2d, linear, maxpool2x2, relu, reshape, sigmoid, upsample2x, ConvGeometry, Real, Tensor};
use crate::error::{Error, Result};
use crate::render::Image;
use crate::seed;

use super::{batched, Cursor, Init, Network, ParamSet};

#[derive(Clone, Debug, PartialEq)]
pub struct AutoencoderConfig {
    pub image_size: usize,
    /// Output channels of the four encoder blocks; the last is the code width.
    pub channels: [usize; 4],
    pub feature_dim: usize,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        AutoencoderConfig { image_size: 64, channels: [16, 32, 64, 32], feature_dim: 1024 }
    }
}

impl AutoencoderConfig {
    pub fn full() -> Self {
        AutoencoderConfig { image_size: 256, channels: [16, 32, 64, 64], feature_dim: 1024 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.image_size < 16 || self.image_size % 16 != 0 {
            return Err(Error::Validation(format!("autoencoder image size must be a multiple of 16, got {}", self.image_size)));
        }
        if self.channels.contains(&0) || self.feature_dim == 0 {
            return Err(Error::Validation("autoencoder widths must be positive".into()));
        }
        Ok(())
    }

    fn bottleneck(&self) -> usize {
        let s = self.image_size / 16;
        self.channels[3] * s * s
    }
}

/// Four conv/ReLU/max-pool blocks and a linear map to φ; the decoder mirrors
/// them with nearest upsampling and ends in a sigmoid.
#[derive(Clone, Debug, PartialEq)]
pub struct Autoencoder {
    config: AutoencoderConfig,
    params: ParamSet,
}

const SAME3: ConvGeometry = ConvGeometry { stride: 1, pad: 1 };

impl Autoencoder {
    pub fn new(config: AutoencoderConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = seed::rng(seed);
        let mut init = Init::new(&mut rng);
        let mut prev = 1;
        for (i, &c) in config.channels.iter().enumerate() {
            init.conv(&format!("enc.conv{i}"), c, prev, 3, 1.0)?;
            prev = c;
        }
        init.linear("enc.fc", config.feature_dim, config.bottleneck())?;
        init.linear("dec.fc", config.bottleneck(), config.feature_dim)?;
        let outs = [config.channels[2], config.channels[1], config.channels[0], 1];
        for (i, &c) in outs.iter().enumerate() {
            init.conv(&format!("dec.conv{i}"), c, prev, 3, 1.0)?;
            prev = c;
        }
        Ok(Autoencoder { config, params: init.finish() })
    }

    /// Rebuilds a model from stored parameters, inferring the configuration
    /// from their shapes.
    pub fn from_params(params: ParamSet) -> Result<Self> {
        let mut channels = [0; 4];
        for (i, c) in channels.iter_mut().enumerate() {
            *c = params.shape_of(&format!("enc.conv{i}.w"))?[0];
        }
        let fc = params.shape_of("enc.fc.w")?;
        let (feature_dim, bottleneck) = (fc[0], fc[1]);
        let cells = bottleneck / channels[3].max(1);
        let side = (cells as f64).sqrt().round() as usize;
        if side * side * channels[3] != bottleneck {
            return Err(Error::Validation(format!("autoencoder: enc.fc input {bottleneck} is not C·s² for C = {}", channels[3])));
        }
        let config = AutoencoderConfig { image_size: side * 16, channels, feature_dim };
        let reference = Autoencoder::new(config.clone(), 0)?;
        params.check_layout(&reference.params, "autoencoder")?;
        Ok(Autoencoder { config, params })
    }

    pub fn config(&self) -> &AutoencoderConfig {
        &self.config
    }

    fn n_encoder(&self) -> usize {
        10
    }

    /// `[N, 1, S, S] → [N, feature_dim]`. Accepts either the full weight list
    /// or just the encoder prefix.
    pub fn encode<T: Real>(&self, weights: &[Tensor<T>], x: &Tensor<T>) -> Result<Tensor<T>> {
        let enc = &weights[..self.n_encoder().min(weights.len())];
        let mut w = Cursor::new(enc, self.n_encoder(), "autoencoder encoder")?;
        let s = self.config.image_size;
        if x.rank() != 4 || x.shape()[1..] != [1, s, s] {
            return Err(Error::shape("ae_encode", format!("expected [N, 1, {s}, {s}], got {:?}", x.shape())));
        }
        let mut h = x.clone();
        for _ in 0..4 {
            let (cw, cb) = w.pair();
            h = maxpool2x2(&relu(&bias_add(&conv2d(&h, cw, SAME3)?, cb)?))?;
        }
        let n = x.shape()[0];
        let flat = reshape(&h, &[n, self.config.bottleneck()])?;
        let (fw, fb) = w.pair();
        linear(&flat, fw, fb)
    }

    /// `[N, feature_dim] → [N, 1, S, S]` in `(0, 1)`.
    pub fn decode<T: Real>(&self, weights: &[Tensor<T>], phi: &Tensor<T>) -> Result<Tensor<T>> {
        let mut w = Cursor::new(weights, self.params.len(), "autoencoder")?;
        for _ in 0..self.n_encoder() / 2 {
            w.pair();
        }
        if phi.rank() != 2 || phi.shape()[1] != self.config.feature_dim {
            return Err(Error::shape("ae_decode", format!("expected [N, {}], got {:?}", self.config.feature_dim, phi.shape())));
        }
        let n = phi.shape()[0];
        let s = self.config.image_size / 16;
        let (fw, fb) = w.pair();
        let mut h = reshape(&relu(&linear(phi, fw, fb)?), &[n, self.config.channels[3], s, s])?;
        for i in 0..4 {
            let (cw, cb) = w.pair();
            let z = bias_add(&conv2d(&upsample2x(&h)?, cw, SAME3)?, cb)?;
            h = if i == 3 { sigmoid(&z) } else { relu(&z) };
        }
        Ok(h)
    }

    pub fn reconstruct<T: Real>(&self, weights: &[Tensor<T>], x: &Tensor<T>) -> Result<Tensor<T>> {
        self.decode(weights, &self.encode(weights, x)?)
    }

    /// φ for every image, computed in `f32` batches without gradients.
    pub fn features(&self, images: &[&Image]) -> Result<Vec<Vec<f64>>> {
        let w = self.weights::<f32>()?;
        let d = self.config.feature_dim;
        batched(images, 16, |x| {
            let f = self.encode(&w, x)?;
            Ok(f.data().chunks(d).map(|r| r.iter().map(|&v| v as f64).collect()).collect())
        })
    }
}

impl Network for Autoencoder {
    fn params(&self) -> &ParamSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }
}
