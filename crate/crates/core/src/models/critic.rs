use crate::autodiff::{bias_add, conv2d, leaky_relu, linear, reshape, ConvGeometry, Real, Tensor};
use crate::error::{Error, Result};
use crate::seed;

use super::{Cursor, Init, Network, ParamSet};

pub const LEAKY_SLOPE: f64 = 0.2;
const DOWN4: ConvGeometry = ConvGeometry { stride: 2, pad: 1 };

#[derive(Clone, Debug, PartialEq)]
pub struct CriticConfig {
    pub image_size: usize,
    /// Width of the first convolution; each later layer doubles it.
    pub base_channels: usize,
    pub layers: usize,
}

impl Default for CriticConfig {
    fn default() -> Self {
        CriticConfig { image_size: 64, base_channels: 32, layers: 3 }
    }
}

impl CriticConfig {
    pub fn full() -> Self {
        CriticConfig { image_size: 256, base_channels: 64, layers: 4 }
    }

    pub fn validate(&self) -> Result<()> {
        let div = 1usize << self.layers;
        if self.layers == 0 || self.base_channels == 0 || self.image_size % div != 0 || self.image_size < div {
            return Err(Error::Validation(format!(
                "critic with {} layers needs an image size divisible by {div}, got {}",
                self.layers, self.image_size
            )));
        }
        Ok(())
    }

    fn widths(&self) -> Vec<usize> {
        (0..self.layers).map(|i| self.base_channels << i).collect()
    }

    fn flat_dim(&self) -> usize {
        let s = self.image_size >> self.layers;
        self.widths()[self.layers - 1] * s * s
    }
}

/// Stride-2 4×4 convolutions with leaky ReLU and a linear score head.
#[derive(Clone, Debug, PartialEq)]
pub struct Critic {
    config: CriticConfig,
    params: ParamSet,
}

impl Critic {
    pub fn new(config: CriticConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = seed::rng(seed);
        let mut init = Init::new(&mut rng);
        let mut prev = 1;
        for (i, &c) in config.widths().iter().enumerate() {
            init.conv(&format!("conv{i}"), c, prev, 4, 1.0)?;
            prev = c;
        }
        init.linear("fc", 1, config.flat_dim())?;
        Ok(Critic { config, params: init.finish() })
    }

    pub fn from_params(params: ParamSet) -> Result<Self> {
        let layers = (0..).take_while(|i| params.get(&format!("conv{i}.w")).is_some()).count();
        if layers == 0 {
            return Err(Error::Validation("critic: no convolution parameters".into()));
        }
        let base_channels = params.shape_of("conv0.w")?[0];
        let last = params.shape_of(&format!("conv{}.w", layers - 1))?[0];
        let flat = params.shape_of("fc.w")?[1];
        let side = ((flat / last.max(1)) as f64).sqrt().round() as usize;
        let config = CriticConfig { image_size: side << layers, base_channels, layers };
        let reference = Critic::new(config.clone(), 0)?;
        params.check_layout(&reference.params, "critic")?;
        Ok(Critic { config, params })
    }

    pub fn config(&self) -> &CriticConfig {
        &self.config
    }

    /// `[N, 1, S, S] → [N]` unbounded scores.
    pub fn forward<T: Real>(&self, weights: &[Tensor<T>], x: &Tensor<T>) -> Result<Tensor<T>> {
        let mut w = Cursor::new(weights, self.params.len(), "critic")?;
        let s = self.config.image_size;
        if x.rank() != 4 || x.shape()[1..] != [1, s, s] {
            return Err(Error::shape("critic_forward", format!("expected [N, 1, {s}, {s}], got {:?}", x.shape())));
        }
        let n = x.shape()[0];
        let mut h = x.clone();
        for _ in 0..self.config.layers {
            let (cw, cb) = w.pair();
            h = leaky_relu(&bias_add(&conv2d(&h, cw, DOWN4)?, cb)?, T::lit(LEAKY_SLOPE));
        }
        let (fw, fb) = w.pair();
        let score = linear(&reshape(&h, &[n, self.config.flat_dim()])?, fw, fb)?;
        reshape(&score, &[n])
    }

    /// Names of the convolution and linear weight matrices (biases excluded).
    pub fn weight_names(&self) -> Vec<String> {
        self.params.iter().filter(|p| p.name.ends_with(".w")).map(|p| p.name.clone()).collect()
    }
}

impl Network for Critic {
    fn params(&self) -> &ParamSet {
        &self.params
    }

    fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }
}
