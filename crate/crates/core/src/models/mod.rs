//! Networks: the convolutional autoencoder whose code vector φ is both the
//! content-preservation signal and the evaluation feature space, the refiner
//! generator, the Wasserstein critic, and the latent-noise baseline generator.
//!
//! Weights live in a [`ParamSet`] of named `f32` buffers. Forward passes take
//! the weights as a slice of tensors in declaration order, so the same model
//! runs untracked for inference, tracked for training, and in `f64` for
//! gradient checks.

mod autoencoder;
mod baseline;
mod critic;
mod generator;

pub use autoencoder::{Autoencoder, AutoencoderConfig};
pub use baseline::{BaselineConfig, BaselineGenerator};
pub use critic::{Critic, CriticConfig};
pub use generator::{Generator, GeneratorConfig};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{no_grad, Real, Tensor};
use crate::error::{Error, Result};
use crate::render::Image;

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

/// Ordered collection of named parameters.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamSet {
    params: Vec<Param>,
}

impl ParamSet {
    pub fn new() -> Self {
        ParamSet::default()
    }

    pub fn push(&mut self, name: impl Into<String>, shape: &[usize], data: Vec<f32>) -> Result<()> {
        let name = name.into();
        if shape.iter().product::<usize>() != data.len() {
            return Err(Error::shape("ParamSet::push", format!("{name}: {shape:?} vs {} values", data.len())));
        }
        if self.params.iter().any(|p| p.name == name) {
            return Err(Error::Validation(format!("duplicate parameter name {name}")));
        }
        self.params.push(Param { name, shape: shape.to_vec(), data });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Param> {
        self.params.iter()
    }

    pub fn iter_mut(&mut self) -> std::slice::IterMut<'_, Param> {
        self.params.iter_mut()
    }

    pub fn get(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }

    pub(crate) fn shape_of(&self, name: &str) -> Result<&[usize]> {
        self.get(name)
            .map(|p| p.shape.as_slice())
            .ok_or_else(|| Error::Validation(format!("missing parameter {name}")))
    }

    /// Total number of scalars.
    pub fn num_scalars(&self) -> usize {
        self.params.iter().map(|p| p.data.len()).sum()
    }

    /// Weights as tensors; `tracked` makes them differentiable leaves.
    pub fn tensors<T: Real>(&self, tracked: bool) -> Result<Vec<Tensor<T>>> {
        self.params
            .iter()
            .map(|p| {
                let data = p.data.iter().map(|&v| T::lit(v as f64)).collect();
                if tracked { Tensor::param(&p.shape, data) } else { Tensor::constant(&p.shape, data) }
            })
            .collect()
    }

    /// Flat buffers in declaration order, for the optimiser.
    pub fn buffers(&self) -> Vec<Vec<f32>> {
        self.params.iter().map(|p| p.data.clone()).collect()
    }

    pub fn set_buffers(&mut self, buffers: Vec<Vec<f32>>) -> Result<()> {
        if buffers.len() != self.params.len() {
            return Err(Error::shape("ParamSet::set_buffers", format!("{} buffers for {} params", buffers.len(), self.params.len())));
        }
        for (p, b) in self.params.iter_mut().zip(buffers) {
            if b.len() != p.data.len() {
                return Err(Error::shape("ParamSet::set_buffers", format!("{}: {} values for {:?}", p.name, b.len(), p.shape)));
            }
            p.data = b;
        }
        Ok(())
    }

    pub fn all_finite(&self) -> bool {
        self.params.iter().all(|p| p.data.iter().all(|v| v.is_finite()))
    }

    /// Layout check against a freshly initialised reference.
    pub(crate) fn check_layout(&self, reference: &ParamSet, model: &str) -> Result<()> {
        if self.len() != reference.len() {
            return Err(Error::Validation(format!("{model}: expected {} parameters, found {}", reference.len(), self.len())));
        }
        for (a, b) in self.iter().zip(reference.iter()) {
            if a.name != b.name || a.shape != b.shape {
                return Err(Error::Validation(format!(
                    "{model}: parameter {} {:?} does not match expected {} {:?}",
                    a.name, a.shape, b.name, b.shape
                )));
            }
        }
        Ok(())
    }
}

/// Common access to a network's parameters.
pub trait Network {
    fn params(&self) -> &ParamSet;
    fn params_mut(&mut self) -> &mut ParamSet;

    fn weights<T: Real>(&self) -> Result<Vec<Tensor<T>>> {
        self.params().tensors(false)
    }
}

/// Glorot-uniform weights, zero biases.
pub(crate) struct Init<'a> {
    set: ParamSet,
    rng: &'a mut ChaCha8Rng,
}

impl<'a> Init<'a> {
    pub fn new(rng: &'a mut ChaCha8Rng) -> Self {
        Init { set: ParamSet::new(), rng }
    }

    fn uniform(&mut self, n: usize, limit: f64) -> Vec<f32> {
        (0..n).map(|_| self.rng.random_range(-limit..limit) as f32).collect()
    }

    pub fn conv(&mut self, name: &str, out_c: usize, in_c: usize, k: usize, gain: f64) -> Result<()> {
        let limit = gain * (6.0 / ((in_c + out_c) * k * k) as f64).sqrt();
        let w = self.uniform(out_c * in_c * k * k, limit);
        self.set.push(format!("{name}.w"), &[out_c, in_c, k, k], w)?;
        self.set.push(format!("{name}.b"), &[out_c], vec![0.0; out_c])
    }

    pub fn linear(&mut self, name: &str, out_f: usize, in_f: usize) -> Result<()> {
        let limit = (6.0 / (in_f + out_f) as f64).sqrt();
        let w = self.uniform(out_f * in_f, limit);
        self.set.push(format!("{name}.w"), &[out_f, in_f], w)?;
        self.set.push(format!("{name}.b"), &[out_f], vec![0.0; out_f])
    }

    pub fn finish(self) -> ParamSet {
        self.set
    }
}

/// Sequential reader over weights in declaration order.
pub(crate) struct Cursor<'a, T: Real> {
    weights: &'a [Tensor<T>],
    pos: usize,
}

impl<'a, T: Real> Cursor<'a, T> {
    pub fn new(weights: &'a [Tensor<T>], expected: usize, model: &str) -> Result<Self> {
        if weights.len() != expected {
            return Err(Error::shape("forward", format!("{model} expects {expected} weight tensors, got {}", weights.len())));
        }
        Ok(Cursor { weights, pos: 0 })
    }

    pub fn pair(&mut self) -> (&'a Tensor<T>, &'a Tensor<T>) {
        let p = (&self.weights[self.pos], &self.weights[self.pos + 1]);
        self.pos += 2;
        p
    }
}

/// Stacks single-channel images into `[N, 1, H, W]`.
pub fn images_to_tensor<T: Real>(images: &[&Image]) -> Result<Tensor<T>> {
    let first = images.first().ok_or_else(|| Error::Data("empty image batch".into()))?;
    let (w, h) = (first.width(), first.height());
    let mut data = Vec::with_capacity(images.len() * w * h);
    for img in images {
        if (img.width(), img.height()) != (w, h) {
            return Err(Error::shape(
                "images_to_tensor",
                format!("mixed sizes {}x{} and {}x{}", w, h, img.width(), img.height()),
            ));
        }
        data.extend(img.pixels().iter().map(|&v| T::lit(v)));
    }
    Tensor::constant(&[images.len(), 1, h, w], data)
}

/// Splits `[N, 1, H, W]` into images, clamping into `[0, 1]`.
pub fn tensor_to_images<T: Real>(t: &Tensor<T>) -> Result<Vec<Image>> {
    let &[n, 1, h, w] = t.shape() else {
        return Err(Error::shape("tensor_to_images", format!("expected [N, 1, H, W], got {:?}", t.shape())));
    };
    (0..n)
        .map(|i| {
            let px = t.data()[i * h * w..(i + 1) * h * w].iter().map(|v| v.as_f64().clamp(0.0, 1.0)).collect();
            Image::new(w, h, px)
        })
        .collect()
}

/// Runs `f` over `images` in chunks of `batch` without recording gradients.
pub(crate) fn batched<R>(
    images: &[&Image],
    batch: usize,
    mut f: impl FnMut(&Tensor<f32>) -> Result<Vec<R>>,
) -> Result<Vec<R>> {
    no_grad(|| {
        let mut out = Vec::with_capacity(images.len());
        for chunk in images.chunks(batch.max(1)) {
            out.extend(f(&images_to_tensor(chunk)?)?);
        }
        Ok(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_names_and_bad_shapes_are_rejected() {
        let mut p = ParamSet::new();
        p.push("a", &[2], vec![1.0, 2.0]).unwrap();
        assert!(p.push("a", &[1], vec![0.0]).is_err());
        assert!(p.push("b", &[3], vec![0.0]).is_err());
        assert_eq!(p.num_scalars(), 2);
    }

    #[test]
    fn image_tensor_round_trip() {
        let a = Image::new(2, 2, vec![0.0, 0.25, 0.5, 1.0]).unwrap();
        let t = images_to_tensor::<f32>(&[&a, &a]).unwrap();
        assert_eq!(t.shape(), &[2, 1, 2, 2]);
        let back = tensor_to_images(&t).unwrap();
        assert_eq!(back[1], a);
    }
}
