//! Optical rendering of sonar-like seafloor scenes and their refinement into
//! SAS-realistic imagery with a render-conditioned Wasserstein GAN.
//!
//! The crate is organised bottom-up:
//!
//! * [`scene`]: declarative seafloor / target / light-array / camera description.
//! * [`render`]: an orthographic ray tracer producing the grayscale render.
//! * [`autodiff`]: a define-by-run reverse-mode engine with grad-of-grad support.
//! * [`models`]: autoencoder, refiner generator, critic and latent baseline generator.
//! * [`train`]: autoencoder, WGAN-GP refiner and baseline training loops.
//! * [`eval`]: feature-space Fréchet distance, nearest neighbours and exact t-SNE.
//! * [`io`]: PGM images, checkpoints, manifests, the pseudo-real degradation
//!   pipeline and dataset generation.
//!
//! Data-parallel inner loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and plain loops otherwise. Results never
//! depend on the number of threads.

pub mod autodiff;
pub mod error;
pub mod eval;
pub mod io;
pub mod models;
pub mod par;
pub mod render;
pub mod scene;
pub mod seed;
pub mod train;

pub use error::{Error, Result};
