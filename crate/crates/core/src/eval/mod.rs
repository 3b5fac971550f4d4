//! Evaluation: Fréchet distance between autoencoder-feature distributions,
//! exact nearest neighbours for novelty audits, and exact t-SNE.

mod fid;
mod knn;
pub mod linalg;
mod tsne;

pub use fid::{feature_stats, fid, FeatureStats};
pub use knn::{l2_distance, nearest_neighbors, nearest_rows, Metric};
pub use tsne::{conditional_affinities, kl_divergence, tsne, Embedding2D, TsneConfig, ENTROPY_TOL};
