use crate::error::{Error, Result};
use crate::models::Autoencoder;
use crate::render::Image;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Metric {
    /// Euclidean distance between pixel vectors.
    #[default]
    ImageL2,
    /// Euclidean distance between autoencoder features.
    Phi,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" => Ok(Metric::ImageL2),
            "phi" => Ok(Metric::Phi),
            _ => Err(Error::Parameter(format!("unknown metric {s:?} (l2, phi)"))),
        }
    }
}

pub fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Exact k nearest rows of `data` to `query`, ascending by distance with ties
/// broken by lower index.
pub fn nearest_rows(query: &[f64], data: &[Vec<f64>], k: usize) -> Result<Vec<(usize, f64)>> {
    if k > data.len() {
        return Err(Error::Parameter(format!("k = {k} exceeds dataset size {}", data.len())));
    }
    if let Some(r) = data.iter().find(|r| r.len() != query.len()) {
        return Err(Error::shape("nearest_neighbors", format!("query of length {} vs row of length {}", query.len(), r.len())));
    }
    let mut d: Vec<(usize, f64)> = crate::par::map_range(data.len(), |i| (i, l2_distance(query, &data[i])));
    d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    d.truncate(k);
    Ok(d)
}

/// k nearest images under `metric`; φ distances need the autoencoder.
pub fn nearest_neighbors(
    query: &Image,
    dataset: &[&Image],
    k: usize,
    metric: Metric,
    phi: Option<&Autoencoder>,
) -> Result<Vec<(usize, f64)>> {
    match metric {
        Metric::ImageL2 => {
            if let Some(img) = dataset.iter().find(|i| (i.width(), i.height()) != (query.width(), query.height())) {
                return Err(Error::shape(
                    "nearest_neighbors",
                    format!("query {}x{} vs dataset image {}x{}", query.width(), query.height(), img.width(), img.height()),
                ));
            }
            let rows: Vec<Vec<f64>> = dataset.iter().map(|i| i.pixels().to_vec()).collect();
            nearest_rows(query.pixels(), &rows, k)
        }
        Metric::Phi => {
            let ae = phi.ok_or_else(|| Error::Config("φ-distance needs an autoencoder checkpoint".into()))?;
            let q = ae.features(&[query])?.remove(0);
            nearest_rows(&q, &ae.features(dataset)?, k)
        }
    }
}
