use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Statistical description of the seafloor relief.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeafloorSpec {
    /// Vertices per side.
    pub grid_size: usize,
    pub extent_m: f64,
    pub rms_height_m: f64,
    pub correlation_length_m: f64,
    pub seed: u64,
}

impl SeafloorSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if self.grid_size < 2 {
            return bad(format!("grid_size must be ≥ 2, got {}", self.grid_size));
        }
        if !(self.extent_m > 0.0 && self.extent_m.is_finite()) {
            return bad(format!("extent_m must be > 0, got {}", self.extent_m));
        }
        if !(self.rms_height_m >= 0.0 && self.rms_height_m.is_finite()) {
            return bad(format!("rms_height_m must be ≥ 0, got {}", self.rms_height_m));
        }
        if !(self.correlation_length_m > 0.0 && self.correlation_length_m.is_finite()) {
            return bad(format!("correlation_length_m must be > 0, got {}", self.correlation_length_m));
        }
        Ok(())
    }
}

/// Square grid of seafloor heights (m) centred on the origin.
///
/// Vertex `(i, j)` sits at `x = −E/2 + i·E/(n−1)`, `y = −E/2 + j·E/(n−1)`;
/// heights between vertices are bilinear.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHeightmap", into = "RawHeightmap")]
pub struct Heightmap {
    size: usize,
    extent_m: f64,
    heights: Vec<f64>,
    range: [f64; 2],
}

#[derive(Clone, Serialize, Deserialize)]
struct RawHeightmap {
    size: usize,
    extent_m: f64,
    heights: Vec<f64>,
}

impl TryFrom<RawHeightmap> for Heightmap {
    type Error = Error;

    fn try_from(r: RawHeightmap) -> Result<Self> {
        Heightmap::new(r.size, r.extent_m, r.heights)
    }
}

impl From<Heightmap> for RawHeightmap {
    fn from(h: Heightmap) -> Self {
        RawHeightmap { size: h.size, extent_m: h.extent_m, heights: h.heights }
    }
}

impl Heightmap {
    /// Row-major heights, `heights[j * size + i]`.
    pub fn new(size: usize, extent_m: f64, heights: Vec<f64>) -> Result<Self> {
        if size < 2 || heights.len() != size * size {
            return Err(Error::Validation(format!(
                "heightmap needs size ≥ 2 and size² heights, got size {size} with {} values",
                heights.len()
            )));
        }
        if !(extent_m > 0.0) || heights.iter().any(|h| !h.is_finite()) {
            return Err(Error::Validation("heightmap extent must be positive and heights finite".into()));
        }
        let range = [
            heights.iter().copied().fold(f64::INFINITY, f64::min),
            heights.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        ];
        Ok(Heightmap { size, extent_m, heights, range })
    }

    pub fn flat(size: usize, extent_m: f64) -> Result<Self> {
        Self::new(size, extent_m, vec![0.0; size * size])
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn extent_m(&self) -> f64 {
        self.extent_m
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn cell_m(&self) -> f64 {
        self.extent_m / (self.size - 1) as f64
    }

    pub fn half_extent(&self) -> f64 {
        0.5 * self.extent_m
    }

    pub fn vertex(&self, i: usize, j: usize) -> f64 {
        self.heights[j * self.size + i]
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let h = self.half_extent();
        x.abs() <= h && y.abs() <= h
    }

    pub fn max_height(&self) -> f64 {
        self.range[1]
    }

    pub fn min_height(&self) -> f64 {
        self.range[0]
    }

    /// Continuous grid coordinates of a world point.
    pub(crate) fn to_grid(&self, x: f64, y: f64) -> (f64, f64) {
        let c = self.cell_m();
        ((x + self.half_extent()) / c, (y + self.half_extent()) / c)
    }

    /// Bilinear height, or `None` outside the extent.
    pub fn height_at(&self, x: f64, y: f64) -> Option<f64> {
        if !self.contains(x, y) {
            return None;
        }
        let (gx, gy) = self.to_grid(x, y);
        let last = (self.size - 2) as f64;
        let i = gx.floor().clamp(0.0, last);
        let j = gy.floor().clamp(0.0, last);
        let (fx, fy) = (gx - i, gy - j);
        let (i, j) = (i as usize, j as usize);
        let h00 = self.vertex(i, j);
        let h10 = self.vertex(i + 1, j);
        let h01 = self.vertex(i, j + 1);
        let h11 = self.vertex(i + 1, j + 1);
        Some(h00 * (1.0 - fx) * (1.0 - fy) + h10 * fx * (1.0 - fy) + h01 * (1.0 - fx) * fy + h11 * fx * fy)
    }

    /// Height clamped to the nearest point of the extent.
    pub fn height_clamped(&self, x: f64, y: f64) -> f64 {
        let h = self.half_extent();
        self.height_at(x.clamp(-h, h), y.clamp(-h, h)).unwrap_or(0.0)
    }

    /// Unit surface normal from central differences one cell apart.
    pub fn normal_at(&self, x: f64, y: f64) -> [f64; 3] {
        let d = self.cell_m();
        let dzdx = (self.height_clamped(x + d, y) - self.height_clamped(x - d, y)) / (2.0 * d);
        let dzdy = (self.height_clamped(x, y + d) - self.height_clamped(x, y - d)) / (2.0 * d);
        let n = [-dzdx, -dzdy, 1.0];
        let len = (n[0] * n[0] + n[1] * n[1] + 1.0).sqrt();
        [n[0] / len, n[1] / len, n[2] / len]
    }

    /// Root-mean-square height about zero.
    pub fn rms(&self) -> f64 {
        (self.heights.iter().map(|h| h * h).sum::<f64>() / self.heights.len() as f64).sqrt()
    }
}

/// Stationary Gaussian random field with Gaussian correlation
/// `C(r) ∝ exp(−r²/ℓ²)`: white noise is filtered in the frequency domain by
/// the square root of the matching spectrum, `exp(−k²ℓ²/8)`, then shifted to
/// zero mean and scaled to the requested RMS.
pub fn synthesize_heightmap(spec: &SeafloorSpec) -> Result<Heightmap> {
    spec.validate()?;
    let n = spec.grid_size;
    if spec.rms_height_m == 0.0 {
        return Heightmap::flat(n, spec.extent_m);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut field: Vec<Complex<f64>> =
        (0..n * n).map(|_| Complex::new(StandardNormal.sample(&mut rng), 0.0)).collect();

    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    fft2(&mut field, n, fwd.as_ref());

    // Spatial period of the (periodic) grid is n cells of size E/(n−1).
    let period = n as f64 * spec.extent_m / (n - 1) as f64;
    let ell = spec.correlation_length_m;
    let freq = |k: usize| -> f64 {
        let signed = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        2.0 * std::f64::consts::PI * signed / period
    };
    for j in 0..n {
        let ky = freq(j);
        for i in 0..n {
            let kx = freq(i);
            field[j * n + i] *= (-(kx * kx + ky * ky) * ell * ell / 8.0).exp();
        }
    }
    fft2(&mut field, n, inv.as_ref());

    let mut heights: Vec<f64> = field.iter().map(|c| c.re).collect();
    let mean = heights.iter().sum::<f64>() / heights.len() as f64;
    heights.iter_mut().for_each(|h| *h -= mean);
    let rms = (heights.iter().map(|h| h * h).sum::<f64>() / heights.len() as f64).sqrt();
    if rms > 0.0 {
        let s = spec.rms_height_m / rms;
        heights.iter_mut().for_each(|h| *h *= s);
    }
    Heightmap::new(n, spec.extent_m, heights)
}

fn fft2(data: &mut [Complex<f64>], n: usize, fft: &dyn rustfft::Fft<f64>) {
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex::new(0.0, 0.0); n];
    for i in 0..n {
        for j in 0..n {
            col[j] = data[j * n + i];
        }
        fft.process(&mut col);
        for j in 0..n {
            data[j * n + i] = col[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, rms: f64) -> SeafloorSpec {
        SeafloorSpec { grid_size: n, extent_m: 20.0, rms_height_m: rms, correlation_length_m: 0.8, seed: 11 }
    }

    #[test]
    fn zero_rms_is_flat() {
        let hm = synthesize_heightmap(&spec(64, 0.0)).unwrap();
        assert!(hm.heights().iter().all(|&h| h == 0.0));
    }

    #[test]
    fn same_seed_same_grid() {
        let a = synthesize_heightmap(&spec(96, 0.1)).unwrap();
        let b = synthesize_heightmap(&spec(96, 0.1)).unwrap();
        assert!(a.heights().iter().zip(b.heights()).all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = synthesize_heightmap(&SeafloorSpec { seed: 12, ..spec(96, 0.1) }).unwrap();
        assert_ne!(a.heights(), c.heights());
    }

    #[test]
    fn sample_rms_matches_request() {
        let hm = synthesize_heightmap(&spec(512, 0.05)).unwrap();
        let mean = hm.heights().iter().sum::<f64>() / hm.heights().len() as f64;
        let rms = (hm.heights().iter().map(|h| (h - mean).powi(2)).sum::<f64>() / hm.heights().len() as f64).sqrt();
        assert!((0.045..=0.055).contains(&rms), "rms {rms}");
    }

    #[test]
    fn neighbouring_heights_are_correlated() {
        // Lag-one correlation of a Gaussian-correlated field is exp(−δ²/ℓ²) for spacing δ.
        let s = SeafloorSpec { grid_size: 256, extent_m: 25.5, rms_height_m: 1.0, correlation_length_m: 1.0, seed: 3 };
        let hm = synthesize_heightmap(&s).unwrap();
        let n = hm.size();
        let mut num = 0.0;
        for j in 0..n {
            for i in 0..n - 1 {
                num += hm.vertex(i, j) * hm.vertex(i + 1, j);
            }
        }
        let r = num / (n * (n - 1)) as f64;
        let expect = (-(0.1f64).powi(2)).exp();
        assert!((r - expect).abs() < 0.05, "lag-1 correlation {r} vs {expect}");
    }

    #[test]
    fn invalid_specs_are_rejected() {
        for bad in [
            SeafloorSpec { grid_size: 1, ..spec(2, 0.1) },
            SeafloorSpec { extent_m: 0.0, ..spec(8, 0.1) },
            SeafloorSpec { rms_height_m: -1.0, ..spec(8, 0.1) },
            SeafloorSpec { correlation_length_m: 0.0, ..spec(8, 0.1) },
        ] {
            assert!(matches!(synthesize_heightmap(&bad), Err(Error::Parameter(_))));
        }
    }

    #[test]
    fn bilinear_interpolates_and_bounds() {
        let hm = Heightmap::new(2, 2.0, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(hm.height_at(-1.0, -1.0), Some(0.0));
        assert_eq!(hm.height_at(1.0, 1.0), Some(3.0));
        assert!((hm.height_at(0.0, 0.0).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(hm.height_at(1.5, 0.0), None);
    }
}
