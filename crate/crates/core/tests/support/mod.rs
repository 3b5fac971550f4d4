//! Independent oracles shared by the integration and acceptance suites.
//! Nothing in here calls the code path it is used to check.
#![allow(dead_code)]

pub mod gradcheck;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Norm-wise relative error `‖a − b‖ / max(‖a‖, ‖b‖, floor)`.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(1e-12)
}

/// Direct nested-loop cross-correlation, `x [n,c,h,w]`, `w [o,c,kh,kw]`.
pub fn brute_conv2d(
    x: &[f64],
    xs: [usize; 4],
    w: &[f64],
    ws: [usize; 4],
    stride: usize,
    pad: usize,
) -> (Vec<f64>, [usize; 4]) {
    let [n, c, h, wd] = xs;
    let [o, _, kh, kw] = ws;
    let oh = (h + 2 * pad - kh) / stride + 1;
    let ow = (wd + 2 * pad - kw) / stride + 1;
    let mut out = vec![0.0; n * o * oh * ow];
    for b in 0..n {
        for oc in 0..o {
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut acc = 0.0;
                    for ic in 0..c {
                        for ky in 0..kh {
                            for kx in 0..kw {
                                let iy = (oy * stride + ky) as isize - pad as isize;
                                let ix = (ox * stride + kx) as isize - pad as isize;
                                if iy < 0 || ix < 0 || iy >= h as isize || ix >= wd as isize {
                                    continue;
                                }
                                acc += x[((b * c + ic) * h + iy as usize) * wd + ix as usize]
                                    * w[((oc * c + ic) * kh + ky) * kw + kx];
                            }
                        }
                    }
                    out[((b * o + oc) * oh + oy) * ow + ox] = acc;
                }
            }
        }
    }
    (out, [n, o, oh, ow])
}

/// Plain two-pass mean and unbiased covariance of row vectors.
pub fn two_pass_stats(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    for r in rows {
        for j in 0..d {
            mean[j] += r[j];
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut cov = vec![vec![0.0; d]; d];
    for r in rows {
        for i in 0..d {
            for j in 0..d {
                cov[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]);
            }
        }
    }
    cov.iter_mut().flatten().for_each(|c| *c /= n - 1.0);
    (mean, cov)
}

/// Sum of squared differences.
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Integer shift `(dx, dy)` maximising `Σ a(x, y) · b(x + dx, y + dy)` over
/// mean-removed images, searched exhaustively within `±max_shift`.
pub fn xcorr_peak(a: &[f64], b: &[f64], w: usize, h: usize, max_shift: i64) -> (i64, i64) {
    let ma = a.iter().sum::<f64>() / a.len() as f64;
    let mb = b.iter().sum::<f64>() / b.len() as f64;
    let mut best = (f64::NEG_INFINITY, 0, 0);
    for dy in -max_shift..=max_shift {
        for dx in -max_shift..=max_shift {
            let mut s = 0.0;
            for y in 0..h as i64 {
                for x in 0..w as i64 {
                    let (x2, y2) = (x + dx, y + dy);
                    if x2 < 0 || y2 < 0 || x2 >= w as i64 || y2 >= h as i64 {
                        continue;
                    }
                    s += (a[(y * w as i64 + x) as usize] - ma) * (b[(y2 * w as i64 + x2) as usize] - mb);
                }
            }
            if s > best.0 {
                best = (s, dx, dy);
            }
        }
    }
    (best.1, best.2)
}

/// Signed distance to a capped cylinder (axis along `axis`, horizontal),
/// intersected with the half-space `z ≥ floor`.
pub fn cylinder_sdf(p: [f64; 3], center: [f64; 3], axis: [f64; 2], radius: f64, half_len: f64, floor: f64) -> f64 {
    let q = [p[0] - center[0], p[1] - center[1], p[2] - center[2]];
    let u = q[0] * axis[0] + q[1] * axis[1];
    let v = -q[0] * axis[1] + q[1] * axis[0];
    let perp = (v * v + q[2] * q[2]).sqrt();
    let d = [perp - radius, u.abs() - half_len];
    let outside = (d[0].max(0.0).powi(2) + d[1].max(0.0).powi(2)).sqrt();
    let cyl = d[0].max(d[1]).min(0.0) + outside;
    cyl.max(floor - p[2])
}

/// Sphere tracing of `sdf` along a unit ray; returns the hit distance and the
/// smallest distance value seen (to flag grazing rays).
pub fn sphere_march(origin: [f64; 3], dir: [f64; 3], t_max: f64, sdf: impl Fn([f64; 3]) -> f64) -> (Option<f64>, f64) {
    let mut t = 0.0;
    let mut closest = f64::INFINITY;
    for _ in 0..200_000 {
        let p = [origin[0] + t * dir[0], origin[1] + t * dir[1], origin[2] + t * dir[2]];
        let d = sdf(p);
        closest = closest.min(d);
        if d < 1e-7 {
            return (Some(t), closest);
        }
        t += d;
        if t > t_max {
            break;
        }
    }
    (None, closest)
}

/// First surface crossing along the ray (either direction), stepping by
/// `step`. Entering the grid sideways is not a crossing.
pub fn march_heightfield(
    origin: [f64; 3],
    dir: [f64; 3],
    t_max: f64,
    step: f64,
    height: impl Fn(f64, f64) -> Option<f64>,
) -> Option<f64> {
    let mut t = 0.0;
    let mut prev: Option<bool> = None;
    while t <= t_max {
        let p = [origin[0] + t * dir[0], origin[1] + t * dir[1], origin[2] + t * dir[2]];
        let below = height(p[0], p[1]).map(|h| p[2] <= h);
        match (prev, below) {
            (Some(a), Some(b)) if a != b => return Some(t),
            _ => {}
        }
        prev = below;
        t += step;
    }
    None
}

/// Far edge of the shadow cast on z = 0 by a horizontal cylinder of radius
/// `r` lying on the floor at x = 0, lit from `(lx, lz)` in the x–z plane:
/// where the upper tangent line from the light meets the floor.
pub fn shadow_tip(lx: f64, lz: f64, r: f64) -> f64 {
    let (dx, dz) = (0.0 - lx, r - lz);
    let d = (dx * dx + dz * dz).sqrt();
    let theta = dz.atan2(dx) + (r / d).asin();
    lx - lz * theta.cos() / theta.sin()
}

/// `n` points per cluster from `k` isotropic Gaussians whose means sit
/// `sep` standard deviations apart along separate axes.
pub fn clusters(seed: u64, k: usize, n: usize, d: usize, sep: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = rng(seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for c in 0..k {
        for _ in 0..n {
            rows.push((0..d).map(|j| rng.sample::<f64, _>(StandardNormal) + if j == c { sep } else { 0.0 }).collect());
            labels.push(c);
        }
    }
    (rows, labels)
}

/// Fraction of each point's `k` embedded nearest neighbours sharing its label.
pub fn knn_purity(points: &[[f64; 2]], labels: &[usize], k: usize) -> f64 {
    let mut same = 0;
    for i in 0..points.len() {
        let mut d: Vec<(f64, usize)> = (0..points.len())
            .filter(|&j| j != i)
            .map(|j| ((points[i][0] - points[j][0]).powi(2) + (points[i][1] - points[j][1]).powi(2), j))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0));
        same += d[..k].iter().filter(|(_, j)| labels[*j] == labels[i]).count();
    }
    same as f64 / (points.len() * k) as f64
}
