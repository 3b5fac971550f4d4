//! Ray intersection with capped cylinders and bilinear heightmaps.

use crate::scene::{CylinderTarget, Heightmap};

/// Minimum accepted hit distance (m).
pub const HIT_EPS: f64 = 1e-6;

pub type Vec3 = [f64; 3];

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add_scaled(a: Vec3, b: Vec3, s: f64) -> Vec3 {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: Vec3) -> Vec3 {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Half-line with a unit direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl Ray {
    /// Normalises `direction`; returns `None` for a zero or non-finite direction.
    pub fn new(origin: Vec3, direction: Vec3) -> Option<Self> {
        let n = norm(direction);
        (n > 0.0 && n.is_finite()).then(|| Ray { origin, direction: [direction[0] / n, direction[1] / n, direction[2] / n] })
    }

    pub fn at(&self, t: f64) -> Vec3 {
        add_scaled(self.origin, self.direction, t)
    }
}

/// Surface hit: distance along the ray and the unit outward normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub normal: Vec3,
}

/// Nearest hit of `ray` with a finite capped cylinder whose axis rests at
/// [`CylinderTarget::axis_height`] above `local_floor_z`. Hits below the local
/// floor are discarded, which clips the buried part. Roughness perturbs the
/// shading normal only, never the geometry.
pub fn intersect_cylinder(ray: &Ray, target: &CylinderTarget, local_floor_z: f64) -> Option<Hit> {
    let r = target.radius_m;
    let half = 0.5 * target.length_m;
    let [ax, ay] = target.axis();
    let axis = [ax, ay, 0.0];
    let b1 = [-ay, ax, 0.0];
    let b2 = [0.0, 0.0, 1.0];
    let center = [target.center_xy_m[0], target.center_xy_m[1], target.axis_height(local_floor_z)];

    let o = sub(ray.origin, center);
    let d = ray.direction;
    let (ou, o1, o2) = (dot(o, axis), dot(o, b1), dot(o, b2));
    let (du, d1, d2) = (dot(d, axis), dot(d, b1), dot(d, b2));

    let mut best: Option<(f64, Vec3)> = None;
    let mut consider = |t: f64, normal: Vec3| {
        if t > HIT_EPS && best.is_none_or(|(bt, _)| t < bt) && ray.at(t)[2] >= local_floor_z {
            best = Some((t, normal));
        }
    };

    let a = d1 * d1 + d2 * d2;
    if a > 1e-300 {
        let b = 2.0 * (o1 * d1 + o2 * d2);
        let c = o1 * o1 + o2 * o2 - r * r;
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            for t in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
                let u = ou + du * t;
                if u.abs() <= half {
                    let (p1, p2) = (o1 + d1 * t, o2 + d2 * t);
                    let n = [(p1 * b1[0] + p2 * b2[0]) / r, (p1 * b1[1] + p2 * b2[1]) / r, (p1 * b1[2] + p2 * b2[2]) / r];
                    consider(t, n);
                }
            }
        }
    }
    if du.abs() > 1e-300 {
        for (cap, sign) in [(half, 1.0), (-half, -1.0)] {
            let t = (cap - ou) / du;
            let (p1, p2) = (o1 + d1 * t, o2 + d2 * t);
            if p1 * p1 + p2 * p2 <= r * r {
                consider(t, [sign * axis[0], sign * axis[1], 0.0]);
            }
        }
    }

    let (t, normal) = best?;
    let normal = if target.roughness_amp > 0.0 {
        roughen(normal, sub(ray.at(t), center), target)
    } else {
        normal
    };
    Some(Hit { t, normal })
}

/// Deterministic sinusoidal bump field in the target's local frame.
fn roughen(n: Vec3, local: Vec3, target: &CylinderTarget) -> Vec3 {
    let [ax, ay] = target.axis();
    let u = local[0] * ax + local[1] * ay;
    let v = (-local[0] * ay + local[1] * ax).atan2(local[2]);
    let k = 2.0 * std::f64::consts::PI / target.radius_m;
    let g1 = (k * 1.7 * u + 3.0 * v).sin() + 0.5 * (k * 4.1 * u - 7.0 * v).cos();
    let g2 = (k * 2.3 * u - 5.0 * v).cos() + 0.5 * (k * 3.3 * u + 11.0 * v).sin();
    // Tangents: along the axis, and around it.
    let t1 = [ax, ay, 0.0];
    let t2 = normalize_or(cross(n, t1), [0.0, 0.0, 1.0]);
    let a = target.roughness_amp;
    normalize(add_scaled(add_scaled(n, t1, a * g1), t2, a * g2))
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize_or(a: Vec3, fallback: Vec3) -> Vec3 {
    let n = norm(a);
    if n > 1e-12 { [a[0] / n, a[1] / n, a[2] / n] } else { fallback }
}

/// Nearest hit of `ray` with the bilinear heightmap surface, found by walking
/// the grid cells the ray crosses and solving the per-cell quadratic. Normals
/// come from central differences of the height field.
pub fn intersect_heightmap(ray: &Ray, hm: &Heightmap) -> Option<Hit> {
    let half = hm.half_extent();
    let (zmin, zmax) = (hm.min_height() - 1e-9, hm.max_height() + 1e-9);
    let [ox, oy, oz] = ray.origin;
    let [dx, dy, dz] = ray.direction;

    // Clip to the bounding slab of the surface.
    let mut t0 = 0.0f64;
    let mut t1 = f64::INFINITY;
    for (o, d, lo, hi) in [(ox, dx, -half, half), (oy, dy, -half, half), (oz, dz, zmin, zmax)] {
        if d.abs() < 1e-300 {
            if o < lo || o > hi {
                return None;
            }
        } else {
            let (a, b) = ((lo - o) / d, (hi - o) / d);
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
    }
    if t0 > t1 {
        return None;
    }

    let cell = hm.cell_m();
    let last = hm.size() - 2;
    let p = ray.at(t0);
    let (gx, gy) = hm.to_grid(p[0], p[1]);
    let mut i = (gx.floor().max(0.0) as usize).min(last);
    let mut j = (gy.floor().max(0.0) as usize).min(last);

    let step = |d: f64| if d > 0.0 { 1i64 } else { -1 };
    let next_boundary = |idx: usize, d: f64, o: f64| -> f64 {
        if d.abs() < 1e-300 {
            return f64::INFINITY;
        }
        let edge = -half + (idx as f64 + if d > 0.0 { 1.0 } else { 0.0 }) * cell;
        (edge - o) / d
    };
    let mut tx = next_boundary(i, dx, ox);
    let mut ty = next_boundary(j, dy, oy);
    let dtx = if dx.abs() < 1e-300 { f64::INFINITY } else { cell / dx.abs() };
    let dty = if dy.abs() < 1e-300 { f64::INFINITY } else { cell / dy.abs() };
    let (sx, sy) = (step(dx), step(dy));

    // Only true crossings count: a ray that starts under the surface or enters
    // the grid sideways underneath it hits where it comes back up.
    let mut t_cur = t0;
    loop {
        let t_end = tx.min(ty).min(t1);
        if let Some(t) = cell_hit(ray, hm, i, j, t_cur, t_end) {
            let q = ray.at(t);
            return (t > HIT_EPS).then(|| Hit { t, normal: hm.normal_at(q[0], q[1]) });
        }
        if t_end >= t1 {
            return None;
        }
        if tx < ty {
            let ni = i as i64 + sx;
            if ni < 0 || ni > last as i64 {
                return None;
            }
            i = ni as usize;
            t_cur = tx;
            tx += dtx;
        } else {
            let nj = j as i64 + sy;
            if nj < 0 || nj > last as i64 {
                return None;
            }
            j = nj as usize;
            t_cur = ty;
            ty += dty;
        }
    }
}

/// First root of `z(t) − h(x(t), y(t))` within `[t0, t1]` for cell `(i, j)`.
fn cell_hit(ray: &Ray, hm: &Heightmap, i: usize, j: usize, t0: f64, t1: f64) -> Option<f64> {
    let cell = hm.cell_m();
    let half = hm.half_extent();
    let h00 = hm.vertex(i, j);
    let e1 = hm.vertex(i + 1, j) - h00;
    let e2 = hm.vertex(i, j + 1) - h00;
    let e3 = h00 - hm.vertex(i + 1, j) - hm.vertex(i, j + 1) + hm.vertex(i + 1, j + 1);
    let [ox, oy, oz] = ray.origin;
    let [dx, dy, dz] = ray.direction;
    let ax = (ox + half) / cell - i as f64;
    let ay = (oy + half) / cell - j as f64;
    let (bx, by) = (dx / cell, dy / cell);

    let qa = -e3 * bx * by;
    let qb = dz - e1 * bx - e2 * by - e3 * (ax * by + bx * ay);
    let qc = oz - h00 - e1 * ax - e2 * ay - e3 * ax * ay;

    let lo = t0.max(HIT_EPS);
    if lo > t1 {
        return None;
    }
    let mut roots = [f64::NAN; 2];
    if qa.abs() < 1e-14 * (qb.abs() + qc.abs()).max(1e-300) {
        if qb != 0.0 {
            roots[0] = -qc / qb;
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // Numerically stable pair of roots.
            let q = -0.5 * (qb + qb.signum() * sq);
            roots = [q / qa, if q != 0.0 { qc / q } else { f64::NAN }];
        }
    }
    roots
        .into_iter()
        .filter(|t| t.is_finite() && *t >= lo && *t <= t1)
        .min_by(|a, b| a.total_cmp(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn proud() -> CylinderTarget {
        CylinderTarget {
            center_xy_m: [0.0, 0.0],
            length_m: 2.0,
            radius_m: 0.25,
            yaw_rad: 0.0,
            burial_frac: 0.0,
            roughness_amp: 0.0,
        }
    }

    #[test]
    fn vertical_ray_hits_top_of_cylinder() {
        let ray = Ray::new([0.3, 0.0, 5.0], [0.0, 0.0, -1.0]).unwrap();
        let hit = intersect_cylinder(&ray, &proud(), 0.0).unwrap();
        assert!((ray.at(hit.t)[2] - 0.5).abs() < 1e-12);
        assert!((hit.normal[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ray_beside_the_cylinder_misses() {
        let ray = Ray::new([0.0, 0.26, 5.0], [0.0, 0.0, -1.0]).unwrap();
        assert!(intersect_cylinder(&ray, &proud(), 0.0).is_none());
        let ray = Ray::new([1.01, 0.0, 5.0], [0.0, 0.0, -1.0]).unwrap();
        assert!(intersect_cylinder(&ray, &proud(), 0.0).is_none());
    }

    #[test]
    fn end_cap_faces_outward() {
        let ray = Ray::new([5.0, 0.0, 0.25], [-1.0, 0.0, 0.0]).unwrap();
        let hit = intersect_cylinder(&ray, &proud(), 0.0).unwrap();
        assert!((hit.t - 4.0).abs() < 1e-12);
        assert_eq!(hit.normal, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn buried_part_is_clipped() {
        let mut t = proud();
        t.burial_frac = 0.5;
        // Axis at the floor: a horizontal ray just below the floor sees nothing.
        let ray = Ray::new([5.0, 0.0, -0.05], [-1.0, 0.0, 0.0]).unwrap();
        assert!(intersect_cylinder(&ray, &t, 0.0).is_none());
        let ray = Ray::new([0.0, 0.0, 5.0], [0.0, 0.0, -1.0]).unwrap();
        assert!((ray.at(intersect_cylinder(&ray, &t, 0.0).unwrap().t)[2] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn vertical_ray_on_flat_floor() {
        let hm = Heightmap::flat(16, 10.0).unwrap();
        let ray = Ray::new([1.234, -2.0, 3.0], [0.0, 0.0, -1.0]).unwrap();
        let hit = intersect_heightmap(&ray, &hm).unwrap();
        assert!((hit.t - 3.0).abs() < 1e-12);
        assert!((hit.normal[2] - 1.0).abs() < 1e-12);
        let outside = Ray::new([6.0, 0.0, 3.0], [0.0, 0.0, -1.0]).unwrap();
        assert!(intersect_heightmap(&outside, &hm).is_none());
    }
}
