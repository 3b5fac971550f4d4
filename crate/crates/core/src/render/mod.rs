//! Ray-traced rendering of a [`Scene`] into a single-channel intensity image.
//!
//! Rays leave the orthographic camera straight down. At the first hit the
//! radiance is an ambient term plus, for every light source, a cone-gated
//! Lambertian term and a monostatic glint `(n·l)^p`, each masked by a hard
//! shadow ray. Each source's beam axis points at the camera footprint centre
//! on the datum plane, and the cone weight falls off as `cos(π/2 · θ/θ_max)`.
//!
//! Per-pixel randomness (sub-pixel jitter and speckle) comes from a counter
//! based generator keyed by `(seed, x, y)`, so output does not depend on the
//! worker count.

mod geometry;
mod image;

pub use geometry::{intersect_cylinder, intersect_heightmap, Hit, Ray, Vec3, HIT_EPS};
pub use image::Image;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::scene::Scene;
use crate::seed;
use geometry::{dot, normalize, sub};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub samples_per_pixel: usize,
    pub ambient: f64,
    /// Glint sharpness.
    pub specular_exponent: f64,
    pub specular_strength: f64,
    pub floor_albedo: f64,
    pub target_albedo: f64,
    /// Output mapping `v ↦ clamp(v, 0, 1)^γ`.
    pub tone_gamma: f64,
    pub seed: u64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            samples_per_pixel: 4,
            ambient: 0.05,
            specular_exponent: 20.0,
            specular_strength: 0.5,
            floor_albedo: 0.35,
            target_albedo: 0.9,
            tone_gamma: 0.8,
            seed: 0,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_pixel == 0 {
            return Err(Error::Validation("samples_per_pixel must be ≥ 1".into()));
        }
        let nonneg = [
            ("ambient", self.ambient),
            ("specular_strength", self.specular_strength),
            ("floor_albedo", self.floor_albedo),
            ("target_albedo", self.target_albedo),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("{name} must be finite and ≥ 0, got {v}")));
            }
        }
        for (name, v) in [("specular_exponent", self.specular_exponent), ("tone_gamma", self.tone_gamma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Renders the scene: radiance, then additive Gaussian noise with the scene's
/// background sigma, then clamping and tone mapping. Output lies in `[0, 1]`.
pub fn render(scene: &Scene, cfg: &RenderConfig) -> Result<Image> {
    let ctx = Context::new(scene, cfg)?;
    let sigma = scene.background_noise_sigma;
    let gamma = cfg.tone_gamma;
    let pixels = ctx.trace_all(|x, y, radiance| {
        let mut rng = pixel_rng(cfg.seed ^ NOISE_SALT, x, y);
        let n: f64 = rng.sample(StandardNormal);
        (radiance + sigma * n).clamp(0.0, 1.0).powf(gamma)
    });
    Image::new(ctx.n, ctx.n, pixels)
}

/// Mean radiance per pixel before noise, clamping and tone mapping. Values
/// can exceed 1.
pub fn render_radiance(scene: &Scene, cfg: &RenderConfig) -> Result<Image> {
    let ctx = Context::new(scene, cfg)?;
    let pixels = ctx.trace_all(|_, _, radiance| radiance);
    Image::new(ctx.n, ctx.n, pixels)
}

const NOISE_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

fn pixel_rng(seed: u64, x: usize, y: usize) -> ChaCha8Rng {
    seed::rng(seed::derive(seed::derive(seed, x as u64), y as u64))
}

struct Light {
    pos: Vec3,
    beam_axis: Vec3,
}

enum Surface {
    Floor,
    Target,
}

struct Context<'a> {
    scene: &'a Scene,
    cfg: &'a RenderConfig,
    lights: Vec<Light>,
    /// Seafloor height under each target centre.
    floors: Vec<f64>,
    /// Bounding sphere (centre, radius) per target for quick rejection.
    bounds: Vec<(Vec3, f64)>,
    cos_half: f64,
    top_z: f64,
    n: usize,
}

impl<'a> Context<'a> {
    fn new(scene: &'a Scene, cfg: &'a RenderConfig) -> Result<Self> {
        scene.validate()?;
        cfg.validate()?;
        let cam = &scene.camera;
        let aim = [cam.center_xy_m[0], cam.center_xy_m[1], 0.0];
        let lights = scene
            .lights
            .sources()
            .into_iter()
            .map(|pos| Light { pos, beam_axis: normalize(sub(aim, pos)) })
            .collect();
        let floors: Vec<f64> = scene
            .targets
            .iter()
            .map(|t| scene.heightmap.height_clamped(t.center_xy_m[0], t.center_xy_m[1]))
            .collect();
        let bounds = scene
            .targets
            .iter()
            .zip(&floors)
            .map(|(t, &f)| {
                let c = [t.center_xy_m[0], t.center_xy_m[1], t.axis_height(f)];
                (c, (0.25 * t.length_m * t.length_m + t.radius_m * t.radius_m).sqrt() + 1e-9)
            })
            .collect::<Vec<_>>();
        let top_z = bounds
            .iter()
            .map(|(c, r)| c[2] + r)
            .fold(scene.heightmap.max_height(), f64::max)
            + 1.0;
        Ok(Context {
            scene,
            cfg,
            lights,
            floors,
            bounds,
            cos_half: scene.lights.cone_half_angle_rad.cos(),
            top_z,
            n: cam.pixels,
        })
    }

    fn trace_all<F>(&self, finish: F) -> Vec<f64>
    where
        F: Fn(usize, usize, f64) -> f64 + Sync + Send,
    {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        par::for_each_chunk_mut(&mut out, n, |y, row| {
            for (x, v) in row.iter_mut().enumerate() {
                *v = finish(x, y, self.pixel_radiance(x, y));
            }
        });
        out
    }

    fn pixel_radiance(&self, x: usize, y: usize) -> f64 {
        let spp = self.cfg.samples_per_pixel;
        if spp == 1 {
            return self.sample(x as f64 + 0.5, y as f64 + 0.5);
        }
        let mut rng = pixel_rng(self.cfg.seed, x, y);
        let mut acc = 0.0;
        for _ in 0..spp {
            let (jx, jy): (f64, f64) = (rng.random(), rng.random());
            acc += self.sample(x as f64 + jx, y as f64 + jy);
        }
        acc / spp as f64
    }

    fn sample(&self, col: f64, row: f64) -> f64 {
        let [wx, wy] = self.scene.camera.pixel_to_world(col, row);
        let ray = Ray { origin: [wx, wy, self.top_z], direction: [0.0, 0.0, -1.0] };
        match self.first_hit(&ray, f64::INFINITY) {
            Some((hit, surface)) => self.shade(ray.at(hit.t), hit.normal, surface),
            None => self.cfg.ambient,
        }
    }

    fn first_hit(&self, ray: &Ray, t_max: f64) -> Option<(Hit, Surface)> {
        let mut best: Option<(Hit, Surface)> = intersect_heightmap(ray, &self.scene.heightmap)
            .filter(|h| h.t < t_max)
            .map(|h| (h, Surface::Floor));
        for (k, target) in self.scene.targets.iter().enumerate() {
            let limit = best.as_ref().map_or(t_max, |(h, _)| h.t);
            if !self.may_hit(ray, k, limit) {
                continue;
            }
            if let Some(h) = intersect_cylinder(ray, target, self.floors[k]) {
                if h.t < limit {
                    best = Some((h, Surface::Target));
                }
            }
        }
        best
    }

    fn may_hit(&self, ray: &Ray, k: usize, t_max: f64) -> bool {
        let (c, r) = self.bounds[k];
        let oc = sub(c, ray.origin);
        let tc = dot(oc, ray.direction);
        let d2 = dot(oc, oc) - tc * tc;
        d2 <= r * r && tc + r > 0.0 && tc - r < t_max
    }

    fn occluded(&self, p: Vec3, to_light: Vec3, dist: f64) -> bool {
        let ray = Ray { origin: p, direction: to_light };
        if intersect_heightmap(&ray, &self.scene.heightmap).is_some_and(|h| h.t < dist) {
            return true;
        }
        self.scene.targets.iter().enumerate().any(|(k, t)| {
            self.may_hit(&ray, k, dist) && intersect_cylinder(&ray, t, self.floors[k]).is_some_and(|h| h.t < dist)
        })
    }

    fn shade(&self, p: Vec3, n: Vec3, surface: Surface) -> f64 {
        let cfg = self.cfg;
        let albedo = match surface {
            Surface::Floor => cfg.floor_albedo,
            Surface::Target => cfg.target_albedo,
        };
        let intensity = self.scene.lights.intensity;
        let origin = geometry::add_scaled(p, n, 1e-6);
        let mut acc = cfg.ambient;
        for light in &self.lights {
            let to_light = sub(light.pos, p);
            let dist = geometry::norm(to_light);
            let l = [to_light[0] / dist, to_light[1] / dist, to_light[2] / dist];
            let lambert = dot(n, l);
            if lambert <= 0.0 {
                continue;
            }
            let cos_off = -dot(light.beam_axis, l);
            if cos_off <= self.cos_half {
                continue;
            }
            let off_axis = cos_off.min(1.0).acos();
            let cone = (std::f64::consts::FRAC_PI_2 * off_axis / self.scene.lights.cone_half_angle_rad).cos();
            if self.occluded(origin, l, dist) {
                continue;
            }
            let glint = cfg.specular_strength * lambert.powf(cfg.specular_exponent);
            acc += intensity * cone * (albedo * lambert + glint);
        }
        acc
    }
}
