//! Declarative scene: seafloor heightmap, cylinder targets, a line array of
//! point light sources standing in for the synthetic aperture, and an
//! overhead orthographic camera.
//!
//! All lengths are metres and all angles radians. The seafloor is centred on
//! the origin; the along-track direction of the default geometry is +y and
//! the sources sit at negative x, so shadows fall toward +x.

mod config;
mod heightmap;
mod targets;

use serde::{Deserialize, Serialize};

pub use config::{autoencoder_train_defaults, parse_config, ConfigFile};
pub use heightmap::{synthesize_heightmap, Heightmap, SeafloorSpec};
pub use targets::{sample_target_field, CylinderTarget, TargetTemplate};

use crate::error::{Error, Result};

/// Ratio of sonar altitude to maximum imaging range used when the altitude
/// is not given explicitly.
pub const ALTITUDE_RANGE_RATIO: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightArraySpec {
    pub count: usize,
    pub track_start_m: [f64; 2],
    pub track_end_m: [f64; 2],
    pub altitude_m: f64,
    pub cone_half_angle_rad: f64,
    /// Radiance scale of each individual source.
    pub intensity: f64,
}

impl LightArraySpec {
    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Config("light array needs at least one source".into()));
        }
        if !(self.altitude_m > 0.0 && self.altitude_m.is_finite()) {
            return Err(Error::Validation(format!("light altitude must be > 0, got {}", self.altitude_m)));
        }
        if !(self.cone_half_angle_rad > 0.0 && self.cone_half_angle_rad < std::f64::consts::FRAC_PI_2) {
            return Err(Error::Validation(format!(
                "cone half-angle must lie in (0, π/2), got {}",
                self.cone_half_angle_rad
            )));
        }
        if !(self.intensity >= 0.0 && self.intensity.is_finite()) {
            return Err(Error::Validation(format!("light intensity must be ≥ 0, got {}", self.intensity)));
        }
        Ok(())
    }

    /// Source positions, evenly spaced from start to end (a single source sits
    /// at the midpoint).
    pub fn sources(&self) -> Vec<[f64; 3]> {
        let [x0, y0] = self.track_start_m;
        let [x1, y1] = self.track_end_m;
        (0..self.count)
            .map(|i| {
                let f = if self.count == 1 { 0.5 } else { i as f64 / (self.count - 1) as f64 };
                [x0 + f * (x1 - x0), y0 + f * (y1 - y0), self.altitude_m]
            })
            .collect()
    }

    pub fn centroid(&self) -> [f64; 3] {
        let [x0, y0] = self.track_start_m;
        let [x1, y1] = self.track_end_m;
        [0.5 * (x0 + x1), 0.5 * (y0 + y1), self.altitude_m]
    }
}

/// Overhead orthographic camera. Pixel rows run from +y (top) to −y, columns
/// from −x to +x.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub center_xy_m: [f64; 2],
    pub footprint_m: f64,
    pub pixels: usize,
}

impl CameraSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.footprint_m > 0.0 && self.footprint_m.is_finite()) {
            return Err(Error::Validation(format!("camera footprint must be > 0, got {}", self.footprint_m)));
        }
        if self.pixels < 16 {
            return Err(Error::Validation(format!("camera needs ≥ 16 pixels per side, got {}", self.pixels)));
        }
        Ok(())
    }

    pub fn pixel_m(&self) -> f64 {
        self.footprint_m / self.pixels as f64
    }

    /// World position of a (possibly fractional) pixel coordinate; integer
    /// coordinates plus 0.5 are pixel centres.
    pub fn pixel_to_world(&self, col: f64, row: f64) -> [f64; 2] {
        let half = 0.5 * self.footprint_m;
        let p = self.pixel_m();
        [self.center_xy_m[0] - half + col * p, self.center_xy_m[1] + half - row * p]
    }

    /// Fractional (column, row) of a world point.
    pub fn world_to_pixel(&self, x: f64, y: f64) -> [f64; 2] {
        let half = 0.5 * self.footprint_m;
        let p = self.pixel_m();
        [(x - self.center_xy_m[0] + half) / p, (self.center_xy_m[1] + half - y) / p]
    }
}

/// A fully built, validated scene.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub heightmap: Heightmap,
    pub targets: Vec<CylinderTarget>,
    pub lights: LightArraySpec,
    pub camera: CameraSpec,
    pub background_noise_sigma: f64,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        self.lights.validate()?;
        self.camera.validate()?;
        if !(self.background_noise_sigma >= 0.0 && self.background_noise_sigma.is_finite()) {
            return Err(Error::Validation(format!("noise sigma must be ≥ 0, got {}", self.background_noise_sigma)));
        }
        for (i, t) in self.targets.iter().enumerate() {
            t.validate().map_err(|e| Error::Validation(format!("target {i}: {e}")))?;
            if !self.heightmap.contains(t.center_xy_m[0], t.center_xy_m[1]) {
                return Err(Error::Validation(format!(
                    "target {i} at ({}, {}) lies outside the ±{} m seafloor extent",
                    t.center_xy_m[0],
                    t.center_xy_m[1],
                    self.heightmap.half_extent()
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Data(format!("scene serialisation: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let scene: Scene = serde_json::from_str(text).map_err(|e| Error::Data(format!("scene parse: {e}")))?;
        scene.validate()?;
        Ok(scene)
    }
}

/// How targets are placed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TargetLayout {
    None,
    /// One target from the template at the given pose.
    Single { center_xy_m: [f64; 2], yaw_rad: f64, burial_frac: f64 },
    /// A [`sample_target_field`] grid over the seafloor extent.
    Grid { spacing_m: f64, seed: u64 },
    List(Vec<CylinderTarget>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetsConfig {
    pub layout: TargetLayout,
    pub template: TargetTemplate,
    /// Half-width of the uniform position jitter applied by dataset generation.
    pub jitter_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LightsConfig {
    pub count: usize,
    pub track_start_m: [f64; 2],
    pub track_end_m: [f64; 2],
    /// Explicit altitude; defaults to `ALTITUDE_RANGE_RATIO × max_range_m`.
    pub altitude_m: Option<f64>,
    pub max_range_m: f64,
    pub cone_half_angle_rad: f64,
    pub intensity: f64,
}

impl LightsConfig {
    pub fn effective_altitude(&self) -> f64 {
        self.altitude_m.unwrap_or(ALTITUDE_RANGE_RATIO * self.max_range_m)
    }
}

/// Everything needed to build a [`Scene`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub seafloor: SeafloorSpec,
    pub targets: TargetsConfig,
    pub lights: LightsConfig,
    pub camera: CameraSpec,
    pub noise_sigma: f64,
}

impl SceneConfig {
    /// Chip scene: one target near the centre of a 6.4 m footprint, sources
    /// 40 m off to −x along a 40 m track at the altitude implied by a 150 m
    /// maximum range.
    pub fn chip(pixels: usize) -> Self {
        let count = 16;
        SceneConfig {
            seafloor: SeafloorSpec {
                grid_size: 128,
                extent_m: 12.8,
                rms_height_m: 0.02,
                correlation_length_m: 0.4,
                seed: 1,
            },
            targets: TargetsConfig {
                layout: TargetLayout::Single { center_xy_m: [0.0, 0.0], yaw_rad: 0.5, burial_frac: 0.1 },
                template: TargetTemplate::default(),
                jitter_m: 0.8,
            },
            lights: LightsConfig {
                count,
                track_start_m: [-40.0, -20.0],
                track_end_m: [-40.0, 20.0],
                altitude_m: None,
                max_range_m: 150.0,
                cone_half_angle_rad: 0.5,
                intensity: 2.4 / count as f64,
            },
            camera: CameraSpec { center_xy_m: [0.0, 0.0], footprint_m: 6.4, pixels },
            noise_sigma: 0.04,
        }
    }

    /// 64 × 64 desk-scale chip.
    pub fn desk() -> Self {
        Self::chip(64)
    }

    /// 256 × 256 chip.
    pub fn full() -> Self {
        Self::chip(256)
    }
}

/// Builds and validates the scene described by `config`.
pub fn build_scene(config: &SceneConfig) -> Result<Scene> {
    config.targets.template.validate()?;
    let heightmap = synthesize_heightmap(&config.seafloor)?;
    let tpl = &config.targets.template;
    let targets = match &config.targets.layout {
        TargetLayout::None => Vec::new(),
        TargetLayout::Single { center_xy_m, yaw_rad, burial_frac } => vec![CylinderTarget {
            center_xy_m: *center_xy_m,
            length_m: tpl.length_m,
            radius_m: tpl.radius_m,
            yaw_rad: *yaw_rad,
            burial_frac: *burial_frac,
            roughness_amp: tpl.roughness_amp,
        }],
        TargetLayout::Grid { spacing_m, seed } => {
            sample_target_field(config.seafloor.extent_m, *spacing_m, *seed, tpl)?
        }
        TargetLayout::List(list) => list.clone(),
    };
    let l = &config.lights;
    if !(l.max_range_m > 0.0) && l.altitude_m.is_none() {
        return Err(Error::Validation(format!("max_range_m must be > 0, got {}", l.max_range_m)));
    }
    let scene = Scene {
        heightmap,
        targets,
        lights: LightArraySpec {
            count: l.count,
            track_start_m: l.track_start_m,
            track_end_m: l.track_end_m,
            altitude_m: l.effective_altitude(),
            cone_half_angle_rad: l.cone_half_angle_rad,
            intensity: l.intensity,
        },
        camera: config.camera.clone(),
        background_noise_sigma: config.noise_sigma,
    };
    scene.validate()?;
    Ok(scene)
}
