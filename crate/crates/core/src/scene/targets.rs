use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite capped cylinder lying on (or partly buried in) the seafloor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderTarget {
    pub center_xy_m: [f64; 2],
    pub length_m: f64,
    pub radius_m: f64,
    /// Rotation of the axis about the vertical; 0 points the axis along +x.
    pub yaw_rad: f64,
    /// Fraction of the diameter sunk below the local seafloor, in `[0, 1]`.
    pub burial_frac: f64,
    /// Surface normal perturbation amplitude, relative to the radius.
    pub roughness_amp: f64,
}

impl CylinderTarget {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_m > 0.0 && self.radius_m > 0.0) {
            return Err(Error::Validation(format!(
                "target at {:?} needs positive length and radius, got {} and {}",
                self.center_xy_m, self.length_m, self.radius_m
            )));
        }
        if !(0.0..=1.0).contains(&self.burial_frac) {
            return Err(Error::Validation(format!(
                "target at {:?} has burial_frac {} outside [0, 1]",
                self.center_xy_m, self.burial_frac
            )));
        }
        if !(self.roughness_amp >= 0.0)
            || !self.yaw_rad.is_finite()
            || self.center_xy_m.iter().any(|c| !c.is_finite())
        {
            return Err(Error::Validation(format!("target at {:?} has non-finite or negative fields", self.center_xy_m)));
        }
        Ok(())
    }

    /// Unit axis direction in the horizontal plane.
    pub fn axis(&self) -> [f64; 2] {
        [self.yaw_rad.cos(), self.yaw_rad.sin()]
    }

    /// Height of the axis above datum for a given local seafloor height:
    /// a proud cylinder rests on the floor, burial sinks it by `burial_frac · 2r`.
    pub fn axis_height(&self, local_floor_z: f64) -> f64 {
        local_floor_z + self.radius_m - self.burial_frac * 2.0 * self.radius_m
    }
}

/// Size and randomisation ranges shared by generated targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetTemplate {
    pub length_m: f64,
    pub radius_m: f64,
    pub roughness_amp: f64,
    pub burial_min: f64,
    pub burial_max: f64,
}

impl Default for TargetTemplate {
    fn default() -> Self {
        TargetTemplate { length_m: 2.0, radius_m: 0.25, roughness_amp: 0.05, burial_min: 0.0, burial_max: 0.5 }
    }
}

impl TargetTemplate {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_m > 0.0 && self.radius_m > 0.0 && self.roughness_amp >= 0.0) {
            return Err(Error::Parameter("target length and radius must be > 0, roughness ≥ 0".into()));
        }
        if !(0.0 <= self.burial_min && self.burial_min <= self.burial_max && self.burial_max <= 1.0) {
            return Err(Error::Parameter(format!(
                "burial range [{}, {}] must satisfy 0 ≤ min ≤ max ≤ 1",
                self.burial_min, self.burial_max
            )));
        }
        Ok(())
    }

    pub(crate) fn sample(&self, center: [f64; 2], rng: &mut impl Rng) -> CylinderTarget {
        let yaw_rad = rng.random_range(0.0..std::f64::consts::TAU);
        let burial_frac = if self.burial_max > self.burial_min {
            rng.random_range(self.burial_min..self.burial_max)
        } else {
            self.burial_min
        };
        CylinderTarget {
            center_xy_m: center,
            length_m: self.length_m,
            radius_m: self.radius_m,
            yaw_rad,
            burial_frac,
            roughness_amp: self.roughness_amp,
        }
    }
}

/// Regular grid of `floor(extent/spacing)` targets per side, centred on the
/// origin, with uniformly random yaw in `[0, 2π)` and burial in the
/// template's range. Positions depend only on the geometry; the seed drives
/// the attributes.
pub fn sample_target_field(
    extent_m: f64,
    spacing_m: f64,
    seed: u64,
    template: &TargetTemplate,
) -> Result<Vec<CylinderTarget>> {
    if !(spacing_m > 0.0) || !(spacing_m <= extent_m) || !extent_m.is_finite() {
        return Err(Error::Parameter(format!(
            "target spacing must satisfy 0 < spacing ≤ extent, got spacing {spacing_m} for extent {extent_m}"
        )));
    }
    template.validate()?;
    let per_side = ((extent_m / spacing_m) + 1e-9).floor() as usize;
    let first = -0.5 * (per_side - 1) as f64 * spacing_m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(per_side * per_side);
    for row in 0..per_side {
        for col in 0..per_side {
            let center = [first + col as f64 * spacing_m, first + row as f64 * spacing_m];
            out.push(template.sample(center, &mut rng));
        }
    }
    Ok(out)
}
