//! `key = value` scene configuration files with `[section]` headers.
//!
//! Scene sections: `seafloor`, `targets`, `lights`, `camera`, `noise` and
//! `render`; pipeline sections: `degrade`, `autoencoder`, `train` and `tsne`.
//! Keys not given keep the 64 × 64 chip defaults; unknown sections or keys
//! are errors. `#` and `;` start comments. See the README for the schema.

use std::fmt::Write as _;

use super::{CylinderTarget, SceneConfig, TargetLayout};
use crate::error::{Error, Result};
use crate::eval::TsneConfig;
use crate::io::DegradeConfig;
use crate::render::RenderConfig;
use crate::train::{GpMode, LipschitzMode, TrainConfig};

/// A parsed configuration file.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigFile {
    pub scene: SceneConfig,
    pub render: RenderConfig,
    pub degrade: DegradeConfig,
    /// Optimiser settings for autoencoder training (the GAN-only fields are
    /// ignored).
    pub autoencoder: TrainConfig,
    pub train: TrainConfig,
    pub tsne: TsneConfig,
}

/// Autoencoder defaults: 2000 Adam steps on batches of 8.
pub fn autoencoder_train_defaults() -> TrainConfig {
    TrainConfig { iterations: 2000, batch_size: 8, ..TrainConfig::default() }
}

impl Default for ConfigFile {
    fn default() -> Self {
        ConfigFile {
            scene: SceneConfig::desk(),
            render: RenderConfig::default(),
            degrade: DegradeConfig::default(),
            autoencoder: autoencoder_train_defaults(),
            train: TrainConfig::default(),
            tsne: TsneConfig::default(),
        }
    }
}

const SECTIONS: [&str; 10] =
    ["seafloor", "targets", "lights", "camera", "noise", "render", "degrade", "autoencoder", "train", "tsne"];

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(e: &Entry) -> Result<T> {
    e.value.parse().map_err(|_| err(e.line, format!("`{}` is not a valid value for {}", e.value, e.key)))
}

fn list(e: &Entry, n: std::ops::RangeInclusive<usize>) -> Result<Vec<f64>> {
    let vals: Vec<f64> = e
        .value
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| err(e.line, format!("`{}` is not a comma-separated number list for {}", e.value, e.key)))?;
    if !n.contains(&vals.len()) {
        return Err(err(e.line, format!("{} expects {:?} numbers, got {}", e.key, n, vals.len())));
    }
    Ok(vals)
}

fn pair(e: &Entry) -> Result<[f64; 2]> {
    let v = list(e, 2..=2)?;
    Ok([v[0], v[1]])
}

/// Parses a configuration file on top of the built-in defaults.
pub fn parse_config(text: &str) -> Result<ConfigFile> {
    let mut cfg = ConfigFile::default();
    let mut section: Option<String> = None;

    let mut layout_kind: Option<String> = None;
    let mut single = match &cfg.scene.targets.layout {
        TargetLayout::Single { center_xy_m, yaw_rad, burial_frac } => (*center_xy_m, *yaw_rad, *burial_frac),
        _ => ([0.0, 0.0], 0.0, 0.0),
    };
    let mut grid = (5.0, 0u64);
    let mut listed: Vec<(usize, Vec<f64>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| err(line, "unterminated section header"))?.trim();
            if !SECTIONS.contains(&name) {
                return Err(err(line, format!("unknown section [{name}]")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| err(line, "expected `key = value`"))?;
        let e = Entry { line, key: key.trim(), value: value.trim() };
        let sec = section.as_deref().ok_or_else(|| err(line, "key outside of any section"))?;
        let s = &mut cfg.scene;
        match (sec, e.key) {
            ("seafloor", "grid_size") => s.seafloor.grid_size = num(&e)?,
            ("seafloor", "extent_m") => s.seafloor.extent_m = num(&e)?,
            ("seafloor", "rms_height_m") => s.seafloor.rms_height_m = num(&e)?,
            ("seafloor", "correlation_length_m") => s.seafloor.correlation_length_m = num(&e)?,
            ("seafloor", "seed") => s.seafloor.seed = num(&e)?,

            ("targets", "layout") => match e.value {
                "none" | "single" | "grid" | "list" => layout_kind = Some(e.value.to_string()),
                v => return Err(err(line, format!("unknown target layout `{v}`"))),
            },
            ("targets", "length_m") => s.targets.template.length_m = num(&e)?,
            ("targets", "radius_m") => s.targets.template.radius_m = num(&e)?,
            ("targets", "roughness") => s.targets.template.roughness_amp = num(&e)?,
            ("targets", "burial_min") => s.targets.template.burial_min = num(&e)?,
            ("targets", "burial_max") => s.targets.template.burial_max = num(&e)?,
            ("targets", "jitter_m") => s.targets.jitter_m = num(&e)?,
            ("targets", "center_x_m") => single.0[0] = num(&e)?,
            ("targets", "center_y_m") => single.0[1] = num(&e)?,
            ("targets", "yaw_rad") => single.1 = num(&e)?,
            ("targets", "burial_frac") => single.2 = num(&e)?,
            ("targets", "spacing_m") => grid.0 = num(&e)?,
            ("targets", "grid_seed") => grid.1 = num(&e)?,
            ("targets", "target") => listed.push((line, list(&e, 4..=7)?)),

            ("lights", "count") => s.lights.count = num(&e)?,
            ("lights", "track_start_m") => s.lights.track_start_m = pair(&e)?,
            ("lights", "track_end_m") => s.lights.track_end_m = pair(&e)?,
            ("lights", "altitude_m") => s.lights.altitude_m = Some(num(&e)?),
            ("lights", "max_range_m") => s.lights.max_range_m = num(&e)?,
            ("lights", "cone_half_angle_rad") => s.lights.cone_half_angle_rad = num(&e)?,
            ("lights", "intensity") => s.lights.intensity = num(&e)?,

            ("camera", "center_x_m") => s.camera.center_xy_m[0] = num(&e)?,
            ("camera", "center_y_m") => s.camera.center_xy_m[1] = num(&e)?,
            ("camera", "footprint_m") => s.camera.footprint_m = num(&e)?,
            ("camera", "pixels") => s.camera.pixels = num(&e)?,

            ("noise", "sigma") => s.noise_sigma = num(&e)?,

            ("render", "samples_per_pixel") => cfg.render.samples_per_pixel = num(&e)?,
            ("render", "ambient") => cfg.render.ambient = num(&e)?,
            ("render", "specular_exponent") => cfg.render.specular_exponent = num(&e)?,
            ("render", "specular_strength") => cfg.render.specular_strength = num(&e)?,
            ("render", "floor_albedo") => cfg.render.floor_albedo = num(&e)?,
            ("render", "target_albedo") => cfg.render.target_albedo = num(&e)?,
            ("render", "tone_gamma") => cfg.render.tone_gamma = num(&e)?,
            ("render", "seed") => cfg.render.seed = num(&e)?,

            ("degrade", "speckle_looks") => cfg.degrade.speckle_looks = num(&e)?,
            ("degrade", "blur_sigma_along") => cfg.degrade.blur_sigma_along = num(&e)?,
            ("degrade", "blur_sigma_across") => cfg.degrade.blur_sigma_across = num(&e)?,
            ("degrade", "contrast_gamma") => cfg.degrade.contrast_gamma = num(&e)?,
            ("degrade", "seed") => cfg.degrade.seed = num(&e)?,

            ("autoencoder", "iterations") => cfg.autoencoder.iterations = num(&e)?,
            ("autoencoder", "batch_size") => cfg.autoencoder.batch_size = num(&e)?,
            ("autoencoder", "lr") => cfg.autoencoder.lr = num(&e)?,
            ("autoencoder", "beta1") => cfg.autoencoder.beta1 = num(&e)?,
            ("autoencoder", "beta2") => cfg.autoencoder.beta2 = num(&e)?,
            ("autoencoder", "seed") => cfg.autoencoder.seed = num(&e)?,

            ("train", "lr") => cfg.train.lr = num(&e)?,
            ("train", "beta1") => cfg.train.beta1 = num(&e)?,
            ("train", "beta2") => cfg.train.beta2 = num(&e)?,
            ("train", "batch_size") => cfg.train.batch_size = num(&e)?,
            ("train", "lambda_gp") => cfg.train.lambda_gp = num(&e)?,
            ("train", "n_critic") => cfg.train.n_critic = num(&e)?,
            ("train", "mu_phi") => cfg.train.mu_phi = num(&e)?,
            ("train", "gamma") => cfg.train.gamma = num(&e)?,
            ("train", "iterations") => cfg.train.iterations = num(&e)?,
            ("train", "seed") => cfg.train.seed = num(&e)?,
            ("train", "checkpoint_every") => cfg.train.checkpoint_every = num(&e)?,
            ("train", "gp_mode") => {
                cfg.train.gp_mode = match e.value {
                    "generated" => GpMode::Generated,
                    "interpolated" => GpMode::Interpolated,
                    v => return Err(err(line, format!("unknown gp_mode `{v}` (generated, interpolated)"))),
                }
            }
            ("train", "weight_clip") => {
                let c: f64 = num(&e)?;
                cfg.train.lipschitz_mode =
                    if c > 0.0 { LipschitzMode::WeightClipping(c) } else { LipschitzMode::GradientPenalty };
            }

            ("tsne", "perplexity") => cfg.tsne.perplexity = num(&e)?,
            ("tsne", "iterations") => cfg.tsne.iterations = num(&e)?,
            ("tsne", "seed") => cfg.tsne.seed = num(&e)?,
            ("tsne", "learning_rate") => cfg.tsne.learning_rate = num(&e)?,
            ("tsne", "early_exaggeration") => cfg.tsne.early_exaggeration = num(&e)?,
            ("tsne", "exaggeration_iters") => cfg.tsne.exaggeration_iters = num(&e)?,
            ("tsne", "initial_momentum") => cfg.tsne.initial_momentum = num(&e)?,
            ("tsne", "final_momentum") => cfg.tsne.final_momentum = num(&e)?,
            ("tsne", "lr_decay") => cfg.tsne.lr_decay = num(&e)?,

            (sec, key) => return Err(err(line, format!("unknown key `{key}` in [{sec}]"))),
        }
    }

    let tpl = cfg.scene.targets.template.clone();
    let kind = layout_kind.unwrap_or_else(|| if listed.is_empty() { "single".into() } else { "list".into() });
    if kind != "list" {
        if let Some((line, _)) = listed.first() {
            return Err(err(*line, format!("`target` entries need layout = list, not {kind}")));
        }
    }
    cfg.scene.targets.layout = match kind.as_str() {
        "none" => TargetLayout::None,
        "single" => TargetLayout::Single { center_xy_m: single.0, yaw_rad: single.1, burial_frac: single.2 },
        "grid" => TargetLayout::Grid { spacing_m: grid.0, seed: grid.1 },
        _ => TargetLayout::List(
            listed
                .into_iter()
                .map(|(_, v)| CylinderTarget {
                    center_xy_m: [v[0], v[1]],
                    yaw_rad: v[2],
                    burial_frac: v[3],
                    length_m: v.get(4).copied().unwrap_or(tpl.length_m),
                    radius_m: v.get(5).copied().unwrap_or(tpl.radius_m),
                    roughness_amp: v.get(6).copied().unwrap_or(tpl.roughness_amp),
                })
                .collect(),
        ),
    };
    Ok(cfg)
}

impl ConfigFile {
    /// Serialises every effective value; [`parse_config`] reads it back exactly.
    pub fn to_text(&self) -> String {
        let s = &self.scene;
        let r = &self.render;
        let mut out = String::new();
        let sf = &s.seafloor;
        let _ = writeln!(
            out,
            "[seafloor]\ngrid_size = {}\nextent_m = {}\nrms_height_m = {}\ncorrelation_length_m = {}\nseed = {}\n",
            sf.grid_size, sf.extent_m, sf.rms_height_m, sf.correlation_length_m, sf.seed
        );
        let t = &s.targets.template;
        let _ = writeln!(
            out,
            "[targets]\nlength_m = {}\nradius_m = {}\nroughness = {}\nburial_min = {}\nburial_max = {}\njitter_m = {}",
            t.length_m, t.radius_m, t.roughness_amp, t.burial_min, t.burial_max, s.targets.jitter_m
        );
        match &s.targets.layout {
            TargetLayout::None => out.push_str("layout = none\n"),
            TargetLayout::Single { center_xy_m, yaw_rad, burial_frac } => {
                let _ = writeln!(
                    out,
                    "layout = single\ncenter_x_m = {}\ncenter_y_m = {}\nyaw_rad = {}\nburial_frac = {}",
                    center_xy_m[0], center_xy_m[1], yaw_rad, burial_frac
                );
            }
            TargetLayout::Grid { spacing_m, seed } => {
                let _ = writeln!(out, "layout = grid\nspacing_m = {spacing_m}\ngrid_seed = {seed}");
            }
            TargetLayout::List(ts) => {
                out.push_str("layout = list\n");
                for c in ts {
                    let _ = writeln!(
                        out,
                        "target = {}, {}, {}, {}, {}, {}, {}",
                        c.center_xy_m[0], c.center_xy_m[1], c.yaw_rad, c.burial_frac, c.length_m, c.radius_m, c.roughness_amp
                    );
                }
            }
        }
        let l = &s.lights;
        let _ = writeln!(
            out,
            "\n[lights]\ncount = {}\ntrack_start_m = {}, {}\ntrack_end_m = {}, {}\nmax_range_m = {}",
            l.count, l.track_start_m[0], l.track_start_m[1], l.track_end_m[0], l.track_end_m[1], l.max_range_m
        );
        if let Some(a) = l.altitude_m {
            let _ = writeln!(out, "altitude_m = {a}");
        }
        let _ = writeln!(out, "cone_half_angle_rad = {}\nintensity = {}\n", l.cone_half_angle_rad, l.intensity);
        let c = &s.camera;
        let _ = writeln!(
            out,
            "[camera]\ncenter_x_m = {}\ncenter_y_m = {}\nfootprint_m = {}\npixels = {}\n",
            c.center_xy_m[0], c.center_xy_m[1], c.footprint_m, c.pixels
        );
        let _ = writeln!(out, "[noise]\nsigma = {}\n", s.noise_sigma);
        let _ = writeln!(
            out,
            "[render]\nsamples_per_pixel = {}\nambient = {}\nspecular_exponent = {}\nspecular_strength = {}\nfloor_albedo = {}\ntarget_albedo = {}\ntone_gamma = {}\nseed = {}",
            r.samples_per_pixel, r.ambient, r.specular_exponent, r.specular_strength, r.floor_albedo, r.target_albedo, r.tone_gamma, r.seed
        );
        let d = &self.degrade;
        let _ = writeln!(
            out,
            "\n[degrade]\nspeckle_looks = {}\nblur_sigma_along = {}\nblur_sigma_across = {}\ncontrast_gamma = {}\nseed = {}",
            d.speckle_looks, d.blur_sigma_along, d.blur_sigma_across, d.contrast_gamma, d.seed
        );
        let a = &self.autoencoder;
        let _ = writeln!(
            out,
            "\n[autoencoder]\niterations = {}\nbatch_size = {}\nlr = {}\nbeta1 = {}\nbeta2 = {}\nseed = {}",
            a.iterations, a.batch_size, a.lr, a.beta1, a.beta2, a.seed
        );
        let t = &self.train;
        let gp_mode = match t.gp_mode {
            GpMode::Generated => "generated",
            GpMode::Interpolated => "interpolated",
        };
        let clip = match t.lipschitz_mode {
            LipschitzMode::GradientPenalty => 0.0,
            LipschitzMode::WeightClipping(c) => c,
        };
        let _ = writeln!(
            out,
            "\n[train]\nlr = {}\nbeta1 = {}\nbeta2 = {}\nbatch_size = {}\nlambda_gp = {}\nn_critic = {}\nmu_phi = {}\ngamma = {}\niterations = {}\nseed = {}\ncheckpoint_every = {}\ngp_mode = {gp_mode}\nweight_clip = {clip}",
            t.lr, t.beta1, t.beta2, t.batch_size, t.lambda_gp, t.n_critic, t.mu_phi, t.gamma, t.iterations, t.seed, t.checkpoint_every
        );
        let ts = &self.tsne;
        let _ = writeln!(
            out,
            "\n[tsne]\nperplexity = {}\niterations = {}\nseed = {}\nlearning_rate = {}\nearly_exaggeration = {}\nexaggeration_iters = {}\ninitial_momentum = {}\nfinal_momentum = {}\nlr_decay = {}",
            ts.perplexity, ts.iterations, ts.seed, ts.learning_rate, ts.early_exaggeration, ts.exaggeration_iters, ts.initial_momentum, ts.final_momentum, ts.lr_decay
        );
        out
    }
}
