use std::path::{Path, PathBuf};

use anyhow::Result;
use sasforge::eval::{feature_stats, fid, nearest_neighbors, tsne, Metric};
use sasforge::io::{
    degrade, load_checkpoint, read_pgm, read_pgm_dir, render_dataset, rerender_manifest, save_checkpoint, write_pgm,
    BitDepth, Manifest, Role,
};
use sasforge::models::{
    Autoencoder, AutoencoderConfig, BaselineConfig, BaselineGenerator, Generator, GeneratorConfig, Network, ParamSet,
};
use sasforge::render::Image;
use sasforge::scene::{parse_config, ConfigFile};
use sasforge::train::{train_autoencoder, train_dcgan, train_sasgan, CsvLog, Dataset, GpMode, LipschitzMode, TrainConfig};
use sasforge::Error;

use crate::{Command, Common, CriticFlags, Optim};

/// Name of the effective-configuration echo written next to every output.
pub const RUN_CONFIG_FILE: &str = "run_config.txt";

pub fn run(command: Command) -> Result<String> {
    match command {
        Command::RenderDataset { common, count, size, manifest, depth } => {
            let mut cfg = load_config(&common)?;
            if let Some(px) = size {
                cfg.scene.camera.pixels = px;
            }
            let seed = common.seed.unwrap_or(0);
            let out = prepare_out(&common, "render-dataset", &cfg, &[("seed", seed.to_string()), ("count", count.to_string())])?;
            let px = cfg.scene.camera.pixels;
            let n = match manifest {
                Some(path) => {
                    let m = Manifest::read(&path)?;
                    rerender_manifest(&cfg, &m, &out, bit_depth(depth))?;
                    m.len()
                }
                None => render_dataset(&cfg, seed, count, &out, bit_depth(depth))?.len(),
            };
            Ok(format!("rendered {n} images ({px}x{px}) into {}", out.display()))
        }

        Command::MakePseudoreal { common, input, looks, blur_along, blur_across, gamma, depth } => {
            let mut cfg = load_config(&common)?;
            let d = &mut cfg.degrade;
            set(&mut d.speckle_looks, looks);
            set(&mut d.blur_sigma_along, blur_along);
            set(&mut d.blur_sigma_across, blur_across);
            set(&mut d.contrast_gamma, gamma);
            set(&mut d.seed, common.seed);
            d.validate()?;
            let images = read_pgm_dir(&input)?;
            let out = prepare_out(&common, "make-pseudoreal", &cfg, &[("input", input.display().to_string())])?;
            for (i, (name, img)) in images.iter().enumerate() {
                write_pgm(out.join(name), &degrade(img, &cfg.degrade, i as u64)?, bit_depth(depth))?;
            }
            Ok(format!("degraded {} images (L = {}) into {}", images.len(), cfg.degrade.speckle_looks, out.display()))
        }

        Command::TrainAe { common, data, optim } => {
            let mut cfg = load_config(&common)?;
            apply_optim(&mut cfg.autoencoder, &optim, common.seed);
            let ds = load_dataset(&data, Role::PseudoReal)?;
            let side = ds.image_size().unwrap_or(64);
            let ae_cfg = if side == 256 { AutoencoderConfig::full() } else { AutoencoderConfig { image_size: side, ..Default::default() } };
            let out = prepare_out(&common, "train-ae", &cfg, &[("data", data.display().to_string())])?;
            let run = train_autoencoder(&ds, ae_cfg, &cfg.autoencoder)?;
            save_checkpoint(out.join("autoencoder.sfw"), run.model.params())?;
            let mut csv = String::from("iter,loss\n");
            for (i, l) in run.losses.iter().enumerate() {
                csv.push_str(&format!("{i},{l}\n"));
            }
            write_text(&out.join("ae_loss.csv"), &csv)?;
            let last = run.losses.last().copied().unwrap_or(f64::NAN);
            Ok(format!("trained autoencoder for {} steps on {} images; final loss {last:.5}", run.losses.len(), ds.len()))
        }

        Command::TrainGan { common, rendered, real, checkpoint, mu_phi, optim, critic } => {
            let mut cfg = load_config(&common)?;
            apply_optim(&mut cfg.train, &optim, common.seed);
            apply_critic(&mut cfg.train, &critic);
            set(&mut cfg.train.mu_phi, mu_phi);
            let phi = Autoencoder::from_params(required_checkpoint(checkpoint.as_deref(), "--checkpoint", "train-gan needs a trained autoencoder")?)?;
            let rd = load_dataset(&rendered, Role::Rendered)?;
            let rl = load_dataset(&real, Role::PseudoReal)?;
            let out = prepare_out(&common, "train-gan", &cfg, &[("rendered", rendered.display().to_string()), ("real", real.display().to_string())])?;
            cfg.train.checkpoint_dir = Some(out.clone());
            let gen_cfg = if rd.image_size() == Some(256) { GeneratorConfig::full() } else { GeneratorConfig::default() };
            let mut log = CsvLog::create(out.join("metrics.csv"))?;
            let run = train_sasgan(&rd, &rl, Some(&phi), gen_cfg, &cfg.train, &mut log)?;
            save_checkpoint(out.join("generator.sfw"), run.generator.params())?;
            save_checkpoint(out.join("critic.sfw"), run.critic.params())?;
            Ok(format!("trained refiner for {} iterations; {}", run.metrics.len(), last_metrics(&run.metrics)))
        }

        Command::TrainDcgan { common, real, optim, critic } => {
            let mut cfg = load_config(&common)?;
            apply_optim(&mut cfg.train, &optim, common.seed);
            apply_critic(&mut cfg.train, &critic);
            let rl = load_dataset(&real, Role::PseudoReal)?;
            let out = prepare_out(&common, "train-dcgan", &cfg, &[("real", real.display().to_string())])?;
            cfg.train.checkpoint_dir = Some(out.clone());
            let base = BaselineConfig { image_size: rl.image_size().unwrap_or(64), ..Default::default() };
            let mut log = CsvLog::create(out.join("metrics.csv"))?;
            let run = train_dcgan(&rl, base, &cfg.train, &mut log)?;
            save_checkpoint(out.join("baseline.sfw"), run.generator.params())?;
            save_checkpoint(out.join("critic.sfw"), run.critic.params())?;
            Ok(format!("trained baseline for {} iterations; {}", run.metrics.len(), last_metrics(&run.metrics)))
        }

        Command::Generate { common, checkpoint, input, count, depth } => {
            let cfg = load_config(&common)?;
            let params = required_checkpoint(checkpoint.as_deref(), "--checkpoint", "generate needs a generator or baseline checkpoint")?;
            let depth = bit_depth(depth);
            if let Ok(g) = Generator::from_params(params.clone()) {
                let Some(input) = input else {
                    return Err(Error::Config("--input is required with a refiner checkpoint".into()).into());
                };
                let renders = if input.is_dir() { read_pgm_dir(&input)? } else { vec![(file_name(&input), read_pgm(&input)?)] };
                let out = prepare_out(&common, "generate", &cfg, &[("input", input.display().to_string())])?;
                for (name, img) in &renders {
                    let refined = g.refine(&[img])?.remove(0);
                    write_pgm(out.join(name), &refined, depth)?;
                }
                Ok(format!("refined {} images into {}", renders.len(), out.display()))
            } else if let Ok(b) = BaselineGenerator::from_params(params) {
                let seed = common.seed.unwrap_or(0);
                let out = prepare_out(&common, "generate", &cfg, &[("seed", seed.to_string()), ("count", count.to_string())])?;
                for (i, img) in b.generate(count, seed)?.iter().enumerate() {
                    write_pgm(out.join(format!("sample_{i:05}.pgm")), img, depth)?;
                }
                Ok(format!("sampled {count} images into {}", out.display()))
            } else {
                Err(Error::Config("--checkpoint holds neither a refiner nor a baseline generator".into()).into())
            }
        }

        Command::EvalFid { common, a, b, checkpoint } => {
            let cfg = load_config(&common)?;
            let phi = Autoencoder::from_params(required_checkpoint(checkpoint.as_deref(), "--checkpoint", "eval-fid needs an autoencoder")?)?;
            let (ia, ib) = (read_pgm_dir(&a)?, read_pgm_dir(&b)?);
            let out = prepare_out(&common, "eval-fid", &cfg, &[("a", a.display().to_string()), ("b", b.display().to_string())])?;
            let sa = feature_stats(&refs(&ia), &phi)?;
            let sb = feature_stats(&refs(&ib), &phi)?;
            let d = fid(&sa, &sb)?;
            write_text(&out.join("fid.csv"), &format!("a,b,n_a,n_b,fid\n{},{},{},{},{d}\n", a.display(), b.display(), ia.len(), ib.len()))?;
            Ok(format!("FID = {d:.6} ({} vs {} images)", ia.len(), ib.len()))
        }

        Command::EvalNn { common, query, data, k, metric, checkpoint } => {
            let cfg = load_config(&common)?;
            let metric: Metric = metric.parse()?;
            let phi = match (metric, checkpoint.as_deref()) {
                (Metric::Phi, c) => Some(Autoencoder::from_params(required_checkpoint(c, "--checkpoint", "--metric phi needs an autoencoder")?)?),
                (Metric::ImageL2, _) => None,
            };
            let queries = if query.is_dir() { read_pgm_dir(&query)? } else { vec![(file_name(&query), read_pgm(&query)?)] };
            let pool = read_pgm_dir(&data)?;
            let out = prepare_out(&common, "eval-nn", &cfg, &[("query", query.display().to_string()), ("data", data.display().to_string())])?;
            let pool_refs = refs(&pool);
            let mut w = csv_writer(&out.join("neighbors.csv"))?;
            w.write_record(["query_id", "rank", "neighbor_id", "distance"]).map_err(csv_err)?;
            for (qname, q) in &queries {
                for (rank, (j, dist)) in nearest_neighbors(q, &pool_refs, k, metric, phi.as_ref())?.into_iter().enumerate() {
                    w.write_record([qname.as_str(), &(rank + 1).to_string(), &pool[j].0, &dist.to_string()]).map_err(csv_err)?;
                }
            }
            w.flush().map_err(|e| Error::Io { path: out.join("neighbors.csv"), source: e })?;
            Ok(format!("{k} nearest neighbours of {} queries among {} images", queries.len(), pool.len()))
        }

        Command::EvalTsne { common, input, checkpoint, perplexity, iterations } => {
            let mut cfg = load_config(&common)?;
            set(&mut cfg.tsne.perplexity, perplexity);
            set(&mut cfg.tsne.iterations, iterations);
            set(&mut cfg.tsne.seed, common.seed);
            let phi = match checkpoint.as_deref() {
                Some(p) => Some(Autoencoder::from_params(required_checkpoint(Some(p), "--checkpoint", "")?)?),
                None => None,
            };
            let mut names = Vec::new();
            let mut features = Vec::new();
            for (g, dir) in input.iter().enumerate() {
                let imgs = read_pgm_dir(dir)?;
                let f = match &phi {
                    Some(ae) => ae.features(&refs(&imgs))?,
                    None => imgs.iter().map(|(_, im)| im.pixels().to_vec()).collect(),
                };
                names.extend(imgs.into_iter().map(|(n, _)| (g, n)));
                features.extend(f);
            }
            let groups: Vec<String> = input.iter().map(|p| p.display().to_string()).collect();
            let out = prepare_out(&common, "eval-tsne", &cfg, &[("input", groups.join(";"))])?;
            let emb = tsne(&features, &cfg.tsne)?;
            let mut w = csv_writer(&out.join("tsne.csv"))?;
            w.write_record(["group", "file", "x", "y"]).map_err(csv_err)?;
            for ((g, name), p) in names.iter().zip(&emb.points) {
                w.write_record([groups[*g].as_str(), name, &p[0].to_string(), &p[1].to_string()]).map_err(csv_err)?;
            }
            w.flush().map_err(|e| Error::Io { path: out.join("tsne.csv"), source: e })?;
            let kl = emb.kl_history.last().copied().unwrap_or(f64::NAN);
            Ok(format!("embedded {} points from {} groups; final KL {kl:.4}", features.len(), groups.len()))
        }
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn apply_optim(tc: &mut TrainConfig, o: &Optim, seed: Option<u64>) {
    set(&mut tc.iterations, o.iterations);
    set(&mut tc.batch_size, o.batch_size);
    set(&mut tc.lr, o.lr);
    set(&mut tc.seed, seed);
}

fn apply_critic(tc: &mut TrainConfig, c: &CriticFlags) {
    set(&mut tc.n_critic, c.n_critic);
    set(&mut tc.lambda_gp, c.lambda_gp);
    set(&mut tc.checkpoint_every, c.checkpoint_every);
    match c.gp_mode.as_deref() {
        Some("interpolated") => tc.gp_mode = GpMode::Interpolated,
        Some(_) => tc.gp_mode = GpMode::Generated,
        None => {}
    }
    if let Some(clip) = c.weight_clip {
        tc.lipschitz_mode = if clip > 0.0 { LipschitzMode::WeightClipping(clip) } else { LipschitzMode::GradientPenalty };
    }
}

fn load_config(common: &Common) -> Result<ConfigFile> {
    Ok(match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
            parse_config(&text).map_err(|e| match e {
                Error::Parse { line, msg } => Error::Parse { line, msg: format!("{}: {msg}", path.display()) },
                other => other,
            })?
        }
        None => ConfigFile::default(),
    })
}

/// Creates the output directory and echoes the effective configuration into it.
fn prepare_out(common: &Common, command: &str, cfg: &ConfigFile, extra: &[(&str, String)]) -> Result<PathBuf> {
    let out = common.out.clone();
    std::fs::create_dir_all(&out).map_err(|e| Error::Io { path: out.clone(), source: e })?;
    let mut text = format!("# sasforge {command}\n");
    for (k, v) in extra {
        text.push_str(&format!("# {k} = {v}\n"));
    }
    text.push('\n');
    text.push_str(&cfg.to_text());
    write_text(&out.join(RUN_CONFIG_FILE), &text)?;
    Ok(out)
}

fn required_checkpoint(path: Option<&Path>, flag: &str, why: &str) -> Result<ParamSet> {
    let Some(path) = path else {
        return Err(Error::Config(format!("{flag} is required: {why}")).into());
    };
    if !path.is_file() {
        return Err(Error::Config(format!("{flag} {}: no such checkpoint file", path.display())).into());
    }
    Ok(load_checkpoint(path)?)
}

fn load_dataset(dir: &Path, role: Role) -> Result<Dataset> {
    let images = read_pgm_dir(dir)?.into_iter().map(|(_, im)| im).collect();
    Ok(Dataset::new(role, images)?)
}

fn refs(named: &[(String, Image)]) -> Vec<&Image> {
    named.iter().map(|(_, im)| im).collect()
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "image.pgm".into())
}

fn bit_depth(bits: u8) -> BitDepth {
    if bits == 16 {
        BitDepth::Sixteen
    } else {
        BitDepth::Eight
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(|e| anyhow::Error::from(Error::Io { path: path.to_path_buf(), source: e.into() }))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Data(format!("CSV write failed: {e}"))
}

fn last_metrics(m: &[sasforge::train::IterationMetrics]) -> String {
    match m.last() {
        Some(l) => format!("critic loss {:.4}, generator loss {:.4}, critic grad norm {:.3}", l.critic_loss, l.gen_loss, l.mean_grad_norm),
        None => "no iterations run".into(),
    }
}
