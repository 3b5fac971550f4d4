//! Training loops: the autoencoder (L2 reconstruction), the render-conditioned
//! WGAN-GP refiner with a feature-preservation penalty, and the latent-noise
//! baseline.
//!
//! All loops are single-threaded at the loop level (kernels may use the
//! data-parallel helpers) and fully determined by `TrainConfig::seed`.

mod losses;

pub use losses::{critic_grad_norms, critic_loss, generator_loss, CriticFn, CriticLoss, FeatureFn, GeneratorLoss};

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::autodiff::{adam_step, backward, mean, no_grad, square, sub, AdamConfig, AdamState, Tensor};
use crate::error::{Error, Result};
use crate::io::{save_checkpoint, Manifest, Role};
use crate::models::{
    Autoencoder, AutoencoderConfig, BaselineConfig, BaselineGenerator, Critic, CriticConfig, Generator, GeneratorConfig,
    Network, ParamSet,
};
use crate::render::Image;
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GpMode {
    /// Penalty evaluated at the generated batch.
    #[default]
    Generated,
    /// Penalty at random convex combinations of real and generated samples.
    Interpolated,
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum LipschitzMode {
    #[default]
    GradientPenalty,
    /// Clamp every critic parameter into `[−c, c]` after each update.
    WeightClipping(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub batch_size: usize,
    pub lambda_gp: f64,
    pub n_critic: usize,
    pub mu_phi: f64,
    /// Feature-distance threshold; only reported.
    pub gamma: f64,
    pub iterations: usize,
    pub seed: u64,
    pub gp_mode: GpMode,
    pub lipschitz_mode: LipschitzMode,
    /// Checkpoint period in iterations; 0 disables periodic checkpoints.
    pub checkpoint_every: usize,
    /// Where periodic and diagnostic checkpoints go.
    pub checkpoint_dir: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-3,
            beta1: 0.5,
            beta2: 0.9,
            batch_size: 4,
            lambda_gp: 10.0,
            n_critic: 5,
            mu_phi: 0.01,
            gamma: 5.0,
            iterations: 3000,
            seed: 0,
            gp_mode: GpMode::Generated,
            lipschitz_mode: LipschitzMode::GradientPenalty,
            checkpoint_every: 0,
            checkpoint_dir: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [("lr", self.lr), ("gamma", self.gamma)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in [("lambda_gp", self.lambda_gp), ("mu_phi", self.mu_phi)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!("{name} must be ≥ 0, got {v}")));
            }
        }
        for (name, v) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Validation(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        if self.batch_size == 0 || self.n_critic == 0 {
            return Err(Error::Validation("batch_size and n_critic must be ≥ 1".into()));
        }
        if let LipschitzMode::WeightClipping(c) = self.lipschitz_mode {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Validation(format!("clip value must be > 0, got {c}")));
            }
        }
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig { lr: self.lr, beta1: self.beta1, beta2: self.beta2, ..Default::default() }
    }
}

/// Images of one domain with their provenance.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub role: Role,
    pub images: Vec<Image>,
    pub manifest: Option<Manifest>,
}

impl Dataset {
    pub fn new(role: Role, images: Vec<Image>) -> Result<Self> {
        if let Some(first) = images.first() {
            let size = (first.width(), first.height());
            if let Some(i) = images.iter().position(|im| (im.width(), im.height()) != size) {
                return Err(Error::Data(format!(
                    "image {i} is {}x{}, expected {}x{}",
                    images[i].width(),
                    images[i].height(),
                    size.0,
                    size.1
                )));
            }
        }
        Ok(Dataset { role, images, manifest: None })
    }

    pub fn with_manifest(mut self, manifest: Manifest) -> Self {
        self.manifest = Some(manifest);
        self
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Side length of the (square) images.
    pub fn image_size(&self) -> Option<usize> {
        self.images.first().map(|i| i.width())
    }

    fn require_nonempty(&self, what: &str) -> Result<()> {
        if self.is_empty() {
            return Err(Error::Data(format!("{what} dataset is empty")));
        }
        Ok(())
    }

    pub fn refs(&self) -> Vec<&Image> {
        self.images.iter().collect()
    }
}

/// Samples a batch uniformly with replacement.
struct Sampler {
    data: Vec<Vec<f32>>,
    side: usize,
}

impl Sampler {
    fn new(ds: &Dataset) -> Self {
        Sampler { data: ds.images.iter().map(|i| i.to_f32()).collect(), side: ds.image_size().unwrap_or(0) }
    }

    fn batch(&self, n: usize, rng: &mut ChaCha8Rng) -> Result<Tensor<f32>> {
        let mut v = Vec::with_capacity(n * self.side * self.side);
        for _ in 0..n {
            v.extend_from_slice(&self.data[rng.random_range(0..self.data.len())]);
        }
        Tensor::constant(&[n, 1, self.side, self.side], v)
    }
}

/// One row of the training log.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationMetrics {
    pub iter: usize,
    pub critic_loss: f64,
    pub gen_loss: f64,
    pub gp_term: f64,
    pub phi_term: f64,
    pub mean_grad_norm: f64,
    /// Fraction of the generator batch with `‖Δφ‖ < γ`.
    pub phi_within_gamma: f64,
}

impl IterationMetrics {
    pub const CSV_HEADER: &'static str = "iter,critic_loss,gen_loss,gp_term,phi_term,mean_grad_norm";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.iter, self.critic_loss, self.gen_loss, self.gp_term, self.phi_term, self.mean_grad_norm
        )
    }

    fn all_finite(&self) -> bool {
        [self.critic_loss, self.gen_loss, self.gp_term, self.phi_term, self.mean_grad_norm].iter().all(|v| v.is_finite())
    }
}

pub fn write_metrics_csv(path: impl AsRef<Path>, rows: &[IterationMetrics]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from(IterationMetrics::CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Streams metrics rows to a CSV file as training runs.
pub struct CsvLog {
    file: std::io::BufWriter<std::fs::File>,
    path: PathBuf,
}

impl CsvLog {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut log = CsvLog { file: std::io::BufWriter::new(f), path };
        log.line(IterationMetrics::CSV_HEADER)?;
        Ok(log)
    }

    fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.file, "{s}").and_then(|_| self.file.flush()).map_err(|e| Error::io(&self.path, e))
    }

    pub fn append(&mut self, m: &IterationMetrics) -> Result<()> {
        self.line(&m.csv_row())
    }
}

/// Observation points inside the GAN loops.
pub trait TrainHooks {
    fn after_critic_step(&mut self, _critic: &Critic) {}
    fn after_iteration(&mut self, _metrics: &IterationMetrics) -> Result<()> {
        Ok(())
    }
}

impl TrainHooks for () {}

impl TrainHooks for CsvLog {
    fn after_iteration(&mut self, m: &IterationMetrics) -> Result<()> {
        self.append(m)
    }
}

/// Optimiser state bound to a parameter set.
struct Trainer {
    state: AdamState<f32>,
    adam: AdamConfig,
}

impl Trainer {
    fn new(params: &ParamSet, adam: AdamConfig) -> Self {
        Trainer { state: AdamState::new(&params.buffers()), adam }
    }

    fn step(&mut self, params: &mut ParamSet, grads: Vec<Tensor<f32>>) -> Result<()> {
        let mut bufs = params.buffers();
        let g: Vec<Vec<f32>> = grads.into_iter().map(|t| t.to_vec()).collect();
        adam_step(&mut bufs, &g, &mut self.state, &self.adam)?;
        params.set_buffers(bufs)
    }
}

fn clip(params: &mut ParamSet, c: f64) {
    let c = c as f32;
    for p in params.iter_mut() {
        for v in &mut p.data {
            *v = v.clamp(-c, c);
        }
    }
}

// ---------------------------------------------------------------- autoencoder

#[derive(Clone, Debug)]
pub struct AutoencoderRun {
    pub model: Autoencoder,
    pub losses: Vec<f64>,
}

/// Minimises mean squared reconstruction error with Adam.
pub fn train_autoencoder(data: &Dataset, ae_cfg: AutoencoderConfig, cfg: &TrainConfig) -> Result<AutoencoderRun> {
    cfg.validate()?;
    data.require_nonempty("autoencoder training")?;
    if data.image_size() != Some(ae_cfg.image_size) {
        return Err(Error::Data(format!(
            "autoencoder expects {0}x{0} images, dataset has {1:?}",
            ae_cfg.image_size,
            data.image_size()
        )));
    }
    let mut model = Autoencoder::new(ae_cfg, seed::derive(cfg.seed, 0))?;
    let mut opt = Trainer::new(model.params(), cfg.adam());
    let sampler = Sampler::new(data);
    let mut rng = seed::rng(seed::derive(cfg.seed, 1));
    let mut losses = Vec::with_capacity(cfg.iterations);
    for it in 0..cfg.iterations {
        let x = sampler.batch(cfg.batch_size, &mut rng)?;
        let w = model.params().tensors::<f32>(true)?;
        let loss = mean(&square(&sub(&model.reconstruct(&w, &x)?, &x)?));
        let l = loss.item()? as f64;
        if !l.is_finite() {
            return Err(Error::NumericalAbort(format!("autoencoder loss is {l} at iteration {it}")));
        }
        losses.push(l);
        let grads = backward(&loss, &w, false)?;
        opt.step(model.params_mut(), grads)?;
    }
    Ok(AutoencoderRun { model, losses })
}

/// Mean squared reconstruction error over `images`.
pub fn reconstruction_mse(model: &Autoencoder, images: &[&Image]) -> Result<f64> {
    let w = model.weights::<f32>()?;
    let mut total = 0.0;
    let mut count = 0usize;
    no_grad(|| -> Result<()> {
        for chunk in images.chunks(16) {
            let x = crate::models::images_to_tensor::<f32>(chunk)?;
            let r = model.reconstruct(&w, &x)?;
            total += r.data().iter().zip(x.data()).map(|(a, b)| ((a - b) as f64).powi(2)).sum::<f64>();
            count += x.len();
        }
        Ok(())
    })?;
    Ok(total / count.max(1) as f64)
}

/// Error of predicting every image in `eval` by the pixelwise mean of `train`.
pub fn mean_image_mse(train: &[&Image], eval: &[&Image]) -> Result<f64> {
    let first = train.first().ok_or_else(|| Error::Data("empty training set".into()))?;
    let n = first.pixels().len();
    let mut m = vec![0.0; n];
    for img in train {
        for (a, b) in m.iter_mut().zip(img.pixels()) {
            *a += b / train.len() as f64;
        }
    }
    let total: f64 = eval.iter().map(|img| img.pixels().iter().zip(&m).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).sum();
    Ok(total / (eval.len() * n).max(1) as f64)
}

// ------------------------------------------------------------------------ GANs

#[derive(Clone, Debug)]
pub struct SasGanRun {
    pub generator: Generator,
    pub critic: Critic,
    pub metrics: Vec<IterationMetrics>,
}

#[derive(Clone, Debug)]
pub struct BaselineRun {
    pub generator: BaselineGenerator,
    pub critic: Critic,
    pub metrics: Vec<IterationMetrics>,
}

fn penalty_points(real: &Tensor<f32>, fake: &Tensor<f32>, mode: GpMode, rng: &mut ChaCha8Rng) -> Result<Option<Tensor<f32>>> {
    match mode {
        GpMode::Generated => Ok(None),
        GpMode::Interpolated => {
            let n = real.shape()[0];
            let per = real.len() / n;
            let mut v = Vec::with_capacity(real.len());
            for i in 0..n {
                let e: f32 = rng.random();
                let (r, f) = (&real.data()[i * per..(i + 1) * per], &fake.data()[i * per..(i + 1) * per]);
                v.extend(r.iter().zip(f).map(|(a, b)| e * a + (1.0 - e) * b));
            }
            Tensor::constant(real.shape(), v).map(Some)
        }
    }
}

/// Critic update shared by both GANs; returns `(loss, gp_term, mean_grad_norm)`.
fn critic_update(
    critic: &mut Critic,
    opt: &mut Trainer,
    real: &Tensor<f32>,
    fake: &Tensor<f32>,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(f64, f64, f64)> {
    let w = critic.params().tensors::<f32>(true)?;
    let c = &*critic;
    let d = |x: &Tensor<f32>| c.forward(&w, x);
    let points = penalty_points(real, fake, cfg.gp_mode, rng)?;
    let lambda = match cfg.lipschitz_mode {
        LipschitzMode::GradientPenalty => cfg.lambda_gp,
        LipschitzMode::WeightClipping(_) => 0.0,
    };
    let loss = critic_loss(&d, real, fake, points.as_ref(), lambda)?;
    let total = loss.total.item()? as f64;
    if total.is_finite() {
        let grads = backward(&loss.total, &w, false)?;
        opt.step(critic.params_mut(), grads)?;
        if let LipschitzMode::WeightClipping(c) = cfg.lipschitz_mode {
            clip(critic.params_mut(), c);
        }
    }
    Ok((total, loss.gp_term, loss.mean_grad_norm))
}

fn save_pair(dir: &Path, tag: &str, gen: &ParamSet, critic: &ParamSet) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    save_checkpoint(dir.join(format!("generator_{tag}.sfw")), gen)?;
    save_checkpoint(dir.join(format!("critic_{tag}.sfw")), critic)
}

fn abort_nan(cfg: &TrainConfig, m: &IterationMetrics, gen: &ParamSet, critic: &ParamSet) -> Error {
    let mut msg = format!(
        "non-finite training quantity at iteration {}: critic_loss={} gen_loss={} gp_term={} phi_term={} mean_grad_norm={}",
        m.iter, m.critic_loss, m.gen_loss, m.gp_term, m.phi_term, m.mean_grad_norm
    );
    if let Some(dir) = &cfg.checkpoint_dir {
        match save_pair(dir, "nan_abort", gen, critic) {
            Ok(()) => msg.push_str(&format!("; diagnostic checkpoints in {}", dir.display())),
            Err(e) => msg.push_str(&format!("; diagnostic checkpoint failed: {e}")),
        }
    }
    Error::NumericalAbort(msg)
}

fn maybe_checkpoint(cfg: &TrainConfig, iter: usize, gen: &ParamSet, critic: &ParamSet) -> Result<()> {
    match &cfg.checkpoint_dir {
        Some(dir) if cfg.checkpoint_every > 0 && (iter + 1) % cfg.checkpoint_every == 0 => {
            save_pair(dir, &format!("{:06}", iter + 1), gen, critic)
        }
        _ => Ok(()),
    }
}

/// Trains the refiner against `real` with the frozen autoencoder `phi` as
/// the content-preservation signal.
pub fn train_sasgan(
    rendered: &Dataset,
    real: &Dataset,
    phi: Option<&Autoencoder>,
    gen_cfg: GeneratorConfig,
    cfg: &TrainConfig,
    hooks: &mut dyn TrainHooks,
) -> Result<SasGanRun> {
    cfg.validate()?;
    rendered.require_nonempty("rendered")?;
    real.require_nonempty("real")?;
    if rendered.image_size() != real.image_size() {
        return Err(Error::Data(format!(
            "rendered images are {:?} pixels wide, real images {:?}",
            rendered.image_size(),
            real.image_size()
        )));
    }
    let side = real.image_size().unwrap_or(0);
    if let Some(ae) = phi {
        if ae.config().image_size != side {
            return Err(Error::Config(format!("autoencoder expects {} px images, data has {side}", ae.config().image_size)));
        }
    } else if cfg.mu_phi > 0.0 {
        return Err(Error::Config("train_sasgan needs a trained autoencoder when mu_phi > 0".into()));
    }
    let mut generator = Generator::new(gen_cfg, seed::derive(cfg.seed, 10))?;
    let critic_cfg = default_critic_config(side);
    let mut critic = Critic::new(critic_cfg, seed::derive(cfg.seed, 11))?;
    let mut g_opt = Trainer::new(generator.params(), cfg.adam());
    let mut d_opt = Trainer::new(critic.params(), cfg.adam());
    let renders = Sampler::new(rendered);
    let reals = Sampler::new(real);
    let mut rng = seed::rng(seed::derive(cfg.seed, 12));
    let ae_w = phi.map(|a| a.weights::<f32>()).transpose()?;
    let mut metrics = Vec::with_capacity(cfg.iterations);

    for iter in 0..cfg.iterations {
        let (mut c_loss, mut gp, mut gnorm) = (0.0, 0.0, 0.0);
        for _ in 0..cfg.n_critic {
            let x_real = reals.batch(cfg.batch_size, &mut rng)?;
            let p = renders.batch(cfg.batch_size, &mut rng)?;
            let gw = generator.weights::<f32>()?;
            let fake = no_grad(|| generator.forward(&gw, &p))?;
            let (l, g, n) = critic_update(&mut critic, &mut d_opt, &x_real, &fake, cfg, &mut rng)?;
            hooks.after_critic_step(&critic);
            c_loss += l;
            gp += g;
            gnorm += n;
        }
        let k = cfg.n_critic as f64;

        let p = renders.batch(cfg.batch_size, &mut rng)?;
        let gw = generator.params().tensors::<f32>(true)?;
        let fake = generator.forward(&gw, &p)?;
        let cw = critic.weights::<f32>()?;
        let d = |x: &Tensor<f32>| critic.forward(&cw, x);
        let feat = ae_w.as_ref().zip(phi).map(|(w, ae)| move |x: &Tensor<f32>| ae.encode(w, x));
        let feat_ref = feat.as_ref().map(|f| f as &FeatureFn<'_, f32>);
        let gl = generator_loss(&d, feat_ref, &p, &fake, cfg.mu_phi)?;
        let g_total = gl.total.item()? as f64;
        let m = IterationMetrics {
            iter,
            critic_loss: c_loss / k,
            gen_loss: g_total,
            gp_term: gp / k,
            phi_term: gl.phi_term,
            mean_grad_norm: gnorm / k,
            phi_within_gamma: if gl.phi_dist.is_empty() {
                1.0
            } else {
                gl.phi_dist.iter().filter(|&&d| d < cfg.gamma).count() as f64 / gl.phi_dist.len() as f64
            },
        };
        if !m.all_finite() {
            return Err(abort_nan(cfg, &m, generator.params(), critic.params()));
        }
        let grads = backward(&gl.total, &gw, false)?;
        g_opt.step(generator.params_mut(), grads)?;
        maybe_checkpoint(cfg, iter, generator.params(), critic.params())?;
        hooks.after_iteration(&m)?;
        metrics.push(m);
    }
    Ok(SasGanRun { generator, critic, metrics })
}

/// Trains the latent-noise baseline against `real`.
pub fn train_dcgan(
    real: &Dataset,
    base_cfg: BaselineConfig,
    cfg: &TrainConfig,
    hooks: &mut dyn TrainHooks,
) -> Result<BaselineRun> {
    cfg.validate()?;
    real.require_nonempty("real")?;
    let side = real.image_size().unwrap_or(0);
    if base_cfg.image_size != side {
        return Err(Error::Data(format!("baseline generator makes {} px images, data has {side}", base_cfg.image_size)));
    }
    let mut generator = BaselineGenerator::new(base_cfg, seed::derive(cfg.seed, 20))?;
    let critic_cfg = default_critic_config(side);
    let mut critic = Critic::new(critic_cfg, seed::derive(cfg.seed, 21))?;
    let mut g_opt = Trainer::new(generator.params(), cfg.adam());
    let mut d_opt = Trainer::new(critic.params(), cfg.adam());
    let reals = Sampler::new(real);
    let mut rng = seed::rng(seed::derive(cfg.seed, 22));
    let mut metrics = Vec::with_capacity(cfg.iterations);

    for iter in 0..cfg.iterations {
        let (mut c_loss, mut gp, mut gnorm) = (0.0, 0.0, 0.0);
        for _ in 0..cfg.n_critic {
            let x_real = reals.batch(cfg.batch_size, &mut rng)?;
            let z = generator.sample_latent::<f32>(cfg.batch_size, &mut rng)?;
            let gw = generator.weights::<f32>()?;
            let fake = no_grad(|| generator.forward(&gw, &z))?;
            let (l, g, n) = critic_update(&mut critic, &mut d_opt, &x_real, &fake, cfg, &mut rng)?;
            hooks.after_critic_step(&critic);
            c_loss += l;
            gp += g;
            gnorm += n;
        }
        let k = cfg.n_critic as f64;
        let z = generator.sample_latent::<f32>(cfg.batch_size, &mut rng)?;
        let gw = generator.params().tensors::<f32>(true)?;
        let fake = generator.forward(&gw, &z)?;
        let cw = critic.weights::<f32>()?;
        let d = |x: &Tensor<f32>| critic.forward(&cw, x);
        let gl = generator_loss(&d, None, &fake, &fake, 0.0)?;
        let m = IterationMetrics {
            iter,
            critic_loss: c_loss / k,
            gen_loss: gl.total.item()? as f64,
            gp_term: gp / k,
            phi_term: 0.0,
            mean_grad_norm: gnorm / k,
            phi_within_gamma: 1.0,
        };
        if !m.all_finite() {
            return Err(abort_nan(cfg, &m, generator.params(), critic.params()));
        }
        let grads = backward(&gl.total, &gw, false)?;
        g_opt.step(generator.params_mut(), grads)?;
        maybe_checkpoint(cfg, iter, generator.params(), critic.params())?;
        hooks.after_iteration(&m)?;
        metrics.push(m);
    }
    Ok(BaselineRun { generator, critic, metrics })
}

/// Fraction of held-out batch pairs on which the critic scores real above
/// generated, i.e. `mean D(real) − mean D(fake) ≥ 0`.
pub fn critic_gap_sign_rate(critic: &Critic, real: &[&Image], fake: &[&Image], batch: usize) -> Result<f64> {
    let w = critic.weights::<f32>()?;
    let score = |imgs: &[&Image]| -> Result<f64> {
        let x = crate::models::images_to_tensor::<f32>(imgs)?;
        Ok(no_grad(|| critic.forward(&w, &x))?.data().iter().map(|&v| v as f64).sum::<f64>() / imgs.len() as f64)
    };
    let pairs: Vec<_> = real.chunks(batch).zip(fake.chunks(batch)).collect();
    if pairs.is_empty() {
        return Err(Error::Data("no held-out batches".into()));
    }
    let mut positive = 0;
    for (r, f) in &pairs {
        if score(r)? - score(f)? >= 0.0 {
            positive += 1;
        }
    }
    Ok(positive as f64 / pairs.len() as f64)
}

/// Critic configuration used by the training loops for `side`-pixel images.
pub fn default_critic_config(side: usize) -> CriticConfig {
    if side >= 256 {
        CriticConfig { image_size: side, ..CriticConfig::full() }
    } else {
        CriticConfig { image_size: side, ..CriticConfig::default() }
    }
}
