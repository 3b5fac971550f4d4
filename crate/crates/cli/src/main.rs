//! `sasforge`: render seafloor scenes, degrade them into a pseudo-real
//! domain, train the refiner and its baselines, and evaluate the results.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sasforge::Error;

#[derive(Parser, Debug)]
#[command(name = "sasforge", version, about = "Render-to-SAS image synthesis pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every command.
#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Configuration file; command-line flags override its values.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Seed of the command's random stream (overrides the config).
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory; created if missing.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

/// Optimiser flags shared by the training commands.
#[derive(Args, Clone, Debug, Default)]
pub struct Optim {
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
}

/// Critic flags shared by both GANs.
#[derive(Args, Clone, Debug, Default)]
pub struct CriticFlags {
    /// Critic steps per generator step.
    #[arg(long)]
    pub n_critic: Option<usize>,
    /// Gradient-penalty weight.
    #[arg(long)]
    pub lambda_gp: Option<f64>,
    /// Where the penalty is evaluated: `generated` or `interpolated`.
    #[arg(long, value_parser = ["generated", "interpolated"])]
    pub gp_mode: Option<String>,
    /// Clip critic weights to ±C instead of penalising gradients (0 turns clipping off).
    #[arg(long, value_name = "C")]
    pub weight_clip: Option<f64>,
    /// Save generator and critic every N iterations (0 = never).
    #[arg(long, value_name = "N")]
    pub checkpoint_every: Option<usize>,
}

fn parse_size(s: &str) -> Result<usize, String> {
    match s {
        "64" => Ok(64),
        "256" => Ok(256),
        _ => Err(format!("size must be 64 or 256, got {s}")),
    }
}

fn parse_depth(s: &str) -> Result<u8, String> {
    match s {
        "8" => Ok(8),
        "16" => Ok(16),
        _ => Err(format!("depth must be 8 or 16, got {s}")),
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Render a dataset of seafloor chips with a manifest.
    RenderDataset {
        #[command(flatten)]
        common: Common,
        /// Number of images.
        #[arg(long, default_value_t = 850)]
        count: usize,
        /// Image side in pixels.
        #[arg(long, value_parser = parse_size)]
        size: Option<usize>,
        /// Re-render the records of an existing manifest instead of sampling new ones.
        #[arg(long, value_name = "PATH")]
        manifest: Option<PathBuf>,
        /// PGM bit depth.
        #[arg(long, value_parser = parse_depth, default_value = "8")]
        depth: u8,
    },
    /// Apply speckle, blur and contrast to every image of a directory.
    MakePseudoreal {
        #[command(flatten)]
        common: Common,
        /// Directory of clean PGM images.
        #[arg(long, value_name = "DIR")]
        input: PathBuf,
        /// Number of speckle looks L.
        #[arg(long)]
        looks: Option<u32>,
        /// Along-track blur sigma (pixels).
        #[arg(long)]
        blur_along: Option<f64>,
        /// Across-track blur sigma (pixels).
        #[arg(long)]
        blur_across: Option<f64>,
        /// Contrast exponent.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, value_parser = parse_depth, default_value = "8")]
        depth: u8,
    },
    /// Train the feature autoencoder.
    TrainAe {
        #[command(flatten)]
        common: Common,
        /// Training images.
        #[arg(long, value_name = "DIR")]
        data: PathBuf,
        #[command(flatten)]
        optim: Optim,
    },
    /// Train the render-conditioned refiner.
    TrainGan {
        #[command(flatten)]
        common: Common,
        /// Rendered images (generator input).
        #[arg(long, value_name = "DIR")]
        rendered: PathBuf,
        /// Real-domain images (critic target).
        #[arg(long, value_name = "DIR")]
        real: PathBuf,
        /// Trained autoencoder checkpoint.
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
        /// Weight of the feature-preservation term.
        #[arg(long)]
        mu_phi: Option<f64>,
        #[command(flatten)]
        optim: Optim,
        #[command(flatten)]
        critic: CriticFlags,
    },
    /// Train the latent-noise baseline generator.
    TrainDcgan {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "DIR")]
        real: PathBuf,
        #[command(flatten)]
        optim: Optim,
        #[command(flatten)]
        critic: CriticFlags,
    },
    /// Refine renders with a refiner checkpoint, or sample a baseline checkpoint.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Generator or baseline checkpoint.
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
        /// A render or a directory of renders (refiner only).
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
        /// Number of samples (baseline only).
        #[arg(long, default_value_t = 16)]
        count: usize,
        #[arg(long, value_parser = parse_depth, default_value = "8")]
        depth: u8,
    },
    /// Feature-space Fréchet distance between two image directories.
    EvalFid {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "DIR")]
        a: PathBuf,
        #[arg(long, value_name = "DIR")]
        b: PathBuf,
        /// Autoencoder checkpoint providing the features.
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
    },
    /// Nearest training images of each query.
    EvalNn {
        #[command(flatten)]
        common: Common,
        /// A query image or a directory of them.
        #[arg(long, value_name = "PATH")]
        query: PathBuf,
        /// Images searched.
        #[arg(long, value_name = "DIR")]
        data: PathBuf,
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Distance: `l2` on pixels or `phi` on autoencoder features.
        #[arg(long, value_parser = ["l2", "phi"], default_value = "l2")]
        metric: String,
        /// Autoencoder checkpoint (required for `--metric phi`).
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
    },
    /// Two-dimensional t-SNE embedding of one or more image directories.
    EvalTsne {
        #[command(flatten)]
        common: Common,
        /// Image directory; repeat to embed several groups together.
        #[arg(long, value_name = "DIR", required = true)]
        input: Vec<PathBuf>,
        /// Autoencoder checkpoint; without one, raw pixels are embedded.
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        perplexity: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
    },
}

/// Exit status for an error: 2 usage/configuration, 3 data or I/O,
/// 4 numerical abort, 1 anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::NumericalAbort(_)) => 4,
        Some(Error::Data(_) | Error::Io { .. } | Error::Shape { .. }) => 3,
        Some(Error::Parameter(_) | Error::Validation(_) | Error::Config(_) | Error::Parse { .. } | Error::Contract(_)) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match sasforge::par::with_env_threads(|| commands::run(cli.command)) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
