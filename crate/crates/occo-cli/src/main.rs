//! `occo`: occlusion dataset generation, completion pre-training, completion
//! inference, and encoder probes, glued into one reproducible binary.
//!
//! Exit codes: 0 ok, 2 input error, 3 numeric failure, 4 artifact mismatch.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::FileConfig;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_ARTIFACT: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub msg: String,
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, msg: msg.into() }
    }

    pub fn from_core(err: occo_core::Error) -> Self {
        use occo_core::Error as E;
        let code = match &err {
            E::NonFiniteLoss { .. } | E::NonPositiveDepth { .. } | E::AllOccluded => EXIT_NUMERIC,
            E::DimsMismatch(_) | E::ConfigMismatch(_) | E::StaleCache(_) => EXIT_ARTIFACT,
            _ => EXIT_INPUT,
        };
        CliError { code, msg: err.to_string() }
    }

    /// For checkpoint paths, a missing file is an artifact problem.
    pub fn from_ckpt(err: occo_core::Error) -> Self {
        match err {
            occo_core::Error::Io(e) => CliError { code: EXIT_ARTIFACT, msg: format!("checkpoint: {e}") },
            other => CliError::from_core(other),
        }
    }
}

impl From<occo_core::Error> for CliError {
    fn from(err: occo_core::Error) -> Self {
        CliError::from_core(err)
    }
}

pub type CliResult = Result<(), CliError>;

#[derive(Parser)]
#[command(name = "occo", version, about = "Occlusion-completion pre-training pipeline")]
struct Cli {
    /// JSON config file; flags override config values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for generation and probing (0 = all cores).
    #[arg(long, global = true, env = "OCCO_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Directory of OFF meshes and/or PLY clouds.
    #[arg(long)]
    input: PathBuf,
    /// Output dataset path (manifest written alongside).
    #[arg(long)]
    out: PathBuf,
    /// Viewpoints per object.
    #[arg(long)]
    views: Option<usize>,
    /// Points sampled per object before occlusion.
    #[arg(long)]
    points: Option<usize>,
    /// Coarse target size.
    #[arg(long)]
    coarse: Option<usize>,
    /// Fine target size.
    #[arg(long)]
    fine: Option<usize>,
    /// Focal length in pixels.
    #[arg(long)]
    f: Option<f64>,
    /// Image width in pixels.
    #[arg(long)]
    w: Option<f64>,
    /// Image height in pixels.
    #[arg(long)]
    h: Option<f64>,
    /// Camera standoff along +z after rotation.
    #[arg(long)]
    standoff: Option<f64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct PretrainArgs {
    /// Input dataset (.occo).
    #[arg(long)]
    data: PathBuf,
    /// Output directory for encoder.ocwt, model.ocwt, log.csv.
    #[arg(long)]
    out: PathBuf,
    /// Training epochs.
    #[arg(long)]
    epochs: Option<usize>,
    /// Batch size.
    #[arg(long)]
    batch: Option<usize>,
    /// Model dims preset: desk, paper, or tiny.
    #[arg(long)]
    dims: Option<String>,
    /// Training seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct CompleteArgs {
    /// Full model checkpoint (model.ocwt).
    #[arg(long)]
    ckpt: PathBuf,
    /// Input cloud (PLY).
    #[arg(long = "in")]
    input: PathBuf,
    /// Output prefix; writes <out>.coarse.ply and <out>.fine.ply.
    #[arg(long)]
    out: PathBuf,
    /// Optional ground-truth cloud; prints Chamfer distances against it.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    /// Encoder checkpoint (encoder.ocwt or model.ocwt).
    #[arg(long)]
    ckpt: PathBuf,
    /// Dataset (.occo) supplying one cloud per object.
    #[arg(long)]
    data: PathBuf,
    /// Label file: one integer per object id, line-aligned.
    #[arg(long)]
    labels: PathBuf,
    /// Cluster count (defaults to the number of distinct labels).
    #[arg(long)]
    k: Option<usize>,
    /// Probe seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct DissectArgs {
    /// Encoder checkpoint.
    #[arg(long)]
    ckpt: PathBuf,
    /// Directory of PLY clouds.
    #[arg(long)]
    data: PathBuf,
    /// Directory of part-label files (.seg, one integer per point).
    #[arg(long)]
    parts: PathBuf,
    /// Top-activation fraction.
    #[arg(long)]
    fraction: Option<f64>,
    /// Detection threshold on mIoU (strict).
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Args, Debug)]
struct LandscapeArgs {
    /// Full model checkpoint (model.ocwt).
    #[arg(long)]
    ckpt: PathBuf,
    /// Dataset (.occo) the loss is averaged over.
    #[arg(long)]
    data: PathBuf,
    /// Odd grid side.
    #[arg(long)]
    grid: Option<usize>,
    /// Direction seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Output directory for OFF meshes, labels.txt, and parts/.
    #[arg(long)]
    out: PathBuf,
    /// Number of objects (round-robin sphere/cube/cylinder).
    #[arg(long)]
    count: Option<usize>,
    /// Generation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write part-labeled clouds (PLY + .seg) with this many points.
    #[arg(long)]
    parts_points: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an occluded completion dataset from meshes or clouds.
    Gen(GenArgs),
    /// Pre-train the completion model on a dataset.
    Pretrain(PretrainArgs),
    /// Complete a single occluded cloud with a trained model.
    Complete(CompleteArgs),
    /// Clustering + linear-probe comparison of pretrained vs random encoder.
    Probe(ProbeArgs),
    /// Network-dissection mIoU of encoder channels against part labels.
    Dissect(DissectArgs),
    /// Filter-normalized loss-landscape slice around a checkpoint.
    Landscape(LandscapeArgs),
    /// Write synthetic benchmark shapes (for demos and smoke tests).
    Synth(SynthArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => match FileConfig::load(path) {
            Ok(c) => c,
            Err(msg) => {
                eprintln!("error: {msg}");
                return ExitCode::from(EXIT_INPUT);
            }
        },
        None => FileConfig::default(),
    };
    let threads = cli.threads.or(config.threads).unwrap_or(0);
    if threads > 0 {
        // Ignore failure: the global pool may already exist under test harnesses.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let result = match cli.command {
        Command::Gen(args) => commands::gen::run(args, &config.gen),
        Command::Pretrain(args) => commands::pretrain::run(args, &config.pretrain),
        Command::Complete(args) => commands::complete::run(args),
        Command::Probe(args) => commands::probe::run(args, &config.probe),
        Command::Dissect(args) => commands::dissect::run(args, &config.dissect),
        Command::Landscape(args) => commands::landscape::run(args, &config.landscape),
        Command::Synth(args) => commands::synth::run(args, &config.synth),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}
