//! `cctk`: compensated convex transforms over grid files.

mod bench;
mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "cctk",
    version,
    about = "Compensated convex transforms on regular grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lower, upper and mixed transforms of a grid.
    Cct {
        #[arg(value_enum)]
        op: CctOp,
        #[command(flatten)]
        opts: Opts,
    },
    /// Ridge, valley, edge and geometric feature maps.
    Feature {
        #[arg(value_enum)]
        op: FeatureOp,
        #[command(flatten)]
        opts: Opts,
    },
    /// Scattered-data approximation, denoising and inpainting.
    Restore {
        #[arg(value_enum)]
        op: RestoreOp,
        #[command(flatten)]
        opts: Opts,
    },
    /// Distance transforms of a mask.
    Dist {
        #[arg(value_enum)]
        op: DistOp,
        #[command(flatten)]
        opts: Opts,
    },
    /// Error measures between grids or masks.
    Metric {
        #[arg(value_enum)]
        op: MetricOp,
        #[command(flatten)]
        opts: Opts,
    },
    /// Built-in experiments on generated inputs.
    Bench {
        #[arg(value_enum)]
        op: BenchOp,
        #[command(flatten)]
        opts: Opts,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum CctOp {
    Lower,
    Upper,
    MixedUl,
    MixedLu,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum FeatureOp {
    Ridge,
    Valley,
    Edge,
    Sr,
    Sv,
    Se,
    D2,
    Corner,
    Intersect,
    Mma,
    Suplevel,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum RestoreOp {
    Denoise,
    Inpaint,
    Interp,
    SmoothInterp,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum DistOp {
    Edt,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum MetricOp {
    Psnr,
    RelL2,
    Hausdorff,
    Ehaus,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum BenchOp {
    Singleton,
    Corner,
    MmaTwoPoint,
    SpNoise,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeArg {
    Moreau,
    IterMoreau,
    Oberman,
    Biconj,
}

/// Flags shared by every subcommand; each one reads the ones it needs.
#[derive(Args, Debug, Clone)]
pub struct Opts {
    /// Curvature parameter λ.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Second scale τ (mixed and stable transforms); defaults to λ.
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    /// Extension level M for the average approximation.
    #[arg(long = "level-m", allow_negative_numbers = true)]
    pub level_m: Option<f64>,
    #[arg(long, value_enum, default_value_t = SchemeArg::Moreau)]
    pub scheme: SchemeArg,
    /// Mirror padding width in cells.
    #[arg(long)]
    pub pad: Option<usize>,
    /// Dual grid spacing for the biconjugate scheme.
    #[arg(long = "dual-h", default_value_t = 1e-3)]
    pub dual_h: f64,
    /// Stopping tolerance for the iterative convex envelope.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Stencil radius for the iterative convex envelope.
    #[arg(long = "stencil-radius", default_value_t = 1)]
    pub stencil_radius: usize,
    /// Iteration cap for the iterative schemes.
    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,
    /// Level for suplevel and support extraction, marker ratio for `intersect`.
    #[arg(long, allow_negative_numbers = true)]
    pub threshold: Option<f64>,
    /// Read `--threshold` as a fraction of the map maximum.
    #[arg(long)]
    pub relative: bool,
    /// Input grid or mask.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Mask, or the second operand of a metric.
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Ground truth for restoration reports.
    #[arg(long = "ref")]
    pub reference: Option<PathBuf>,
    /// Restrict `rel-l2` to the cells of this mask.
    #[arg(long)]
    pub region: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// CSV of intersection markers.
    #[arg(long)]
    pub markers: Option<PathBuf>,
    /// Peak value for PSNR.
    #[arg(long, default_value_t = 255.0)]
    pub peak: f64,
    /// Write distances instead of squared distances.
    #[arg(long)]
    pub sqrt: bool,
    /// Grid size for generated inputs.
    #[arg(long)]
    pub size: Option<usize>,
    /// Noise density for `bench sp-noise`.
    #[arg(long, default_value_t = 0.7)]
    pub noise: f64,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

/// Why a command failed, and so which exit code it gets.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(cct_core::Error),
    Output(String),
}

impl From<cct_core::Error> for Failure {
    fn from(e: cct_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(e) if !e.is_validation() => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Output(m) => f.write_str(m),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Cct { op, opts } => commands::cct(op, &opts),
        Command::Feature { op, opts } => commands::feature(op, &opts),
        Command::Restore { op, opts } => commands::restore(op, &opts),
        Command::Dist { op, opts } => commands::dist(op, &opts),
        Command::Metric { op, opts } => commands::metric(op, &opts),
        Command::Bench { op, opts } => bench::run(op, &opts),
    };
    match result.and_then(|r| r.emit()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cctk: {e}");
            ExitCode::from(e.code())
        }
    }
}
