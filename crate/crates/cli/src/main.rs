//! `trajraster` — evaluate scene-compliance losses and off-road metrics on
//! scenario files, run the gradient-descent characterization, and export
//! rasters as images.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod export;

use config::ConfigFlags;

#[derive(Parser)]
#[command(
    name = "trajraster",
    version,
    about = "Box-aware trajectory rasterization, scene-compliance losses, and off-road metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the combined trajectory loss for a scenario
    Loss(LossArgs),
    /// Evaluate displacement and off-road false-positive metrics
    Metrics(MetricsArgs),
    /// Run gradient descent of one actor under the scene-compliance term
    Toy(ToyArgs),
    /// Export the drivable mask and per-waypoint rasters as images
    Raster(RasterArgs),
    /// Write a template scenario document
    Init(InitArgs),
}

#[derive(Args)]
pub struct LossArgs {
    /// Scenario document to evaluate
    #[arg(long)]
    pub scenario: PathBuf,
    #[command(flatten)]
    pub config: ConfigFlags,
    /// Directory for loss_report.json (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct MetricsArgs {
    /// Scenario document to evaluate
    #[arg(long)]
    pub scenario: PathBuf,
    /// Directory for metrics_report.json (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ToyArgs {
    /// Optional scenario; its first actor's first predicted waypoint is the
    /// initial state. Defaults to the built-in half-plane scene.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigFlags,
    /// Gradient-descent iterations
    #[arg(long)]
    pub iters: Option<usize>,
    /// Step size for x and y, meters per unit gradient
    #[arg(long)]
    pub step_xy: Option<f64>,
    /// Step size for the heading, radians per unit gradient
    #[arg(long)]
    pub step_theta: Option<f64>,
    /// Directory for trace.csv and toy_summary.json (CSV to stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write per-iteration raster snapshots (requires --out)
    #[arg(long)]
    pub emit_rasters: bool,
    /// Snapshot stride in iterations when --emit-rasters is set
    #[arg(long, default_value_t = 100)]
    pub snapshot_every: usize,
}

#[derive(Args)]
pub struct RasterArgs {
    /// Scenario document to render
    #[arg(long)]
    pub scenario: PathBuf,
    #[command(flatten)]
    pub config: ConfigFlags,
    /// Output directory for the images
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct InitArgs {
    /// Where to write the template scenario
    #[arg(long, default_value = "scenario.json")]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Loss(args) => commands::cmd_loss(args),
        Command::Metrics(args) => commands::cmd_metrics(args),
        Command::Toy(args) => commands::cmd_toy(args),
        Command::Raster(args) => commands::cmd_raster(args),
        Command::Init(args) => commands::cmd_init(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            // input problems exit 2, filesystem problems exit 3
            match err {
                trajraster::Error::Io(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
