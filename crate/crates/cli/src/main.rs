//! `chiplace` — thermal-aware chiplet placement on a 2.5D interposer.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use chiplace_cli::commands::{
    cmd_place, cmd_surrogate_eval, cmd_thermal, cmd_wirelength, PlaceFlags, StageSelection,
};

#[derive(Parser)]
#[command(name = "chiplace", version, about = "Thermal-aware chiplet placement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StageArg {
    One,
    Two,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Place a system: compact floorplan, then surrogate-assisted annealing.
    Place {
        /// System description (JSON schema or legacy whitespace layout).
        spec: PathBuf,
        /// Seed for every random choice in the pipeline.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// How much of the pipeline to run ("two" needs stage one's output
        /// and therefore runs both stages, like "full").
        #[arg(long, value_enum, default_value_t = StageArg::Full)]
        stage: StageArg,
        /// Cap on thermal-solver calls in stage two.
        #[arg(long)]
        budget: Option<u64>,
        /// Annealing temperature decay per level.
        #[arg(long)]
        decay: Option<f64>,
        /// Slide/jump lattice granularity, mm.
        #[arg(long)]
        granularity: Option<f64>,
        /// Thermal grid cells per interposer edge.
        #[arg(long)]
        resolution: Option<usize>,
        /// Directory for placement.json, report.json and heatmaps.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Also write the oracle sample archive as samples.csv.
        #[arg(long)]
        emit_samples: bool,
    },
    /// Solve the steady-state thermal field of a placement file.
    Thermal {
        placement: PathBuf,
        /// Thermal grid cells per interposer edge.
        #[arg(long)]
        resolution: Option<usize>,
        /// Directory for thermal.csv and thermal.pgm.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Report HPWL and routed wirelength of a placement file.
    Wirelength { placement: PathBuf },
    /// Cross-validate the global surrogate on a sample archive.
    SurrogateEval {
        samples: PathBuf,
        /// Number of cross-validation folds.
        #[arg(long, default_value_t = 5)]
        folds: usize,
        /// Seed for the fold shuffle.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Place { spec, seed, stage, budget, decay, granularity, resolution, out_dir, emit_samples } => {
            let flags = PlaceFlags {
                seed,
                stage: match stage {
                    StageArg::One => StageSelection::One,
                    StageArg::Two => StageSelection::Two,
                    StageArg::Full => StageSelection::Full,
                },
                budget,
                decay,
                granularity,
                resolution,
                out_dir,
                emit_samples,
            };
            cmd_place(&spec, &flags).map(|_| ())
        }
        Command::Thermal { placement, resolution, out_dir } => {
            cmd_thermal(&placement, resolution, &out_dir).map(|_| ())
        }
        Command::Wirelength { placement } => cmd_wirelength(&placement).map(|_| ()),
        Command::SurrogateEval { samples, folds, seed } => {
            cmd_surrogate_eval(&samples, folds, seed).map(|_| ())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("chiplace: {e}");
            ExitCode::from(u8::try_from(e.exit_code()).unwrap_or(1))
        }
    }
}
