//! `randpoly` command-line driver.
//!
//! Point files hold one point per line as whitespace-separated reals; blank
//! lines and lines starting with `#` are skipped.
//!
//! Facet dump (`facets.txt`): one line `facet v_1 … v_d nx_1 … nx_d t` per
//! facet, giving the sorted vertex indices (0-based lines of the point file),
//! the outward unit normal and the offset `t = <n, v_1>`.
//!
//! Every run writes `manifest.json` into the output directory.

mod commands;
mod io;
mod report;
mod resolve;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::io::CliError;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  usage error (unknown subcommand or flag)
  3  configuration error (malformed config or invalid parameter)
  4  unreadable or malformed input file, or output not writable
  5  degenerate input (points not in general position, off the boundary, non-finite)
  6  capacity exceeded
  7  insufficient data for a statistic or fit
  8  internal invariant violated";

#[derive(Parser, Debug)]
#[command(name = "randpoly", version, about = "Random polytopes on the boundary of smooth convex bodies", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// JSON configuration file; flags override its fields
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<String>,
    /// Master seed, 64-bit hex
    #[arg(long, global = true, value_name = "HEX64")]
    pub seed: Option<String>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<String>,
    /// Worker threads (affects speed only)
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Body kind: ball or ellipsoid
    #[arg(long, global = true, value_name = "KIND")]
    pub body: Option<String>,
    /// Ambient dimension
    #[arg(long, global = true, value_name = "D")]
    pub dim: Option<usize>,
    /// Sample sizes (binomial model)
    #[arg(long, global = true, value_name = "N[,N...]", value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Poisson intensities
    #[arg(long, global = true, value_name = "T[,T...]", value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    /// Replications per cell
    #[arg(long, global = true, value_name = "M")]
    pub reps: Option<usize>,
    /// Face dimensions
    #[arg(long, global = true, value_name = "K[,K...]", value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hull of a point file: writes facets.txt and prints the f-vector
    Hull { file: String },
    /// f-vector of a point file, or of fresh samples when no file is given
    Fvector { file: Option<String> },
    /// Combinatorial type of d+2 points
    Classify { file: String },
    /// Writes n boundary samples to samples.txt
    Sample,
    /// Area of the cap of given height at a boundary point
    Cap {
        /// Cap center on the boundary (default: the point with outward normal e_d)
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        point: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.1)]
        height: f64,
        /// Monte Carlo samples for ellipsoids
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Tail of the stabilization radius: writes tail.csv and tail_fit.json
    Stabilize,
    /// Replicated hull experiment: one CSV per cell plus summary.json
    Experiment,
    /// Summary JSON and plot CSVs from an experiment directory
    Report {
        /// Directory holding manifest.json and the cell CSVs
        dir: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(CliError::Config(String::new()).code());
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match &cli.command {
        Command::Hull { file } => commands::hull(&cli.common, file),
        Command::Fvector { file } => commands::fvector(&cli.common, file.as_deref()),
        Command::Classify { file } => commands::classify(&cli.common, file),
        Command::Sample => commands::sample(&cli.common),
        Command::Cap { point, height, samples } => commands::cap(&cli.common, point.as_deref(), *height, *samples),
        Command::Stabilize => commands::stabilize(&cli.common),
        Command::Experiment => commands::experiment(&cli.common),
        Command::Report { dir } => report::report(&cli.common, dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
