//! `swipeauth` command-line runner.

mod commands;
mod config;
mod manifest;

use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::Common;

#[derive(Debug, Parser)]
#[command(name = "swipeauth", version, about = "Swipe-gesture continuous authentication")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset with the standard layout.
    Synth(commands::SynthArgs),
    /// Print the feature registry.
    Catalog {
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Dump the swipes of one touch stream as JSON lines.
    Segment {
        #[arg(long)]
        touch: PathBuf,
        #[arg(long)]
        accel: Option<PathBuf>,
        /// Discard a gesture whose consecutive samples are further apart.
        #[arg(long, default_value_t = swipeauth::segment::DEFAULT_MAX_GAP_MS)]
        max_gap_ms: i64,
    },
    /// Write one feature row per swipe to features.csv.
    Extract,
    /// Write every user's feature ranking on the training sessions to rank.csv.
    Rank,
    /// Train one user's model on the training sessions of `--contexts`.
    Train {
        #[arg(long)]
        user: String,
        /// Nearest-rank percentile of training distances used as threshold.
        #[arg(long, default_value_t = 95.0)]
        percentile: f64,
    },
    /// Score a user's test sessions with a trained model.
    Score {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        user: String,
        /// Context of the sessions to score; defaults to the model's contexts.
        #[arg(long)]
        context: Option<swipeauth::Context>,
    },
    /// Train on `--contexts`, test on `--test` and report per-user EERs.
    Eval {
        #[arg(long)]
        test: swipeauth::Context,
    },
    /// Run a predefined experiment grid.
    Experiment {
        #[arg(value_enum)]
        which: Experiment,
    },
    /// Export plot data.
    Viz {
        #[arg(value_enum)]
        what: Viz,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Experiment {
    Table1,
    Table2,
    Ablation,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Viz {
    /// Two-component PCA of training features with per-user mixtures.
    Pca,
}

/// A failed run and its exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(m: impl Display) -> Self {
        Failure { code: 2, message: m.to_string() }
    }

    pub fn data(m: impl Display) -> Self {
        Failure { code: 1, message: m.to_string() }
    }
}

impl From<swipeauth::Error> for Failure {
    fn from(e: swipeauth::Error) -> Self {
        match e {
            swipeauth::Error::InvalidConfig(_) | swipeauth::Error::InvalidPercentile(_) => Failure::usage(e),
            _ => Failure::data(e),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.common.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = cli.common.resolve()?;
    let workers = cli.common.workers;
    match cli.command {
        Command::Synth(a) => commands::synth(&cfg, &a),
        Command::Catalog { format } => commands::dump_catalog(matches!(format, Format::Csv)),
        Command::Segment { touch, accel, max_gap_ms } => commands::segment(&cfg, &touch, accel.as_deref(), max_gap_ms),
        Command::Extract => commands::extract(&cfg),
        Command::Rank => commands::rank(&cfg),
        Command::Train { user, percentile } => commands::train(&cfg, &user, percentile),
        Command::Score { model, user, context } => commands::score(&cfg, &model, &user, context),
        Command::Eval { test } => commands::eval(&cfg, test, workers),
        Command::Experiment { which } => match which {
            Experiment::Table1 => commands::table(&cfg, "table1", workers),
            Experiment::Table2 => commands::table(&cfg, "table2", workers),
            Experiment::Ablation => commands::ablation(&cfg, workers),
        },
        Command::Viz { what: Viz::Pca } => commands::viz_pca(&cfg),
    }
}
