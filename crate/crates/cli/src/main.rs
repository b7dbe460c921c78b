//! `emostock`: batch commands from raw posts and prices to reports.

mod commands;
mod config;
mod error;
mod plot;
mod workspace;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};

use commands::analyze::Analysis;
use commands::synth::SynthArgs;
use config::PipelineConfig;
use error::{CliError, Result};
use workspace::Workspace;

#[derive(Parser)]
#[command(name = "emostock", version, about = "Microblog emotions against stock index moves")]
struct Cli {
    /// Pipeline config (JSON). Relative paths inside it resolve against its
    /// directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override `base_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override `paths.out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write SVG line charts of the series a command produces.
    #[arg(long, global = true)]
    plot: bool,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Keep the posts that mention a stock keyword.
    Ingest,
    /// Train the emotion classifier and label the stock-relevant posts.
    Classify,
    /// Daily emotion proportions per investor segment.
    BuildSeries,
    /// Percent-change targets and the session calendar from index prices.
    Market,
    /// Correlation, causality or volatility reports.
    Analyze {
        #[arg(value_enum, default_value = "all")]
        what: Analysis,
    },
    /// Train every configured model kind for every target.
    Train,
    /// Holdout accuracy (and cross-validation when configured).
    Evaluate,
    /// Class labels for the next session.
    Predict {
        /// Session to predict; defaults to the next one after the data.
        #[arg(long)]
        date: Option<NaiveDate>,
    },
    /// Generate a synthetic corpus and market with a planted signal.
    Synth(SynthArgs),
    /// Print the effective configuration.
    Config,
}

fn workspace(cli: &Cli) -> Result<Workspace> {
    let (cfg, base) = match &cli.config {
        Some(path) => {
            let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
            (PipelineConfig::load(path)?, base.to_path_buf())
        }
        None => (PipelineConfig::default(), PathBuf::from(".")),
    };
    Ok(Workspace::new(cfg, base, cli.out.clone(), cli.seed, cli.plot))
}

fn dispatch(cli: &Cli) -> Result<()> {
    let ws = workspace(cli)?;
    match &cli.command {
        Command::Ingest => commands::ingest::run(&ws),
        Command::Classify => commands::classify::run(&ws),
        Command::BuildSeries => commands::series::run(&ws),
        Command::Market => commands::market::run(&ws),
        Command::Analyze { what } => commands::analyze::run(&ws, *what),
        Command::Train => commands::train::run_train(&ws),
        Command::Evaluate => commands::train::run_evaluate(&ws),
        Command::Predict { date } => commands::predict::run(&ws, *date),
        Command::Synth(args) => commands::synth::run(&ws, args),
        Command::Config => {
            let text = serde_json::to_string_pretty(&ws.cfg).expect("config serializes");
            match writeln!(std::io::stdout(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("writing the config", e)),
                _ => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
