mod commands;
mod config;
mod error;
mod manifest;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "eventstory", version, about = "Event-conditioned story generation pipeline")]
struct Cli {
    /// Seed for initialization, shuffling and sampling.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory or file, depending on the command.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set train.lambda=0`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Log level when RUST_LOG is unset.
    #[arg(long, global = true, default_value = "info")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DatasetArg {
    Roc,
    Wp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Ablation {
    Cm,
    Sen,
    Leading,
    Events,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Directory holding the preprocessed splits and their events.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "roc")]
    dataset: DatasetArg,
    /// Directory holding the event files; defaults to `--data`.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Word vectors for similarity targets, as SOURCE:PATH.
    #[arg(long, value_name = "SOURCE:PATH")]
    sim_embeddings: Option<String>,
    /// Remove a module; repeatable.
    #[arg(long, value_enum)]
    ablation: Vec<Ablation>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split, tokenize and delexicalize a raw dataset.
    Preprocess {
        #[arg(long, value_enum)]
        dataset: DatasetArg,
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        /// Name list replacing the bundled one.
        #[arg(long)]
        name_lexicon: Option<PathBuf>,
    },
    /// Extract one event per story sentence.
    ExtractEvents {
        #[arg(long = "in", value_name = "JSONL")]
        input: PathBuf,
        /// Gold CoNLL-U parses to use before the heuristic parser.
        #[arg(long)]
        parses: Option<PathBuf>,
    },
    /// Count adjacent-event triples.
    BuildGraph {
        #[arg(long = "in", value_name = "EVENTS_JSONL")]
        input: PathBuf,
    },
    Train(TrainArgs),
    /// Sample stories from a checkpoint.
    Generate {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Preprocessed stories supplying the leading contexts.
        #[arg(long = "in", value_name = "JSONL")]
        input: PathBuf,
        /// Event records; defaults to the `.events.jsonl` sibling of the input.
        #[arg(long)]
        events: Option<PathBuf>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        max_new_tokens: Option<usize>,
    },
    /// Score generated stories.
    Evaluate {
        #[arg(long, value_name = "JSONL")]
        generated: PathBuf,
        #[arg(long, value_name = "JSONL")]
        references: PathBuf,
        /// Word vectors as SOURCE:PATH (wiki, twitter or common); repeatable.
        #[arg(long, value_name = "SOURCE:PATH")]
        embeddings: Vec<String>,
        /// Checkpoint for teacher-forced perplexity on the references.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Event records of the references, for perplexity.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Per-sentence-index curves from a report, as CSV and SVG.
    Plot {
        #[arg(long, value_name = "JSON")]
        report: PathBuf,
    },
}

/// What every command receives besides its own arguments.
pub struct Context {
    pub config: config::PipelineConfig,
    pub out: Option<PathBuf>,
}

impl Context {
    pub fn out(&self, what: &str) -> Result<PathBuf, CliError> {
        self.out
            .clone()
            .ok_or_else(|| CliError::Config(format!("--out {what} is required")))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let env = config::env_overrides(std::env::vars());
    let mut flags = config::parse_sets(&cli.overrides)?;
    if let Command::Train(t) = &cli.command {
        for a in &t.ablation {
            let key = match a {
                Ablation::Cm => "disable_cm",
                Ablation::Sen => "disable_sen",
                Ablation::Leading => "disable_leading",
                Ablation::Events => "disable_events",
            };
            flags.push((format!("model.ablations.{key}"), "true".into()));
        }
    }
    if let Command::Generate { p, max_new_tokens, .. } = &cli.command {
        if let Some(p) = p {
            flags.push(("generation.nucleus_p".into(), p.to_string()));
        }
        if let Some(n) = max_new_tokens {
            flags.push(("generation.max_new_tokens".into(), n.to_string()));
        }
    }
    let cfg = config::load(cli.config.as_deref(), &env, &flags, cli.seed)?;
    let ctx = Context { config: cfg, out: cli.out };
    match cli.command {
        Command::Preprocess { dataset, input, name_lexicon } => {
            let dataset = match dataset {
                DatasetArg::Roc => eventstory_core::corpus::Dataset::Roc,
                DatasetArg::Wp => eventstory_core::corpus::Dataset::Wp,
            };
            commands::preprocess(&ctx, dataset, &input, name_lexicon.as_deref())
        }
        Command::ExtractEvents { input, parses } => commands::extract_events(&ctx, &input, parses.as_deref()),
        Command::BuildGraph { input } => commands::build_graph(&ctx, &input),
        Command::Train(t) => {
            let dataset = match t.dataset {
                DatasetArg::Roc => "roc",
                DatasetArg::Wp => "wp",
            };
            commands::train(&ctx, &t.data, t.events.as_deref(), dataset, t.sim_embeddings.as_deref())
        }
        Command::Generate { checkpoint, input, events, .. } => {
            commands::generate(&ctx, &checkpoint, &input, events.as_deref())
        }
        Command::Evaluate { generated, references, embeddings, checkpoint, events } => commands::evaluate(
            &ctx,
            &generated,
            &references,
            &embeddings,
            checkpoint.as_deref(),
            events.as_deref(),
        ),
        Command::Plot { report } => plot::run(&ctx, &report),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(cli.log_level.as_str()))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
