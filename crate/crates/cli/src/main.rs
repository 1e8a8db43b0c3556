//! `numsarc`: corpus preparation, training and evaluation from the shell.
//!
//! Exit status: 0 on success, 1 for usage errors, 2 for data errors and 3
//! when training diverges.

mod commands;
mod config;
mod data;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use numsarc::corpus::DatasetName;
use numsarc::eval::PipelineKind;
use numsarc::rulebase::MatchStrategy;

#[derive(Debug, Parser)]
#[command(name = "numsarc", version, about = "Numerical sarcasm detection toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Run configuration, TOML or JSON.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the seed from the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Where output files go.
    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,
    /// POS lexicon, `word<TAB>TAG` per line, replacing the built-in one.
    #[arg(long, global = true)]
    pub pos_lexicon: Option<PathBuf>,
    /// Unit alias table, `alias<TAB>canonical` per line, replacing the built-in one.
    #[arg(long, global = true)]
    pub unit_aliases: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Label, clean and deduplicate raw JSONL records.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// Sample one of the dataset presets from the cleaned corpus.
        #[arg(long)]
        preset: Option<DatasetName>,
    },
    /// Tokenize, tag, chunk and extract numeric mentions.
    Analyze {
        #[arg(long)]
        input: PathBuf,
    },
    /// Build the two rule repositories from labelled tweets.
    BuildRepo {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        strategy: Option<MatchStrategy>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
    },
    /// Run the rule cascade over tweets.
    PredictRule {
        /// Repository file written by `build-repo`.
        #[arg(long)]
        repo: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        embeddings: Option<PathBuf>,
    },
    /// Write the feature matrix as CSV.
    Featurize {
        #[arg(long)]
        input: PathBuf,
        /// Corpus the unit vocabulary is taken from; defaults to `--input`.
        #[arg(long)]
        train: Option<PathBuf>,
        /// Families such as `S+E+P+value+unit+emb`.
        #[arg(long)]
        features: Option<String>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
    },
    /// Fit one pipeline and save it.
    Train(TrainArgs),
    /// Score a saved model on labelled tweets.
    Evaluate {
        /// Model file written by `train`.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        embeddings: Option<PathBuf>,
    },
    /// k-fold cross-validation of one pipeline.
    Crossval(CrossvalArgs),
    /// Train skip-gram embeddings or load a pre-trained table.
    Embed(EmbedArgs),
    /// Generate the synthetic corpus with planted unit statistics.
    Synth {
        #[arg(long)]
        size: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub model: Option<PipelineKind>,
    #[arg(long)]
    pub train: PathBuf,
    /// Also score the fitted model on this file.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrossvalArgs {
    #[arg(long)]
    pub model: Option<PipelineKind>,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub k: Option<usize>,
    /// Use this id-to-fold JSON mapping instead of a fresh stratified split.
    #[arg(long)]
    pub folds: Option<PathBuf>,
    /// Write the fold assignment used as id-to-fold JSON.
    #[arg(long)]
    pub export_folds: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct EmbedArgs {
    /// Corpus whose tokens the skip-gram model is trained on.
    #[arg(long)]
    pub train_sgns: Option<PathBuf>,
    /// Word-vector text file to validate and copy.
    #[arg(long)]
    pub load: Option<PathBuf>,
}

/// Failure classes that decide the exit status.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    for cause in err.chain() {
        if let Some(numsarc::Error::Divergence { .. }) = cause.downcast_ref::<numsarc::Error>() {
            return 3;
        }
    }
    2
}

/// The error chain joined with `: `, skipping causes whose text the
/// previous message already includes.
fn describe(err: &anyhow::Error) -> String {
    let mut out = String::new();
    let mut last = String::new();
    for cause in err.chain() {
        let msg = cause.to_string();
        if !last.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
        last = msg;
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
