use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use derivkit::metrics::{RougeVariant, Tokenizer};
use derivkit::record::PerturbationKind;

const EXIT_CODES: &str = "Exit codes:
  0  success
  1  some records failed or are missing (details in the run report)
  2  invalid arguments or configuration
  3  a file could not be read or written";

#[derive(Debug, Parser)]
#[command(name = "derivkit", version, about = "Synthetic derivation datasets and their evaluation", after_help = EXIT_CODES)]
pub struct Args {
    /// Write the JSON run report here instead of stderr.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate derivation records.
    Generate(GenerateArgs),
    /// Perturb derivation records.
    Perturb(PerturbArgs),
    /// Render prompts for derivation records.
    Prompt(PromptArgs),
    /// Score predictions against reference targets.
    Score(ScoreArgs),
    /// Length, operation and chain statistics.
    Stats(StatsArgs),
    /// Replay every record; fails when any record does not replay.
    Verify(VerifyArgs),
    /// Query a chat-completions endpoint with prompt records.
    Query(QueryArgs),
}

#[derive(Debug, clap::Args)]
pub struct GenerateArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    /// Overrides the seed of the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// TOML file with generation settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kind {
    Vr,
    Ee,
    Ag,
    Sr,
}

impl From<Kind> for PerturbationKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Vr => PerturbationKind::VR,
            Kind::Ee => PerturbationKind::EE,
            Kind::Ag => PerturbationKind::AG,
            Kind::Sr => PerturbationKind::SR,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct PerturbArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Generation settings used for alternative goals and the token limit.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// File with eleven whitespace-separated replacement names.
    #[arg(long)]
    pub pool: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Finetune,
    Fewshot,
}

#[derive(Debug, clap::Args)]
pub struct PromptArgs {
    #[arg(long, value_enum, default_value = "finetune")]
    pub mode: Mode,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Training records the few-shot examples are drawn from.
    #[arg(long, required_if_eq("mode", "fewshot"))]
    pub train: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub pool: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Rouge {
    #[value(name = "rouge1")]
    Rouge1,
    #[value(name = "rouge2")]
    Rouge2,
    #[value(name = "rougeL")]
    RougeL,
}

impl From<Rouge> for RougeVariant {
    fn from(r: Rouge) -> Self {
        match r {
            Rouge::Rouge1 => RougeVariant::Rouge1,
            Rouge::Rouge2 => RougeVariant::Rouge2,
            Rouge::RougeL => RougeVariant::RougeL,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Tokens {
    Whitespace,
    Lexeme,
}

impl From<Tokens> for Tokenizer {
    fn from(t: Tokens) -> Self {
        match t {
            Tokens::Whitespace => Tokenizer::Whitespace,
            Tokens::Lexeme => Tokenizer::Lexeme,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct ScoreArgs {
    /// Prediction records.
    #[arg(long)]
    pub pred: PathBuf,
    /// Prompt records (or derivation records) holding the targets.
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Compare every perturbed row with its static row.
    #[arg(long)]
    pub pairs: bool,
    /// Externally computed BLEURT scores.
    #[arg(long)]
    pub bleurt: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "rouge2")]
    pub rouge: Rouge,
    #[arg(long, value_enum, default_value = "whitespace")]
    pub tokenizer: Tokens,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write per-row features as CSV.
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub pool: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct StatsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Per-record results as JSONL.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub pool: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct QueryArgs {
    /// Prompt records.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// TOML endpoint settings.
    #[arg(long)]
    pub endpoint: PathBuf,
    /// Prediction records.
    #[arg(long)]
    pub out: PathBuf,
}
