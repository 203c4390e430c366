//! `kgbench`: turn a triple file into a reasoning-under-incompleteness QA
//! benchmark, and score system outputs against it.

mod commands;
mod preset;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use preset::{PresetName, SchemeKind};

#[derive(Parser)]
#[command(name = "kgbench", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine Horn rules from a triple file and print a rule-type histogram.
    Mine(MineArgs),
    /// Build a benchmark bundle: remove inferable triples, phrase one
    /// question per removal, balance and split.
    Build(BuildArgs),
    /// Score a predictions file against a bundle split.
    Evaluate(EvaluateArgs),
    /// Print triple and question counts for a bundle.
    Stats(StatsArgs),
    /// Rewrite entity labels under a labeling scheme.
    Relabel(RelabelArgs),
}

#[derive(Args)]
struct MineArgs {
    /// Graph file: one `subject<TAB>predicate<TAB>object` triple per line.
    graph: PathBuf,
    /// Where to write the mined rules.
    #[arg(short, long, default_value = "rules.tsv")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "family")]
    preset: PresetName,
    /// Maximum atoms per rule, head included (overrides the preset).
    #[arg(long)]
    max_len: Option<usize>,
    /// Minimum standard confidence, as a decimal or fraction.
    #[arg(long)]
    min_conf: Option<kgbench::Ratio>,
    /// Minimum head coverage, as a decimal or fraction.
    #[arg(long)]
    min_hc: Option<kgbench::Ratio>,
    /// Minimum PCA confidence, as a decimal or fraction.
    #[arg(long)]
    min_pca: Option<kgbench::Ratio>,
    /// Also try atoms that pin one argument to a constant.
    #[arg(long)]
    instantiated: bool,
    /// Worker threads; 0 means all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct BuildArgs {
    /// Graph file the rules were mined from.
    graph: PathBuf,
    /// Rule file produced by `kgbench mine`.
    #[arg(short, long)]
    rules: PathBuf,
    /// Output directory for the bundle files.
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "family")]
    preset: PresetName,
    /// Seed for every random choice in the build.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Balancing threshold, as a decimal or fraction (overrides the preset).
    #[arg(long)]
    tau: Option<kgbench::Ratio>,
    /// Cap on removals per rule (overrides the preset).
    #[arg(long)]
    per_rule_limit: Option<usize>,
    /// Train/validation/test weights, e.g. `8,1,1`.
    #[arg(long, value_parser = parse_split)]
    split: Option<(u32, u32, u32)>,
    /// How to phrase questions.
    #[arg(long, value_enum, default_value = "template")]
    generator: GeneratorKind,
    /// Transcript cache for the llm generator (JSONL, append-only).
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Model name recorded with llm requests.
    #[arg(long)]
    model: Option<String>,
    /// Entity labeling for the released files (overrides the preset).
    #[arg(long, value_enum)]
    label_scheme: Option<SchemeKind>,
    /// Names file (`label<TAB>name`) for the text-label scheme.
    #[arg(long)]
    names: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum GeneratorKind {
    /// Deterministic fill-in-the-blank phrasing; needs no network.
    Template,
    /// Chat-completion phrasing with transcript replay.
    Llm,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Bundle directory produced by `kgbench build`.
    bundle: PathBuf,
    /// Predictions file: `question_id<TAB>answer, answer, ...` per line.
    predictions: PathBuf,
    /// Which split to score.
    #[arg(long, value_enum, default_value = "test")]
    split: SplitChoice,
    /// Also split predictions on whitespace, for bare-entity outputs.
    #[arg(long)]
    split_spaces: bool,
    /// Drop empty predictions from the precision mean instead of scoring 0.
    #[arg(long)]
    skip_empty_precision: bool,
    /// Where to write the JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum SplitChoice {
    Train,
    Validation,
    Test,
    All,
}

impl SplitChoice {
    fn as_str(self) -> &'static str {
        match self {
            SplitChoice::Train => "train",
            SplitChoice::Validation => "validation",
            SplitChoice::Test => "test",
            SplitChoice::All => "all",
        }
    }
}

#[derive(Args)]
struct StatsArgs {
    /// Bundle directory produced by `kgbench build`.
    bundle: PathBuf,
}

#[derive(Args)]
struct RelabelArgs {
    /// Graph file to rewrite.
    graph: PathBuf,
    /// Where to write the relabeled graph.
    #[arg(short, long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    scheme: SchemeKind,
    /// Seed for the private-id permutation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Names file (`label<TAB>name`) for the text-label scheme.
    #[arg(long)]
    names: Option<PathBuf>,
    /// Where to write the old-label to new-label mapping.
    #[arg(long)]
    map: Option<PathBuf>,
}

fn parse_split(text: &str) -> Result<(u32, u32, u32), String> {
    let parts: Vec<&str> = text.split(',').collect();
    let [train, validation, test] = parts.as_slice() else {
        return Err("expected three comma-separated weights, e.g. 8,1,1".into());
    };
    let parse = |s: &str| s.trim().parse::<u32>().map_err(|e| format!("bad weight `{s}`: {e}"));
    Ok((parse(train)?, parse(validation)?, parse(test)?))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Mine(args) => commands::mine(args),
        Command::Build(args) => commands::build(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Stats(args) => commands::stats(args),
        Command::Relabel(args) => commands::relabel(args),
    }
}
