//! `rigidity`: command-line driver for the analysis pipeline.
//!
//! Exit codes: 0 when the analysis completed (whatever the classification),
//! 1 for bad input or I/O failures, 2 when a numerical solver failed.

mod commands;
mod input;
mod text;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Environment variable naming the default output directory of `scan`.
pub const OUTPUT_DIR_ENV: &str = "RIGIDITY_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "rigidity", version, about = "Rigidity, prestress stability and almost-rigidity of frameworks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certificate, constants and radii for one framework.
    Analyze(AnalyzeArgs),
    /// Length scale L and the radii as lambda / lambda0 varies.
    SweepLambda(SweepArgs),
    /// Analyze every `*.json` file in a directory.
    Scan(ScanArgs),
    /// Perturb, re-solve the edge equations to several tolerances, and analyze.
    Perturb(PerturbArgs),
    /// Tensegrity certificate with sign constraints from the edge labels.
    Tensegrity(TensegrityArgs),
    /// Built-in example frameworks.
    #[command(subcommand)]
    Corpus(CorpusCommand),
}

#[derive(Args, Clone)]
pub struct Source {
    /// Framework JSON file.
    #[arg(required_unless_present = "corpus", conflicts_with = "corpus")]
    pub input: Option<std::path::PathBuf>,
    /// Built-in framework instead of a file (see `corpus list`).
    #[arg(long)]
    pub corpus: Option<String>,
}

#[derive(Args, Clone)]
pub struct Tuning {
    /// lambda as a fraction of lambda0, in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub lambda_frac: f64,
    /// Singular values of R(p)C at or below this count as zero.
    #[arg(long, default_value_t = rigidity::spectral::DEFAULT_SIGMA_CUTOFF)]
    pub sigma_cutoff: f64,
    /// Complement of the trivial motions: `auto` uses the file's `pinned`
    /// coordinates when present and the orthogonal complement otherwise,
    /// `none` always uses the orthogonal complement, anything else is read
    /// as a JSON array of 1-based coordinate indices.
    #[arg(long, default_value = "auto")]
    pub pin: String,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub tuning: Tuning,
    /// Sample the energy barrier in this many random directions (0 = skip).
    #[arg(long, default_value_t = 0)]
    pub verify: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub tuning: Tuning,
    /// `start:stop:count`, inclusive on both ends.
    #[arg(long, default_value = "0.02:0.98:49")]
    pub grid: String,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args)]
pub struct ScanArgs {
    pub dir: std::path::PathBuf,
    #[command(flatten)]
    pub tuning: Tuning,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub parallel: Option<usize>,
    /// Where per-file reports and the aggregate go.
    #[arg(long, env = OUTPUT_DIR_ENV, default_value = "rigidity-out")]
    pub out_dir: std::path::PathBuf,
}

#[derive(Args)]
pub struct PerturbArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub tuning: Tuning,
    /// Comma-separated solver tolerances, ascending.
    #[arg(long, value_delimiter = ',', default_value = "1e-14,1e-13,1e-12,1e-11,1e-10,1e-9,1e-8,1e-7,1e-6")]
    pub delta_list: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Perturbation standard deviation relative to the mean edge length.
    #[arg(long, default_value_t = 1e-3)]
    pub scale: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub max_iterations: usize,
    /// CSV destination (default stdout). The per-delta summary goes to stderr.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args)]
pub struct TensegrityArgs {
    #[command(flatten)]
    pub source: Source,
    #[command(flatten)]
    pub tuning: Tuning,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Names and descriptions.
    List,
    /// Print one framework as JSON.
    Show { name: String },
    /// Write every framework as `<name>.json` into a directory.
    Export { dir: std::path::PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze(a) => commands::analyze(&a),
        Command::SweepLambda(a) => commands::sweep_lambda(&a),
        Command::Scan(a) => commands::scan(&a),
        Command::Perturb(a) => commands::perturb(&a),
        Command::Tensegrity(a) => commands::tensegrity(&a),
        Command::Corpus(CorpusCommand::List) => commands::corpus_list(),
        Command::Corpus(CorpusCommand::Show { name }) => commands::corpus_show(&name),
        Command::Corpus(CorpusCommand::Export { dir }) => commands::corpus_export(&dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    use rigidity::Error as E;
    match e.downcast_ref::<E>() {
        Some(
            E::ConicNotConverged { .. }
            | E::SolverNotConverged { .. }
            | E::KappaInfeasible(_)
            | E::NoNonzeroSingularValue,
        ) => 2,
        _ => 1,
    }
}
