mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use planted_core::error::Error;

#[derive(Parser)]
#[command(name = "planted", version, about = "Streaming planted-structure detection testbed")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one stream and write it to a file
    Gen(GenArgs),
    /// Run one detector over a stream file
    Detect(DetectArgs),
    /// Run a full experiment from a config file
    Trials(TrialsArgs),
    /// KL scans, likelihood-ratio maxima and truncation tail estimates
    #[command(subcommand)]
    Divergence(DivergenceCommand),
    /// Evaluate a memory lower-bound formula
    Bound(BoundArgs),
    /// Merge CSV reports that share a header
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ArmArg {
    Null,
    Planted,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct Output {
    /// Write to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args)]
struct ProblemArgs {
    /// Experiment config whose problem section describes the stream
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    block: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<usize>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "planted")]
    arm: ArmArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stream file to write
    #[arg(long)]
    out: PathBuf,
    /// Also write the hidden planted instance to this JSON sidecar
    #[arg(long)]
    reveal: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    /// Stream file produced by `gen`
    #[arg(long)]
    stream: PathBuf,
    #[arg(long)]
    detector: String,
    /// Detector parameters as `key=value,key=value`
    #[arg(long, default_value = "")]
    params: String,
    #[arg(long)]
    passes: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Planted-instance sidecar handed to detectors that accept it
    #[arg(long)]
    reveal: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct TrialsArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    passes: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Hand the planted instance to the detector
    #[arg(long)]
    reveal: bool,
    /// Also write one line per trial to this file
    #[arg(long)]
    records: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Subcommand)]
enum DivergenceCommand {
    /// Exact KL(Binomial(n, 1/2) || discretized Gaussian) for each n
    Scan {
        /// Comma-separated list of n
        #[arg(long, value_delimiter = ',', default_value = "256,1024,4096,16384,65536")]
        n: Vec<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Maximum planted/null likelihood ratio over a typical-weight window
    RatioMax {
        #[arg(long)]
        t: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0.5)]
        q: f64,
        #[arg(long, default_value_t = 20.0)]
        c: f64,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Probability that a block falls outside its truncation set
    Tail {
        #[arg(long, value_enum)]
        family: TailFamily,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long, default_value_t = 0.5)]
        q: f64,
        #[arg(long, default_value_t = 20.0)]
        c: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        ell: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TailFamily {
    Typical,
    Gaussian,
    Pca,
}

#[derive(Args)]
struct BoundArgs {
    /// general-framework, biclique-main, pattern-planted or mic-budget
    #[arg(long)]
    formula: String,
    /// Formula input as `name=value`; repeatable
    #[arg(long = "input", value_name = "NAME=VALUE")]
    inputs: Vec<String>,
    /// Measured peak state in bits to compare against the prediction
    #[arg(long)]
    measured: Option<u64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ReportArgs {
    /// CSV files to merge
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(err: &Error) -> u8 {
    if err.is_invalid_input() || matches!(err, Error::Io(_)) {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Detect(a) => commands::detect(a),
        Command::Trials(a) => commands::trials(a),
        Command::Divergence(c) => commands::divergence(c),
        Command::Bound(a) => commands::bound(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
