use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use discourse_signal::pipeline::{self, LoadedConfig, Overrides};
use discourse_signal::Error;

#[derive(Parser)]
#[command(
    name = "discourse-signal",
    version,
    about = "Discourse sentiment vs. Bitcoin market analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Infer labels from crowd ratings and write rating distributions.
    Aggregate(Common),
    /// Cross-validate the configured classifiers and save trained models.
    TrainEval(Common),
    /// Label every document with the chosen model and build daily sentiment.
    Classify(Common),
    /// Classify, then run correlation, ADF and Granger analysis against the market.
    Analyze(Common),
    /// Collect the text tables into report.txt.
    Report(Common),
    /// Run every stage in order.
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// Run config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Seed for cross-validation shuffles; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Weight features by TF-IDF.
    #[arg(long)]
    tfidf: bool,
    /// Accept market data with missing days.
    #[arg(long)]
    allow_gaps: bool,
}

type Stage = fn(&LoadedConfig) -> Result<(), Error>;

fn run(command: Command) -> Result<(), Error> {
    let (common, stage): (Common, Stage) = match command {
        Command::Aggregate(c) => (c, pipeline::cmd_aggregate),
        Command::TrainEval(c) => (c, pipeline::cmd_train_eval),
        Command::Classify(c) => (c, pipeline::cmd_classify),
        Command::Analyze(c) => (c, pipeline::cmd_analyze),
        Command::Report(c) => (c, pipeline::cmd_report),
        Command::Run(c) => (c, pipeline::run_all),
    };
    let overrides = Overrides {
        seed: common.seed,
        out: common.out,
        tfidf: common.tfidf,
        allow_gaps: common.allow_gaps,
    };
    let cfg = LoadedConfig::load(&common.config, &overrides)?;
    stage(&cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are validation failures
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
