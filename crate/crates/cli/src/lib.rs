//! Command-line pipeline over the `dialectometry` library.
//!
//! Every stage reads its inputs from the output directory, writes its own
//! subdirectory, and refreshes `manifest.json`.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod report;
pub mod stages;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::artifacts::Output;
use crate::config::Config;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "dialectometry", version, about = "Computational dialectometry pipeline")]
pub struct Cli {
    /// Configuration file.
    #[arg(short, long, default_value = "dialectometry.toml")]
    pub config: PathBuf,
    /// Overrides the configured scale factor.
    #[arg(long)]
    pub scale: Option<f64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub stage: Stage,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Stage {
    /// Regionalize documents and select varieties.
    Ingest,
    /// Cut documents into fixed-size samples.
    Aggregate,
    /// Assign samples to dev, train and test.
    Split,
    /// Encode samples with every feature set.
    Extract,
    /// Fit one classifier per experiment.
    Train,
    /// Score classifiers on the test split.
    Evaluate,
    /// Stratified cross-validation on the training split.
    Crossval,
    /// Feature-ablation curves.
    Unmask,
    /// Region similarity from errors and weights.
    Similarity,
    /// Per-region uniqueness rankings.
    Uniqueness,
    /// Inner- against outer-circle comparison.
    CircleTest,
    /// Collate results into report.json and report.md.
    Report,
}

impl Stage {
    pub fn execute(self, config: &Config, out: &Output) -> Result<(), CliError> {
        match self {
            Stage::Ingest => stages::ingest(config, out),
            Stage::Aggregate => stages::aggregate(config, out),
            Stage::Split => stages::split(config, out),
            Stage::Extract => stages::extract(config, out),
            Stage::Train => stages::train(config, out),
            Stage::Evaluate => stages::evaluate(config, out),
            Stage::Crossval => stages::crossval(config, out),
            Stage::Unmask => stages::unmask(config, out),
            Stage::Similarity => stages::similarity(config, out),
            Stage::Uniqueness => stages::uniqueness(config, out),
            Stage::CircleTest => stages::circle_test(config, out),
            Stage::Report => report::report(out),
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if cli.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let config = Config::load(&cli.config, cli.scale)?;
    std::fs::create_dir_all(&config.output).map_err(|source| CliError::Io {
        context: format!("create {}", config.output.display()),
        source,
    })?;
    let out = Output::open(&config.output)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    pool.install(|| cli.stage.execute(&config, &out))?;
    out.write_manifest(&config)
}

/// Parses `args` (program name first), runs one stage, and returns the
/// process exit code. Errors are printed to stderr as a JSON record.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let err = CliError::Usage(e.render().to_string().trim().to_string());
            eprintln!("{}", err.record());
            return err.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.record());
            e.exit_code()
        }
    }
}
