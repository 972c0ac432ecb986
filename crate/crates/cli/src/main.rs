use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dampwave::config::{parse_with, Mode, OutputFormat, Overrides};
use dampwave::{run_experiment, write_report, HarnessError};

/// Runs one dampwave experiment and writes its report.
#[derive(Debug, Parser)]
#[command(name = "dampwave", version)]
struct Args {
    /// Experiment mode; replaces the mode in the config document.
    mode: Mode,
    /// JSON experiment document.
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when neither this nor output_path is set.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    sweep: Option<Vec<f64>>,
}

fn run(args: Args) -> Result<(), HarnessError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|source| HarnessError::Io { path: args.config.clone(), source })?;
    let overrides = Overrides {
        mode: Some(args.mode),
        output_path: args.out,
        output_format: args.format,
        sweep: args.sweep,
    };
    let cfg = parse_with(&text, &overrides)?;
    let report = run_experiment(&cfg)?;
    write_report(&report, cfg.output_path.as_deref(), cfg.output_format)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dampwave: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
