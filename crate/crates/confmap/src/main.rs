use clap::{Parser, Subcommand};
use confmap::{acceptance, cli};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "confmap",
    version,
    about = "Bidirectional numerical conformal mapping by dipole collocation"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence sweep from a JSON experiment config and emit
    /// CSV / grid geometry
    Run {
        /// Experiment definition (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Directory for emitted files
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Comma-separated outputs: csv, json, svg (default: config value
        /// or csv,json)
        #[arg(long, value_delimiter = ',')]
        emit: Option<Vec<String>>,
        /// 0 = quiet, 1 = summary, 2 = per-N rows
        #[arg(long, default_value_t = 1)]
        verbosity: u8,
    },
    /// Run the full acceptance suite and exit nonzero on any failure
    Verify {
        /// 0 = pass/fail lines only, 1+ = same (kept for symmetry)
        #[arg(long, default_value_t = 1)]
        verbosity: u8,
    },
}

fn run(
    config_path: &Path,
    out_dir: &Path,
    emit: Option<Vec<String>>,
    verbosity: u8,
) -> Result<(), cli::CliError> {
    let config = cli::parse_config(config_path)?;
    let outputs = match emit {
        Some(values) => cli::parse_emit(&values)?,
        None => config.outputs(),
    };
    let outcome = cli::run_sweep(&config, out_dir, &outputs)?;
    if verbosity >= 2 {
        print!("{}", cli::sweep_csv(&outcome.records));
    }
    if verbosity >= 1 {
        for note in &outcome.notes {
            eprintln!("note: {note}");
        }
        for path in &outcome.written {
            println!("wrote {}", path.display());
        }
        let failures = outcome
            .records
            .iter()
            .filter(|r| r.failure.is_some())
            .count();
        println!(
            "sweep finished: {} rows, {} failed",
            outcome.records.len(),
            failures
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    match Args::parse().command {
        Command::Run {
            config,
            out_dir,
            emit,
            verbosity,
        } => match run(&config, &out_dir, emit, verbosity) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Command::Verify { verbosity: _ } => {
            let outcomes = acceptance::all();
            for outcome in &outcomes {
                println!("{}", outcome.line());
            }
            let failed = outcomes.iter().filter(|o| !o.passed).count();
            if failed == 0 {
                println!("all {} criteria passed", outcomes.len());
                ExitCode::SUCCESS
            } else {
                println!("{failed} of {} criteria failed", outcomes.len());
                ExitCode::FAILURE
            }
        }
    }
}
