use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ionbell_cli::{load_config, run, write_artifacts, CliError};
use ionbell_core::Diagnostic;

/// Two-ion Bell-state and motional-tomography simulator.
#[derive(Debug, Parser)]
#[command(name = "ionbell", version)]
struct Args {
    /// Run configuration (TOML).
    #[arg(long, short)]
    config: PathBuf,

    /// Output directory for the CSV artifacts.
    #[arg(long, short, default_value = ".")]
    out: PathBuf,

    /// Overrides the seed from the configuration.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,

    /// Suppress the summary on standard output.
    #[arg(long, short)]
    quiet: bool,
}

fn execute(args: &Args) -> Result<(), CliError> {
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let result = run(&cfg);
    let output = match result {
        Ok(out) => out,
        Err(CliError::Validation { failed, output }) => {
            write_artifacts(&args.out, &output.artifacts)?;
            if !args.quiet {
                for line in &output.summary {
                    println!("{line}");
                }
            }
            return Err(CliError::Validation { failed, output });
        }
        Err(e) => return Err(e),
    };
    for d in &output.diagnostics {
        match d {
            Diagnostic::Note(msg) => eprintln!("note: {msg}"),
            other => eprintln!("warning: {other}"),
        }
    }
    let written = write_artifacts(&args.out, &output.artifacts)?;
    if !args.quiet {
        println!("mode = {}", cfg.mode.name());
        for line in &output.summary {
            println!("{line}");
        }
        for path in written {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(3);
        }
    }
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
