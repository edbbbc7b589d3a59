use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;

mod config;
mod output;
mod run;

use config::{Command, Flags, RunConfig};
use run::RunError;

/// Numerical lab for the H² stability of Gardner breathers.
#[derive(Debug, Parser)]
#[command(name = "gardner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match RunConfig::resolve(cli.command, cli.flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run::run(&cfg) {
        Ok(out) => {
            // a closed pipe downstream is not our failure
            let mut so = io::stdout().lock();
            for n in &out.notes {
                let _ = writeln!(so, "{n}");
            }
            for c in &out.checks {
                let _ = writeln!(so, "{} {}", if c.pass { "PASS" } else { "FAIL" }, c.detail);
            }
            let failed = out.failures();
            if failed.is_empty() {
                ExitCode::SUCCESS
            } else {
                eprintln!("failed: {}", failed.join(", "));
                ExitCode::from(1)
            }
        }
        Err(RunError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(RunError::Failed(m)) => {
            eprintln!("failed: {m}");
            ExitCode::from(1)
        }
    }
}
