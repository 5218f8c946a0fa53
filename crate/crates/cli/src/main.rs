use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use collapse_cli::{dispatch, load_config, Command};

#[derive(Parser)]
#[command(name = "collapse", version, about = "Reflected Levy processes with proportional collapses")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Run configuration in `key = value` format.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides the `output` key.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed; overrides the `seed` key.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Print nothing on success.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Transform, moments and atom of the stationary law.
    Analyze,
    /// Monte Carlo estimates with standard errors and a sample dump.
    Simulate,
    /// Run a suite of analytic and simulation checks.
    Validate,
    /// Heavy-tail ratio experiment for Pareto jumps.
    Tail,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            eprintln!("error kind=usage: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    let Some(path) = cli.config.as_deref() else {
        eprintln!("error kind=usage: --config <path> is required");
        return ExitCode::from(2);
    };
    let cmd = match cli.command {
        Cmd::Analyze => Command::Analyze,
        Cmd::Simulate => Command::Simulate,
        Cmd::Validate => Command::Validate,
        Cmd::Tail => Command::Tail,
    };
    let cfg = match load_config(path, cli.seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            return ExitCode::from(e.exit_code());
        }
    };
    let (report, status) = dispatch(cmd, &cfg, cli.out.as_deref());
    if let Some(r) = report {
        if !cli.quiet {
            for line in &r.lines {
                println!("{line}");
            }
            for f in &r.files {
                println!("wrote {}", f.display());
            }
        }
    }
    match status {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code())
        }
    }
}
