use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use signorini_cli::pipeline::{read_text, Overrides};
use signorini_cli::{run, Command, Scenario};

/// Thin obstacle laboratory.
#[derive(Parser)]
#[command(name = "signorini", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Solve and write field.txt, convergence.csv and solve.json
    Solve(Args),
    /// Frequency profiles at the probe centers
    Frequency(Args),
    /// Blow-up classification at the probe centers
    Blowup(Args),
    /// Contact set, free boundary, cone, barrier, quotient and heatmaps
    Freeboundary(Args),
    /// Run the verification suite
    Verify(Args),
    /// Plots and report.md from earlier artifacts
    Report(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Scenario file; the built-in default scenario when omitted
    scenario: Option<PathBuf>,
    /// Override grid.m
    #[arg(long)]
    grid_m: Option<usize>,
    /// Accepted for scripting; every computation is already deterministic
    #[arg(long)]
    seedless: bool,
    /// Override output.dir
    #[arg(long, short)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::Solve(a) => (Command::Solve, a),
        Sub::Frequency(a) => (Command::Frequency, a),
        Sub::Blowup(a) => (Command::Blowup, a),
        Sub::Freeboundary(a) => (Command::FreeBoundary, a),
        Sub::Verify(a) => (Command::Verify, a),
        Sub::Report(a) => (Command::Report, a),
    };
    let scenario = match &args.scenario {
        None => Ok(Scenario::default()),
        Some(path) => read_text(path).and_then(|text| Scenario::parse(&text)),
    };
    let overrides = Overrides {
        grid_m: args.grid_m,
        output_dir: args.out,
    };
    match scenario.and_then(|s| run(command, &s, &overrides)) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
