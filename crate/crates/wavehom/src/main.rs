use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use wavehom::harness::{load_config, run_command};

#[derive(Parser)]
#[command(name = "wavehom", version, about = "Long-time periodic homogenization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (same as out=<dir>)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides applied after the file, e.g. eps=0.125,0.0625 times=10
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Cell coefficients and the effective tensor
    Cell(Common),
    /// Corrector cascade with the word-sum cross-check
    Correctors(Common),
    /// Effective operator series and odd-order vanishing
    Operators(Common),
    /// Normal form of the operator series and its identities
    NormalForm(Common),
    /// Classical hierarchy and its profiles
    Classical(Common),
    /// Filtered dispersive symbol and its solver
    Criminal(Common),
    /// Leapfrog direct simulation with energy diagnostics
    Dns(Common),
    /// Fixed-time convergence orders against the Bloch reference
    Compare(Common),
    /// Errors up to t = eps^-2
    Longtime(Common),
    /// Saturated secular growth beyond t = eps^-2
    Breakdown(Common),
    /// Secular growth rates of the classical profiles
    Growth(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = match cli.command {
        Command::Cell(c) => ("cell", c),
        Command::Correctors(c) => ("correctors", c),
        Command::Operators(c) => ("operators", c),
        Command::NormalForm(c) => ("normal-form", c),
        Command::Classical(c) => ("classical", c),
        Command::Criminal(c) => ("criminal", c),
        Command::Dns(c) => ("dns", c),
        Command::Compare(c) => ("compare", c),
        Command::Longtime(c) => ("longtime", c),
        Command::Breakdown(c) => ("breakdown", c),
        Command::Growth(c) => ("growth", c),
    };
    let mut overrides = common.overrides;
    if let Some(out) = common.out {
        overrides.push(format!("out={}", out.display()));
    }
    let result = load_config(common.config.as_deref(), &overrides).and_then(|cfg| run_command(name, &cfg));
    match result {
        Ok((report, dir)) => {
            print!("{}", report.summary());
            println!("outputs: {}", dir.display());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
