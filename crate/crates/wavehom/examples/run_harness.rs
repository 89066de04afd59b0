//! Runs a harness command programmatically, as the CLI does.
//! Usage: `cargo run --release --example run_harness -- <command> [key=value ...]`.

use wavehom::harness::{load_config, run_command};

fn main() -> wavehom::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "operators".into());
    let overrides: Vec<String> = args.collect();
    let cfg = load_config(None, &overrides)?;
    let (report, dir) = run_command(&name, &cfg)?;
    print!("{}", report.summary());
    println!("outputs in {}", dir.display());
    Ok(())
}
