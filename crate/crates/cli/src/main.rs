//! Command-line driver for the self-concatenated code toolkit:
//! thresholds, density evolution traces, transfer-function grids and
//! finite-length erasure simulations, all reproducible from a small
//! key=value config.

mod config;
mod ops;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;

#[derive(Parser, Debug)]
#[command(
    name = "selfcat",
    about = "Threshold analysis and erasure-channel simulation of self-concatenated convolutional code ensembles",
    after_help = "The run is described by flat key = value settings; [section] headers are \
                  cosmetic. Every key has a default, the resolved set is printed before the \
                  run and embedded in each artifact. Minimal invocation:\n\n    \
                  selfcat --set operation=de-trace --set class=pcc --set eps=0.6"
)]
struct Args {
    /// Config file with key = value lines and optional [section] headers.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one key, e.g. --set tol=1e-4. Repeatable, applied after
    /// the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Directory the artifacts are written into.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Seed for every random draw of the run.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads for independent sub-results. Results are placed by
    /// index, so artifacts do not depend on this.
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> Result<()> {
    let args = Args::parse();
    let text = match &args.config {
        Some(path) => Some(
            std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?,
        ),
        None => None,
    };
    let cfg = config::resolve(text.as_deref(), &args.set, args.out, args.seed, args.jobs)?;
    for line in config::config_lines(&cfg.resolved) {
        println!("{line}");
    }
    ops::run(&cfg)
}
