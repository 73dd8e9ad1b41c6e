use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chenfliess_cli::runner::{run, ExperimentKind, RunOptions};

/// Stochastic Taylor expansions for path-dependent functionals: Monte Carlo
/// experiments with deterministic outputs.
#[derive(Parser)]
#[command(name = "chenfliess", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config file.
    config: PathBuf,
    /// Override the RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the Monte Carlo path count.
    #[arg(long)]
    paths: Option<usize>,
    /// Override the coarse step count.
    #[arg(long)]
    steps: Option<usize>,
    /// Worker threads (0 = all cores). Never affects results.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Exit with status 2 when the experiment's checks fail.
    #[arg(long)]
    assert: bool,
    /// Output directory for summary.json and CSV artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Verify the functional change-of-variable formula under refinement.
    ItoCheck(Common),
    /// Expand one realized path and dump per-word coefficients/integrals.
    Expand(Common),
    /// Estimate the L2 remainder at one horizon.
    L2Error(Common),
    /// Regress log RMS remainder against log horizon.
    Scaling(Common),
    /// Fit polynomial functionals to a target on a bounded-variation corpus.
    FitBv(Common),
    /// Search for a word separating two stopped paths.
    Separate(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match cli.command {
        Command::ItoCheck(c) => (ExperimentKind::ItoCheck, c),
        Command::Expand(c) => (ExperimentKind::Expand, c),
        Command::L2Error(c) => (ExperimentKind::L2Error, c),
        Command::Scaling(c) => (ExperimentKind::Scaling, c),
        Command::FitBv(c) => (ExperimentKind::FitBv, c),
        Command::Separate(c) => (ExperimentKind::Separate, c),
    };
    let opts = RunOptions {
        kind,
        config_path: common.config,
        seed: common.seed,
        paths: common.paths,
        steps: common.steps,
        workers: (common.workers > 0).then_some(common.workers),
        assert_mode: common.assert,
        out_dir: common.out,
    };
    match run(&opts) {
        Ok(outcome) => {
            println!("{}", outcome.human_line);
            if opts.assert_mode && !outcome.checks_passed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
