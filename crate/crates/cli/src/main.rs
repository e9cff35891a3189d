//! Single-binary front end: every experiment runs from a JSON config and
//! writes CSV + JSON reports into an output directory. Exit status: 0 when
//! all declared tolerances pass, 1 on a tolerance failure, 2 on config or
//! i/o problems, 3 on a numerical failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "lacuna",
    about = "Directional multiplier laboratory on periodic grids",
    version
)]
struct Cli {
    /// JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports and exports.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the config's random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread count (requires the parallel build).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Allow overwriting existing report files.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Tabulate the cell label of every direction in a set.
    Dissect,
    /// Build a direction set and export it as JSON.
    GenDirections,
    /// Sample the wedge covering of the singular cones.
    VerifyCovering,
    /// Check the inclusion-exclusion operator identity.
    VerifyIe,
    /// Apply one operator to a grid function and export the result.
    Apply,
    /// Operator-norm growth sweep over nested direction subsets.
    SweepNorms,
    /// Far-field decay constants of the outer kernel.
    KernelDecay,
    /// Maximal outer piece against its square function.
    Cww,
    /// Almost-orthogonality quotient sweep.
    AlmostOrtho,
    /// Lacunary versus equispaced maximal averages.
    MaximalAvg,
    /// Sampled directional A2 constant of a weight.
    A2,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("LACUNA_LOG")).init();
    let cli = Cli::parse();

    #[cfg(feature = "parallel")]
    {
        if let Some(threads) = cli.threads {
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: cannot build thread pool: {e}");
                    return ExitCode::from(2);
                }
            };
            return pool.install(|| dispatch(&cli));
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        if let Some(threads) = cli.threads {
            if threads > 1 {
                log::warn!("sequential build: --threads {threads} runs on one thread");
            }
        }
    }
    dispatch(&cli)
}

fn dispatch(cli: &Cli) -> ExitCode {
    match commands::run(cli.command, &cli.config, &cli.out, cli.seed, cli.force) {
        Ok(passed) => {
            if passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
