use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

use commands::CliError;

/// Relative-localization swarm simulator and analysis tools.
#[derive(Debug, Parser)]
#[command(name = "swa", version, about)]
struct Cli {
    /// Suppress progress and tables on stdout.
    #[arg(short, long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario config (`section.key = value` lines). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, env = "SWA_OUT", default_value = "out")]
    out: PathBuf,

    /// Overrides `sim.seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write log.csv, metrics.csv, config.resolved and schema.csv.
    Run(Common),
    /// Run a scenario for every value of one config key and several seeds.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `key=v1,v2,...`
        #[arg(long)]
        axis: String,
        /// Seeds per value; run `i` uses `seed + i`.
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        /// Run sequentially instead of on all cores.
        #[arg(long)]
        serial: bool,
    },
    /// Rank table of the relative-measurement observability matrix.
    Observability {
        /// Inclusive swarm-size range `a..b`.
        #[arg(long, default_value = "2..6")]
        n_range: String,
        /// Time step of the combined model (s).
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
    },
    /// Monte-Carlo ANEES of the focal estimator on model-matched synthetic truths.
    Anees {
        #[arg(long, env = "SWA_OUT", default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        runs: usize,
        /// Simulated seconds per run.
        #[arg(long, default_value_t = 60.0)]
        duration: f64,
        /// Seconds excluded from the pass fraction.
        #[arg(long, default_value_t = 5.0)]
        settle: f64,
    },
    /// Summary metrics of an existing log.csv.
    Metrics {
        /// Path to a log.csv written by `run`.
        #[arg(long)]
        log: PathBuf,
        /// Output directory; defaults to the log's directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seconds after dropout before steady state.
        #[arg(long, default_value_t = 30.0)]
        steady_after: f64,
    },
    /// Parse and validate a config, printing the resolved parameter set.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let quiet = cli.quiet;
    match cli.command {
        Command::Run(c) => commands::run(c.config.as_deref(), &c.out, c.seed, quiet),
        Command::Sweep {
            common,
            axis,
            seeds,
            serial,
        } => commands::sweep(
            common.config.as_deref(),
            &common.out,
            common.seed,
            &axis,
            seeds,
            !serial,
            quiet,
        ),
        Command::Observability { n_range, dt } => commands::observability(&n_range, dt, quiet),
        Command::Anees {
            out,
            seed,
            runs,
            duration,
            settle,
        } => commands::anees(&out, seed, runs, duration, settle, quiet),
        Command::Metrics {
            log,
            out,
            steady_after,
        } => commands::metrics(&log, out.as_deref(), steady_after, quiet),
        Command::Validate { config } => commands::validate(&config, quiet),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
