// SPDX-License-Identifier: MIT OR Apache-2.0

//! `cpkit` — changepoint detection and power-analysis experiments from the
//! command line.

mod cmds;
mod config;
mod errors;
mod io;
mod svg;

use clap::{Parser, Subcommand, ValueEnum};
use cpkit::Scenario;
use errors::CliError;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "cpkit",
    about = "Changepoint detection and Monte Carlo power analysis",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Binseg,
    Pelt,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Step,
    InternalRamp,
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregateArg {
    Mean,
}

#[derive(Subcommand)]
enum Command {
    /// Detect changepoints in a time,value CSV file
    Detect {
        /// Input CSV with a `time,value` header
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Binseg)]
        method: MethodArg,
        /// Maximum breakpoint count considered by BIC selection
        #[arg(long = "kmax")]
        kmax: Option<usize>,
        /// PELT penalty override (default: 2 sigma_hat^2 ln n)
        #[arg(long)]
        penalty: Option<f64>,
        /// Permutation count for the significance test (0 = skip)
        #[arg(long = "perms", default_value_t = 0)]
        perms: usize,
        /// Bootstrap resample count for location CIs (0 = skip)
        #[arg(long = "boots", default_value_t = 0)]
        boots: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Average rows sharing a time label (multi-site inputs)
        #[arg(long, value_enum)]
        aggregate: Option<AggregateArg>,
        /// Optional breakpoint CSV output path
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full Monte Carlo power grid and emit CSV + SVG heatmaps
    PowerGrid {
        /// key = value configuration file
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (0 = all cores)
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Replicates per cell (overrides config)
        #[arg(long)]
        reps: Option<usize>,
        /// Output CSV path (heatmaps derive from it)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Autocorrelation robustness study (n = 18, K = 2, both detectors)
    Ar1Study {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long, default_value_t = 500)]
        reps: usize,
        #[arg(long, default_value = "ar1_study.csv")]
        out: PathBuf,
    },
    /// Early-warning-signal vs changepoint-detection study (n = 18, K = 1)
    EwsStudy {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long, default_value_t = 300)]
        reps: usize,
        #[arg(long, default_value = "ews_study.csv")]
        out: PathBuf,
    },
    /// Generate one synthetic series plus a truth sidecar
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long = "es")]
        effect_size: f64,
        #[arg(long = "k")]
        n_bkps: usize,
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        #[arg(long, default_value_t = 5.0)]
        sigma: f64,
        #[arg(long, default_value_t = 35.0)]
        baseline: f64,
        #[arg(long, value_enum, default_value_t = ScenarioArg::Step)]
        scenario: ScenarioArg,
        #[arg(long)]
        seed: Option<u64>,
        /// Replicate index within the seed's stream
        #[arg(long, default_value_t = 0)]
        rep: u64,
        #[arg(long, default_value = "simulated.csv")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Detect {
            input,
            method,
            kmax,
            penalty,
            perms,
            boots,
            seed,
            aggregate,
            out,
        } => cmds::cmd_detect(cmds::DetectArgs {
            input,
            method: match method {
                MethodArg::Binseg => cpkit::Method::BinsegBic,
                MethodArg::Pelt => cpkit::Method::Pelt,
            },
            k_max: kmax,
            penalty,
            perms,
            boots,
            seed,
            aggregate_mean: matches!(aggregate, Some(AggregateArg::Mean)),
            out,
        }),
        Command::PowerGrid {
            config,
            seed,
            workers,
            reps,
            out,
        } => cmds::cmd_power_grid(cmds::PowerGridArgs {
            config,
            seed,
            workers,
            reps,
            out,
        }),
        Command::Ar1Study {
            seed,
            workers,
            reps,
            out,
        } => cmds::cmd_ar1_study(cmds::StudyArgs {
            seed,
            workers,
            reps,
            out,
        }),
        Command::EwsStudy {
            seed,
            workers,
            reps,
            out,
        } => cmds::cmd_ews_study(cmds::StudyArgs {
            seed,
            workers,
            reps,
            out,
        }),
        Command::Simulate {
            n,
            effect_size,
            n_bkps,
            phi,
            sigma,
            baseline,
            scenario,
            seed,
            rep,
            out,
        } => cmds::cmd_simulate(cmds::SimulateArgs {
            n,
            effect_size,
            n_bkps,
            phi,
            sigma,
            baseline,
            scenario: match scenario {
                ScenarioArg::Step => Scenario::Step,
                ScenarioArg::InternalRamp => Scenario::InternalRamp,
            },
            seed,
            rep,
            out,
        }),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    }
}
