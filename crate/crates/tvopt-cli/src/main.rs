//! Command-line driver for tracking experiments, sampling-period
//! sweeps, and certificate calculations.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numeric divergence.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{cmd_bounds, cmd_run, cmd_sweep, BoundsArgs, Outcome, SweepOptions};
use tvopt::harness::BudgetTiming;
use tvopt::solver::PredictionSteps;

#[derive(Parser)]
#[command(
    name = "tvopt",
    about = "Prediction-correction tracking of time-varying convex problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Shared {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the configuration's master seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one tracking run and write `run.csv`.
    Run {
        #[command(flatten)]
        shared: Shared,
    },
    /// Sweep sampling periods and write `sweep.csv`.
    Sweep {
        #[command(flatten)]
        shared: Shared,
        /// Comma-separated sampling periods (overrides the config).
        #[arg(long, value_delimiter = ',')]
        h_list: Option<Vec<f64>>,
        /// Allocate prediction/correction counts from the timing model
        /// instead of the configured variants.
        #[arg(long)]
        budget: bool,
        /// Fraction of the period available for correction.
        #[arg(long, default_value_t = 0.5)]
        r1: f64,
        /// Fraction of the period available for prediction or extra
        /// correction.
        #[arg(long, default_value_t = 0.5)]
        r2: f64,
        /// Seconds per correction step.
        #[arg(long = "t-c", default_value_t = 0.76e-3)]
        t_c: f64,
        /// Seconds per prediction step.
        #[arg(long = "t-p", default_value_t = 0.62e-3)]
        t_p: f64,
        /// Seconds of one-off prediction overhead per period.
        #[arg(long = "t-bar", default_value_t = 10e-3)]
        t_bar: f64,
    },
    /// Evaluate the convergence certificates and print the report JSON.
    Bounds {
        /// Strong-convexity bound.
        #[arg(long)]
        m: f64,
        /// Gradient Lipschitz bound.
        #[arg(long = "L")]
        l: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        /// Prediction steps: a count or `inf` for exact prediction.
        #[arg(long = "P", default_value = "1")]
        prediction_steps: String,
        /// Correction steps.
        #[arg(long = "C", default_value_t = 3)]
        correction_steps: usize,
        /// Suboptimality factor; omitting it selects the constrained
        /// certificates.
        #[arg(long)]
        gamma: Option<f64>,
        /// Mixed-derivative bound.
        #[arg(long = "C0", default_value_t = 0.0)]
        c0: f64,
        /// Third-derivative bounds; providing any of them enables the
        /// local certificates (missing ones default to zero).
        #[arg(long = "C1")]
        c1: Option<f64>,
        #[arg(long = "C2")]
        c2: Option<f64>,
        #[arg(long = "C3")]
        c3: Option<f64>,
        /// Sampling period the certificate is evaluated at.
        #[arg(long, default_value_t = 0.1)]
        h: f64,
        /// Local rate used when third-order bounds are provided.
        #[arg(long, default_value_t = 0.99)]
        tau: f64,
        /// Declared initial optimality gap for the local regime.
        #[arg(long)]
        initial_gap: Option<f64>,
    },
}

fn parse_prediction_steps(text: &str) -> Result<PredictionSteps, String> {
    match text {
        "inf" | "exact" => Ok(PredictionSteps::Exact),
        other => other
            .parse::<usize>()
            .map(PredictionSteps::Finite)
            .map_err(|_| format!("prediction steps must be a count or `inf`, got `{other}`")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help/version requests are not errors
            if err.use_stderr() {
                eprintln!("{err}");
                return ExitCode::from(1);
            }
            print!("{err}");
            return ExitCode::SUCCESS;
        }
    };

    let outcome = match cli.command {
        Command::Run { shared } => load_and(&shared, cmd_run),
        Command::Sweep {
            shared,
            h_list,
            budget,
            r1,
            r2,
            t_c,
            t_p,
            t_bar,
        } => {
            let options = SweepOptions {
                h_list,
                budget: budget.then_some(BudgetTiming {
                    r1,
                    r2,
                    correction_time: t_c,
                    prediction_time: t_p,
                    prediction_overhead: t_bar,
                }),
            };
            load_and(&shared, |config, out| cmd_sweep(config, out, &options))
        }
        Command::Bounds {
            m,
            l,
            alpha,
            beta,
            prediction_steps,
            correction_steps,
            gamma,
            c0,
            c1,
            c2,
            c3,
            h,
            tau,
            initial_gap,
        } => {
            let prediction_steps = match parse_prediction_steps(&prediction_steps) {
                Ok(steps) => steps,
                Err(message) => {
                    eprintln!("error: {message}");
                    return ExitCode::from(1);
                }
            };
            let args = BoundsArgs {
                m,
                l,
                alpha,
                beta,
                prediction_steps,
                correction_steps,
                gamma,
                c0,
                c1,
                c2,
                c3,
                h,
                tau,
                initial_gap,
            };
            match cmd_bounds(&args) {
                Ok(()) => return ExitCode::SUCCESS,
                Err(err) => {
                    eprintln!("error: {err:#}");
                    return ExitCode::from(1);
                }
            }
        }
    };

    match outcome {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Diverged) => ExitCode::from(2),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn load_and(
    shared: &Shared,
    body: impl FnOnce(&config::ExperimentConfig, &std::path::Path) -> anyhow::Result<Outcome>,
) -> anyhow::Result<Outcome> {
    let mut config = config::load_config(&shared.config)?;
    if let Some(seed) = shared.seed {
        config.seed = seed;
    }
    body(&config, &shared.out)
}
