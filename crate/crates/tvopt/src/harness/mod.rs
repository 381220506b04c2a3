//! Benchmark harness: high-accuracy reference optimizers, tracking
//! error series, asymptotic worst-case errors, sampling-period sweeps
//! with slope fits, compute-budget allocation, and empirical checks of
//! the analytical certificates.

mod budget;
mod envelope;
mod oracle;
mod predcheck;
mod sweep;

pub use budget::{allocate_budget, run_budgeted, BudgetPlan, BudgetStrategy, BudgetTiming};
pub use envelope::{envelope_check, EnvelopeCheck, ENVELOPE_ABS_TOL};
pub use oracle::{asymptotic_error, evaluate_run, oracle_optimizer, KBarPolicy};
pub use predcheck::{prediction_error_check, PredictionErrorReport};
pub use sweep::{
    fit_loglog, steps_for_horizon, sweep_h, SlopeFit, SweepAlgorithm, SweepEntry, SweepPoint,
    SweepResult, SweepSettings,
};

use thiserror::Error;

use crate::bounds::BoundsError;
use crate::problem::ProblemError;
use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("oracle hit the iteration cap without reaching tolerance")]
    OracleIterationCap,
    #[error("run has not been evaluated against the oracle")]
    NotEvaluated,
    #[error("check requires the third-order smoothness constants")]
    MissingThirdOrder,
    #[error("invalid harness input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}
