//! Prediction-correction solvers: the prediction step (approximate,
//! exact, closed-form), the correction step, and the driver loops for
//! the constrained and unconstrained algorithms.

mod config;
mod correct;
mod driver;
mod predict;
mod run;

pub use config::{DerivativeMode, PredictionSteps, SolverConfig};
pub use correct::{approx_mixed_derivative, correct};
pub use driver::{run_cfopc, run_ufopc};
pub use predict::{
    predict_closed_form, predict_constrained, predict_exact, predict_unconstrained,
    ExactPrediction, PredictionState,
};
pub use run::TrackingRun;

use thiserror::Error;

use crate::problem::ProblemError;

#[derive(Debug, Error)]
pub enum SolverError {
    /// A non-finite iterate appeared. For the inner operations the index
    /// is the inner iteration; the run drivers translate it to the outer
    /// step index.
    #[error("diverged (non-finite iterate) at step {step}")]
    Diverged { step: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("analytic derivative mode requires the problem to provide a mixed derivative")]
    MissingMixedDerivative,
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}
