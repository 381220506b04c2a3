//! Online tracking of time-varying constrained convex optimization problems.
//!
//! The crate implements first-order prediction-correction solvers for
//! problems of the form `x*(t) = argmin_{x in X} f(x; t)` sampled on a
//! fixed grid `t_k = t0 + k h`. At each step the solver *predicts* where
//! the minimizer moves (projected gradient steps on a frozen quadratic
//! model of the sampled problem) and then *corrects* on the newly
//! revealed objective with plain projected gradient descent.
//!
//! Alongside the solvers the crate ships:
//!
//! * [`bounds`] — evaluation of all analytical convergence certificates
//!   (contraction factors, linear rates, certified sampling periods and
//!   attraction radii, Taylor-error bounds, error-recursion envelopes);
//! * [`scenarios`] — three ready-made benchmark problems: a scalar
//!   periodic tracking problem, a box-constrained vector problem, and a
//!   DER dispatch problem driven by synthetic load traces;
//! * [`harness`] — a reference-oracle benchmark harness: high-accuracy
//!   per-step optimizers, asymptotic worst-case errors, sampling-period
//!   sweeps with log-log slope fits, compute-budget allocation, and
//!   empirical envelope checks against the certificates.
//!
//! All numeric code is generic over the scalar type via [`Scalar`]
//! (implemented for `f32` and `f64`); concrete `f64` aliases are
//! exported at the crate root.

pub mod bounds;
pub mod harness;
pub mod problem;
pub mod scalar;
pub mod scenarios;
pub mod solver;
pub(crate) mod vecmath;

pub use problem::{FeasibleSet, SamplingGrid, SmoothnessConstants, TimeVaryingProblem};
pub use scalar::Scalar;
pub use solver::{DerivativeMode, PredictionSteps, SolverConfig, TrackingRun};

/// Convergence-certificate report over `f64`.
pub type BoundReport64 = bounds::BoundReport<f64>;
/// Feasible set over `f64`.
pub type FeasibleSet64 = FeasibleSet<f64>;
/// Sampling grid over `f64`.
pub type SamplingGrid64 = SamplingGrid<f64>;
/// Smoothness constants over `f64`.
pub type SmoothnessConstants64 = SmoothnessConstants<f64>;
/// Solver configuration over `f64`.
pub type SolverConfig64 = SolverConfig<f64>;
/// Tracking-run record over `f64`.
pub type TrackingRun64 = TrackingRun<f64>;
