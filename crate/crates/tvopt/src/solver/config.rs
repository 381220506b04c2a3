// `!(x > 0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use crate::problem::SmoothnessConstants;
use crate::scalar::{lit, Scalar};

use super::SolverError;

/// Number of inner prediction iterations, or the exact-prediction mode
/// that iterates to tolerance instead of a fixed count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionSteps {
    Finite(usize),
    Exact,
}

/// How the time derivative of the gradient is obtained during
/// prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeMode {
    /// Use the problem's analytic mixed derivative.
    Analytic,
    /// First-order backward difference of successive gradients; the
    /// estimate at the first step is zero (no earlier gradient exists).
    BackwardDifference,
}

/// Solver parameters shared by the constrained and unconstrained
/// drivers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<S: Scalar> {
    /// Prediction stepsize.
    pub prediction_step_size: S,
    /// Correction stepsize.
    pub correction_step_size: S,
    pub prediction_steps: PredictionSteps,
    pub correction_steps: usize,
    /// Suboptimality factor in `[0, 1]`; only the unconstrained driver
    /// uses it (the constrained prediction always takes the full
    /// gradient, which corresponds to factor 1).
    pub suboptimality_factor: S,
    pub derivative_mode: DerivativeMode,
    /// Base tolerance for exact prediction; the effective displacement
    /// tolerance at a step is `base * (1 + ||x_k||)`.
    pub exact_prediction_tol: S,
    /// Inner-iteration cap for exact prediction; `None` derives a cap
    /// from the conditioning and the tolerance.
    pub exact_prediction_max_iters: Option<usize>,
}

impl<S: Scalar> SolverConfig<S> {
    pub fn new(
        prediction_step_size: S,
        correction_step_size: S,
        prediction_steps: PredictionSteps,
        correction_steps: usize,
    ) -> Self {
        Self {
            prediction_step_size,
            correction_step_size,
            prediction_steps,
            correction_steps,
            suboptimality_factor: S::one(),
            derivative_mode: DerivativeMode::Analytic,
            exact_prediction_tol: lit(1e-10),
            exact_prediction_max_iters: None,
        }
    }

    pub fn with_suboptimality_factor(mut self, gamma: S) -> Self {
        self.suboptimality_factor = gamma;
        self
    }

    pub fn with_derivative_mode(mut self, mode: DerivativeMode) -> Self {
        self.derivative_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.prediction_step_size > S::zero()) {
            return Err(SolverError::InvalidConfig(
                "prediction stepsize must be positive".into(),
            ));
        }
        if !(self.correction_step_size > S::zero()) {
            return Err(SolverError::InvalidConfig(
                "correction stepsize must be positive".into(),
            ));
        }
        let gamma = self.suboptimality_factor;
        if !(gamma >= S::zero() && gamma <= S::one()) {
            return Err(SolverError::InvalidConfig(
                "suboptimality factor must lie in [0, 1]".into(),
            ));
        }
        if !(self.exact_prediction_tol > S::zero()) {
            return Err(SolverError::InvalidConfig(
                "exact-prediction tolerance must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Whether both stepsizes satisfy the certificate range
    /// (strictly below `2 / L`). Runs outside the range still execute
    /// but are flagged as uncertified.
    pub fn certified_stepsizes(&self, constants: &SmoothnessConstants<S>) -> bool {
        let bound = lit::<S>(2.0) / constants.gradient_lipschitz;
        self.prediction_step_size < bound && self.correction_step_size < bound
    }

    /// Inner-iteration cap for exact prediction: the configured value,
    /// or `10 * ceil(L/m) * ceil(-ln tol)` when unset.
    pub fn exact_iteration_cap(&self, constants: &SmoothnessConstants<S>, tol: S) -> usize {
        if let Some(cap) = self.exact_prediction_max_iters {
            return cap;
        }
        let cond = (constants.gradient_lipschitz / constants.strong_convexity)
            .ceil()
            .to_f64()
            .unwrap_or(1.0) as usize;
        let digits = (-tol.ln()).ceil().to_f64().unwrap_or(1.0).max(1.0) as usize;
        10 * cond.max(1) * digits
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_outside_unit_interval_is_rejected() {
        let cfg = SolverConfig::new(0.5, 0.5, PredictionSteps::Finite(1), 1)
            .with_suboptimality_factor(1.5);
        assert!(cfg.validate().is_err());
        let cfg = SolverConfig::new(0.5, 0.5, PredictionSteps::Finite(1), 1)
            .with_suboptimality_factor(-0.1);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn stepsize_certificate_range() {
        let constants = SmoothnessConstants::new(1.0, 2.53, 0.0).unwrap();
        let ok = SolverConfig::new(0.56, 0.56, PredictionSteps::Finite(1), 3);
        assert!(ok.certified_stepsizes(&constants));
        let bad = SolverConfig::new(10.0, 0.56, PredictionSteps::Finite(1), 3);
        assert!(!bad.certified_stepsizes(&constants));
        assert!(bad.validate().is_ok()); // warns, still runs
    }
}
