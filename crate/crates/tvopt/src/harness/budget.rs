use crate::problem::{FeasibleSet, SamplingGrid, TimeVaryingProblem};
use crate::scalar::Scalar;
use crate::solver::{
    correct, DerivativeMode, PredictionSteps, SolverConfig, SolverError, TrackingRun,
};

use super::HarnessError;

/// Declared per-step timing model: fractions of the sampling period
/// available before/after the corrected variable is needed, and the
/// cost of one correction step, one prediction step, and the one-off
/// prediction overhead (Hessian, gradient and time-derivative
/// evaluation). All times in seconds; the values are configuration, not
/// wall-clock measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetTiming<S: Scalar> {
    pub r1: S,
    pub r2: S,
    pub correction_time: S,
    pub prediction_time: S,
    pub prediction_overhead: S,
}

/// Iteration counts affordable within one sampling period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetPlan<S: Scalar> {
    pub sampling_period: S,
    pub timing: BudgetTiming<S>,
    /// Correction steps in the first window.
    pub corrections: usize,
    /// Extra correction steps affordable in the second window.
    pub extra_corrections: usize,
    /// Prediction steps affordable in the second window; `None` when
    /// the window cannot even cover the prediction overhead.
    pub predictions: Option<usize>,
    /// Correction steps when the whole period is spent correcting.
    pub total_corrections: usize,
}

impl<S: Scalar> BudgetPlan<S> {
    pub fn prediction_unaffordable(&self) -> bool {
        self.predictions.is_none()
    }
}

/// Allocates iteration counts under the timing model:
/// `C = floor(r1 h / t_C)`, `C' = floor(r2 h / t_C)`,
/// `P = floor((r2 h - t_bar) / t_P)` (unaffordable when the window is
/// shorter than the overhead), and the total-correction variant
/// `floor(h / t_C)`.
pub fn allocate_budget<S: Scalar>(period: S, timing: BudgetTiming<S>) -> BudgetPlan<S> {
    assert!(period > S::zero(), "period must be positive");
    assert!(
        timing.correction_time > S::zero()
            && timing.prediction_time > S::zero()
            && timing.prediction_overhead > S::zero(),
        "timing entries must be positive"
    );
    for r in [timing.r1, timing.r2] {
        assert!(
            r >= S::zero() && r <= S::one(),
            "window fractions lie in [0, 1]"
        );
    }
    let floor_count = |v: S| v.floor().to_usize().unwrap_or(0);
    let corrections = floor_count(timing.r1 * period / timing.correction_time);
    let extra_corrections = floor_count(timing.r2 * period / timing.correction_time);
    let prediction_window = timing.r2 * period;
    let predictions = if prediction_window < timing.prediction_overhead {
        None
    } else {
        Some(floor_count(
            (prediction_window - timing.prediction_overhead) / timing.prediction_time,
        ))
    };
    let total_corrections = floor_count(period / timing.correction_time);
    BudgetPlan {
        sampling_period: period,
        timing,
        corrections,
        extra_corrections,
        predictions,
        total_corrections,
    }
}

/// The three run strategies compared under a compute budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetStrategy {
    /// Prediction in the second window, correction in the first.
    PredictionCorrection,
    /// Correction in the first window, extra correction in the second;
    /// the recorded iterate is the one after the *first* window, which
    /// is what the decision process consumes.
    CorrectionExtra,
    /// The whole period spent correcting; the recorded iterate is the
    /// final one.
    TotalCorrection,
}

/// Runs one strategy under a budget plan. Prediction-correction and
/// total-correction reduce to the standard constrained driver;
/// correction+extra needs its own loop because the measured iterate and
/// the carried iterate differ.
#[allow(clippy::too_many_arguments)]
pub fn run_budgeted<S: Scalar, P: TimeVaryingProblem<S> + ?Sized>(
    problem: &P,
    set: &FeasibleSet<S>,
    grid: &SamplingGrid<S>,
    prediction_step_size: S,
    correction_step_size: S,
    plan: &BudgetPlan<S>,
    strategy: BudgetStrategy,
    derivative_mode: DerivativeMode,
    x0: &[S],
) -> Result<TrackingRun<S>, HarnessError> {
    match strategy {
        BudgetStrategy::PredictionCorrection => {
            let predictions = plan.predictions.ok_or_else(|| {
                HarnessError::InvalidInput(
                    "prediction is unaffordable at this sampling period".into(),
                )
            })?;
            let cfg = SolverConfig::new(
                prediction_step_size,
                correction_step_size,
                PredictionSteps::Finite(predictions),
                plan.corrections,
            )
            .with_derivative_mode(derivative_mode);
            Ok(crate::solver::run_cfopc(problem, set, grid, &cfg, x0)?)
        }
        BudgetStrategy::TotalCorrection => {
            let cfg = SolverConfig::new(
                prediction_step_size,
                correction_step_size,
                PredictionSteps::Finite(0),
                plan.total_corrections,
            )
            .with_derivative_mode(derivative_mode);
            Ok(crate::solver::run_cfopc(problem, set, grid, &cfg, x0)?)
        }
        BudgetStrategy::CorrectionExtra => {
            let cfg = SolverConfig::new(
                prediction_step_size,
                correction_step_size,
                PredictionSteps::Finite(0),
                plan.corrections,
            )
            .with_derivative_mode(derivative_mode);
            cfg.validate()?;
            let start = set.project(x0)?;
            let mut run = TrackingRun::new(*grid, cfg, start.clone());
            run.uncertified = !cfg.certified_stepsizes(&problem.constants());
            run.initial_projected = !set.contains(x0, S::zero());
            // carried point: the measured iterate plus the extra steps
            let mut carry = start;
            for k in 0..grid.steps {
                let t_next = grid.time_at(k + 1);
                let measured = match correct(
                    problem,
                    set,
                    &carry,
                    t_next,
                    correction_step_size,
                    plan.corrections,
                ) {
                    Ok(point) => point,
                    Err(SolverError::Diverged { .. }) => {
                        run.divergence = Some(k);
                        return Ok(run);
                    }
                    Err(other) => return Err(other.into()),
                };
                run.iterates.push(measured.clone());
                carry = match correct(
                    problem,
                    set,
                    &measured,
                    t_next,
                    correction_step_size,
                    plan.extra_corrections,
                ) {
                    Ok(point) => point,
                    Err(SolverError::Diverged { .. }) => {
                        run.divergence = Some(k);
                        return Ok(run);
                    }
                    Err(other) => return Err(other.into()),
                };
            }
            Ok(run)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_timing() -> BudgetTiming<f64> {
        BudgetTiming {
            r1: 0.5,
            r2: 0.5,
            correction_time: 0.76e-3,
            prediction_time: 0.62e-3,
            prediction_overhead: 10e-3,
        }
    }

    #[test]
    fn allocation_reproduces_the_printed_tuples() {
        let plan = allocate_budget(6e-3, paper_timing());
        assert_eq!(plan.corrections, 3);
        assert_eq!(plan.extra_corrections, 3);
        assert!(plan.prediction_unaffordable());
        assert_eq!(plan.total_corrections, 7);

        let plan = allocate_budget(22e-3, paper_timing());
        assert_eq!(plan.corrections, 14);
        assert_eq!(plan.predictions, Some(1));

        let plan = allocate_budget(40e-3, paper_timing());
        assert_eq!(plan.corrections, 26);
        assert_eq!(plan.predictions, Some(16));
        assert_eq!(plan.total_corrections, 52);
    }

    #[test]
    fn counts_are_monotone_in_the_period() {
        let timing = paper_timing();
        let mut last = allocate_budget(1e-3, timing);
        for ms in 2..=60 {
            let plan = allocate_budget(ms as f64 * 1e-3, timing);
            assert!(plan.corrections >= last.corrections);
            assert!(plan.total_corrections >= last.total_corrections);
            let p = plan.predictions.unwrap_or(0);
            let p_last = last.predictions.unwrap_or(0);
            assert!(p >= p_last);
            last = plan;
        }
    }
}
