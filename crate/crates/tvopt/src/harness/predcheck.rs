use crate::bounds::taylor_error_bounds;
use crate::problem::{FeasibleSet, SamplingGrid, TimeVaryingProblem};
use crate::scalar::{lit, Scalar};
use crate::solver::{predict_exact, DerivativeMode, PredictionState};
use crate::vecmath;

use super::{oracle_optimizer, HarnessError};

/// Result of checking the optimal-prediction Taylor error against its
/// second-order bound along an oracle trajectory.
#[derive(Debug, Clone, Copy)]
pub struct PredictionErrorReport<S: Scalar> {
    /// Worst `error / (bound + slack)` over the grid.
    pub worst_ratio: S,
    /// Largest observed prediction error.
    pub max_error: S,
    /// The second-order Taylor bound for the grid's period.
    pub bound: S,
    /// Absolute slack added to the bound before forming ratios, which
    /// keeps exactly-predictable problems (zero bound) well-defined.
    pub slack: S,
    pub passed: bool,
}

/// From each oracle point `x*(t_k)`, computes the exact prediction with
/// full gradient weight and measures its distance to `x*(t_{k+1})`,
/// asserting it stays below the second-order Taylor bound. Requires the
/// third-order constants and an analytic mixed derivative.
pub fn prediction_error_check<S: Scalar, P: TimeVaryingProblem<S> + ?Sized>(
    problem: &P,
    set: &FeasibleSet<S>,
    grid: &SamplingGrid<S>,
    oracle_tol: Option<S>,
) -> Result<PredictionErrorReport<S>, HarnessError> {
    let constants = problem.constants();
    if !constants.has_third_order() {
        return Err(HarnessError::MissingThirdOrder);
    }
    let bound = taylor_error_bounds(
        constants.strong_convexity,
        constants.gradient_lipschitz,
        constants.mixed_bound,
        grid.period,
        constants.hessian_lipschitz_x,
        constants.hessian_lipschitz_t,
        constants.mixed_lipschitz_t,
    )
    .second_order
    .expect("third-order constants are present");
    let slack = lit::<S>(1e-8);

    // oracle trajectory, warm-started along the grid
    let mut optimizers = Vec::with_capacity(grid.steps + 1);
    let mut warm = vec![S::zero(); problem.dim()];
    for k in 0..=grid.steps {
        let solution = oracle_optimizer(problem, set, grid.time_at(k), &warm, oracle_tol)?;
        warm = solution.clone();
        optimizers.push(solution);
    }

    let mut max_error = S::zero();
    for k in 0..grid.steps {
        let state = PredictionState::at(
            problem,
            &optimizers[k],
            grid.time_at(k),
            grid.period,
            DerivativeMode::Analytic,
            None,
        )?;
        let tol = lit::<S>(1e-12) * (S::one() + vecmath::norm(&state.base));
        let prediction = predict_exact(problem, set, &state, S::one(), tol, 1_000_000)?;
        let error = vecmath::dist(&prediction.point, &optimizers[k + 1]);
        max_error = max_error.max(error);
    }

    let worst_ratio = max_error / (bound + slack);
    Ok(PredictionErrorReport {
        worst_ratio,
        max_error,
        bound,
        slack,
        passed: worst_ratio <= S::one(),
    })
}
