// `!(x > 0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use crate::problem::{FeasibleSet, TimeVaryingProblem};
use crate::scalar::Scalar;
use crate::vecmath;

use super::SolverError;

/// Correction: `steps` projected gradient iterations on the newly
/// revealed objective at `t_next`. Unlike the prediction, the gradient
/// is re-evaluated at every inner iterate.
pub fn correct<S: Scalar, P: TimeVaryingProblem<S> + ?Sized>(
    problem: &P,
    set: &FeasibleSet<S>,
    start: &[S],
    t_next: S,
    step_size: S,
    steps: usize,
) -> Result<Vec<S>, SolverError> {
    let mut current = start.to_vec();
    for iter in 0..steps {
        let gradient = problem.gradient(&current, t_next);
        let stepped: Vec<S> = current
            .iter()
            .zip(&gradient)
            .map(|(&x, &g)| x - step_size * g)
            .collect();
        current = set.project(&stepped)?;
        if !vecmath::all_finite(&current) {
            return Err(SolverError::Diverged { step: iter });
        }
    }
    Ok(current)
}

/// First-order backward-difference estimate of the time derivative of
/// the gradient: `(grad_now - grad_prev) / h`. At the first sample the
/// caller passes `grad_prev = grad_now` so the estimate is zero.
pub fn approx_mixed_derivative<S: Scalar>(
    grad_now: &[S],
    grad_prev: &[S],
    period: S,
) -> Result<Vec<S>, SolverError> {
    if !(period > S::zero()) {
        return Err(SolverError::InvalidParameter(
            "sampling period must be positive".into(),
        ));
    }
    if grad_now.len() != grad_prev.len() {
        return Err(SolverError::DimensionMismatch {
            expected: grad_now.len(),
            got: grad_prev.len(),
        });
    }
    Ok(grad_now
        .iter()
        .zip(grad_prev)
        .map(|(&now, &prev)| (now - prev) / period)
        .collect())
}
