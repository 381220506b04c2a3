use crate::problem::{FeasibleSet, TimeVaryingProblem};
use crate::scalar::{lit, Scalar};
use crate::solver::TrackingRun;
use crate::vecmath;

use super::HarnessError;

const ORACLE_ITERATION_CAP: usize = 10_000_000;

/// High-accuracy reference optimizer at time `t`: projected gradient
/// with stepsize `1/L` from `warm` until the fixed-point residual
/// (one-step displacement) drops below the tolerance. The default
/// tolerance is `1e-11 * (1 + ||x||)`, floored near machine precision
/// so single-precision runs terminate.
pub fn oracle_optimizer<S: Scalar, P: TimeVaryingProblem<S> + ?Sized>(
    problem: &P,
    set: &FeasibleSet<S>,
    t: S,
    warm: &[S],
    tol: Option<S>,
) -> Result<Vec<S>, HarnessError> {
    let step = S::one() / problem.constants().gradient_lipschitz;
    let mut current = set.project(warm)?;
    for _ in 0..ORACLE_ITERATION_CAP {
        let gradient = problem.gradient(&current, t);
        let stepped: Vec<S> = current
            .iter()
            .zip(&gradient)
            .map(|(&x, &g)| x - step * g)
            .collect();
        let next = set.project(&stepped)?;
        let moved = vecmath::dist(&next, &current);
        let scale = S::one() + vecmath::norm(&current);
        let threshold = tol
            .unwrap_or_else(|| lit::<S>(1e-11) * scale)
            .max(lit::<S>(8.0) * S::epsilon() * scale);
        current = next;
        if moved <= threshold {
            return Ok(current);
        }
    }
    Err(HarnessError::OracleIterationCap)
}

/// Attaches the oracle trajectory and the error series to a run: the
/// oracle is warm-started along the grid, `errors[k]` is the distance
/// of the iterate to the optimizer, and `prediction_errors[k]` the
/// distance of the predicted point to the next optimizer.
pub fn evaluate_run<S: Scalar, P: TimeVaryingProblem<S> + ?Sized>(
    problem: &P,
    set: &FeasibleSet<S>,
    run: &mut TrackingRun<S>,
    tol: Option<S>,
) -> Result<(), HarnessError> {
    let points = run.iterates.len();
    let mut oracle = Vec::with_capacity(points);
    let mut errors = Vec::with_capacity(points);
    let mut warm = run.iterates[0].clone();
    for k in 0..points {
        let t = run.grid.time_at(k);
        let solution = oracle_optimizer(problem, set, t, &warm, tol)?;
        errors.push(vecmath::dist(&run.iterates[k], &solution));
        warm = solution.clone();
        oracle.push(solution);
    }
    let mut prediction_errors = Vec::new();
    for k in 0..run.predicted.len().min(oracle.len().saturating_sub(1)) {
        prediction_errors.push(vecmath::dist(&run.predicted[k], &oracle[k + 1]));
    }
    run.oracle = oracle;
    run.errors = errors;
    run.prediction_errors = prediction_errors;
    Ok(())
}

/// Burn-in policy for the asymptotic worst-case error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KBarPolicy {
    /// `max(100, steps/2)`, clamped to leave at least one tail sample.
    DeskScale,
    Fixed(usize),
}

impl KBarPolicy {
    pub fn resolve(&self, steps: usize) -> usize {
        match self {
            KBarPolicy::DeskScale => (steps / 2).max(100).min(steps.saturating_sub(1)),
            KBarPolicy::Fixed(k) => (*k).min(steps.saturating_sub(1)),
        }
    }
}

/// Worst-case tracking error beyond the burn-in index: the maximum of
/// `errors[k]` over `k > k_bar`. Diverged runs report infinity.
pub fn asymptotic_error<S: Scalar>(run: &TrackingRun<S>, k_bar: usize) -> S {
    if run.diverged() {
        return S::infinity();
    }
    assert!(
        k_bar < run.grid.steps,
        "burn-in index must precede the end of the grid"
    );
    assert!(
        !run.errors.is_empty(),
        "evaluate the run against the oracle first"
    );
    run.errors[k_bar + 1..]
        .iter()
        .fold(S::neg_infinity(), |acc, &e| acc.max(e))
}
