// `!(x > 0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use crate::problem::{FeasibleSet, TimeVaryingProblem};
use crate::scalar::Scalar;
use crate::vecmath;

use super::{approx_mixed_derivative, DerivativeMode, SolverError};

/// Everything the prediction step is allowed to see: the base iterate
/// and the gradient / mixed-derivative evaluated *once* at the sampling
/// instant. The inner iterations only ever touch the problem through
/// the Hessian action at that same frozen point.
#[derive(Debug, Clone)]
pub struct PredictionState<S: Scalar> {
    /// Base iterate `x_k`.
    pub base: Vec<S>,
    /// Gradient at `(x_k, t_k)`.
    pub gradient: Vec<S>,
    /// Mixed-derivative estimate at `(x_k, t_k)`.
    pub mixed: Vec<S>,
    /// Sampling instant `t_k`.
    pub time: S,
    /// Sampling period.
    pub period: S,
}

impl<S: Scalar> PredictionState<S> {
    /// Builds the state at `(x, t)`, obtaining the mixed derivative per
    /// the requested mode. `previous_gradient` is the gradient at the
    /// previous base point; pass `None` at the first step, which
    /// bootstraps the backward difference with a zero estimate.
    pub fn at<P: TimeVaryingProblem<S> + ?Sized>(
        problem: &P,
        x: &[S],
        t: S,
        period: S,
        mode: DerivativeMode,
        previous_gradient: Option<&[S]>,
    ) -> Result<Self, SolverError> {
        let gradient = problem.gradient(x, t);
        let mixed = match mode {
            DerivativeMode::Analytic => problem
                .mixed_derivative(x, t)
                .ok_or(SolverError::MissingMixedDerivative)?,
            DerivativeMode::BackwardDifference => match previous_gradient {
                Some(prev) => approx_mixed_derivative(&gradient, prev, period)?,
                None => vec![S::zero(); x.len()],
            },
        };
        Ok(Self {
            base: x.to_vec(),
            gradient,
            mixed,
            time: t,
            period,
        })
    }
}

/// Result of an exact (iterate-to-tolerance) prediction. Hitting the
/// iteration cap is a warning, not an error.
#[derive(Debug, Clone)]
pub struct ExactPrediction<S: Scalar> {
    pub point: Vec<S>,
    pub converged: bool,
}

/// Gradient of the frozen prediction model at `candidate`:
/// `H_k (candidate - x_k) + h * tdx_k + gamma * grad_k`.
fn model_gradient<S: Scalar, P: TimeVaryingProblem<S> + ?Sized>(
    problem: &P,
    state: &PredictionState<S>,
    candidate: &[S],
    gamma: S,
) -> Vec<S> {
    let offset = vecmath::sub(candidate, &state.base);
    let hv = problem.hessian_vec(&state.base, state.time, &offset);
    hv.iter()
        .zip(state.mixed.iter().zip(&state.gradient))
        .map(|(&h_i, (&m_i, &g_i))| h_i + state.period * m_i + gamma * g_i)
        .collect()
}

fn prediction_loop<S: Scalar, P: TimeVaryingProblem<S> + ?Sized>(
    problem: &P,
    set: Option<&FeasibleSet<S>>,
    state: &PredictionState<S>,
    step_size: S,
    steps: usize,
    gamma: S,
) -> Result<Vec<S>, SolverError> {
    let mut current = state.base.clone();
    for iter in 0..steps {
        let direction = model_gradient(problem, state, &current, gamma);
        let stepped: Vec<S> = current
            .iter()
            .zip(&direction)
            .map(|(&x, &d)| x - step_size * d)
            .collect();
        current = match set {
            Some(set) => set.project(&stepped)?,
            None => stepped,
        };
        if !vecmath::all_finite(&current) {
            return Err(SolverError::Diverged { step: iter });
        }
    }
    Ok(current)
}

/// Constrained prediction: `steps` projected gradient iterations on the
/// frozen quadratic model, starting from the base iterate. The Hessian,
/// gradient and mixed derivative are evaluated once at `(x_k, t_k)` and
/// never re-evaluated inside the loop.
pub fn predict_constrained<S: Scalar, P: TimeVaryingProblem<S> + ?Sized>(
    problem: &P,
    set: &FeasibleSet<S>,
    state: &PredictionState<S>,
    step_size: S,
    steps: usize,
) -> Result<Vec<S>, SolverError> {
    prediction_loop(problem, Some(set), state, step_size, steps, S::one())
}

/// Unconstrained prediction with the suboptimality factor dialing the
/// gradient term from iso-residual (0) to full Newton-like (1). With
/// factor 1 this agrees bit-for-bit with [`predict_constrained`] on the
/// whole space.
pub fn predict_unconstrained<S: Scalar, P: TimeVaryingProblem<S> + ?Sized>(
    problem: &P,
    state: &PredictionState<S>,
    step_size: S,
    steps: usize,
    gamma: S,
) -> Result<Vec<S>, SolverError> {
    prediction_loop(problem, None, state, step_size, steps, gamma)
}

/// Exact prediction: projected gradient iterations with stepsize `1/L`
/// on the prediction model until the displacement between successive
/// iterates drops below `tol` (or `max_iters` is hit, which sets the
/// warning flag instead of failing).
pub fn predict_exact<S: Scalar, P: TimeVaryingProblem<S> + ?Sized>(
    problem: &P,
    set: &FeasibleSet<S>,
    state: &PredictionState<S>,
    gamma: S,
    tol: S,
    max_iters: usize,
) -> Result<ExactPrediction<S>, SolverError> {
    if !(tol > S::zero()) {
        return Err(SolverError::InvalidParameter(
            "exact-prediction tolerance must be positive".into(),
        ));
    }
    let step_size = S::one() / problem.constants().gradient_lipschitz;
    let mut current = state.base.clone();
    for iter in 0..max_iters {
        let direction = model_gradient(problem, state, &current, gamma);
        let stepped: Vec<S> = current
            .iter()
            .zip(&direction)
            .map(|(&x, &d)| x - step_size * d)
            .collect();
        let next = set.project(&stepped)?;
        if !vecmath::all_finite(&next) {
            return Err(SolverError::Diverged { step: iter });
        }
        let moved = vecmath::dist(&next, &current);
        current = next;
        if moved <= tol {
            return Ok(ExactPrediction {
                point: current,
                converged: true,
            });
        }
    }
    Ok(ExactPrediction {
        point: current,
        converged: false,
    })
}

/// Closed-form prediction for unconstrained problems: assembles the
/// dense Hessian through its action on unit vectors and solves
/// `H (x - x_k) = -(h * tdx + gamma * grad)` directly. Cost is
/// quadratic in the dimension; intended for small problems and as an
/// independent cross-check of the iterative route.
pub fn predict_closed_form<S: Scalar, P: TimeVaryingProblem<S> + ?Sized>(
    problem: &P,
    state: &PredictionState<S>,
    gamma: S,
) -> Result<Vec<S>, SolverError> {
    let n = state.base.len();
    let mut hessian = vec![S::zero(); n * n];
    let mut unit = vec![S::zero(); n];
    for j in 0..n {
        unit[j] = S::one();
        let col = problem.hessian_vec(&state.base, state.time, &unit);
        for i in 0..n {
            hessian[i * n + j] = col[i];
        }
        unit[j] = S::zero();
    }
    let rhs: Vec<S> = state
        .mixed
        .iter()
        .zip(&state.gradient)
        .map(|(&m, &g)| state.period * m + gamma * g)
        .collect();
    let delta = vecmath::solve_spd(&hessian, &rhs).ok_or_else(|| {
        SolverError::NumericalFailure("prediction Hessian is not positive definite".into())
    })?;
    Ok(state
        .base
        .iter()
        .zip(&delta)
        .map(|(&x, &d)| x - d)
        .collect())
}
