use crate::problem::{FeasibleSet, SamplingGrid, TimeVaryingProblem};
use crate::scalar::Scalar;
use crate::vecmath;

use super::{
    correct, predict_constrained, predict_exact, predict_unconstrained, PredictionState,
    PredictionSteps, SolverConfig, SolverError, TrackingRun,
};

enum Algorithm {
    Constrained,
    Unconstrained,
}

/// Runs the constrained prediction-correction loop over the grid.
///
/// Per step: build the prediction state at `(x_k, t_k)` (mixed
/// derivative per the configured mode), predict with the full-gradient
/// constrained iteration (or exact prediction when so configured), then
/// correct on the objective at `t_{k+1}`. The suboptimality factor is
/// ignored here: tuning it is only meaningful without constraints.
///
/// Divergence does not abort with an error; the run is truncated and
/// flagged with the offending step index.
pub fn run_cfopc<S: Scalar, P: TimeVaryingProblem<S> + ?Sized>(
    problem: &P,
    set: &FeasibleSet<S>,
    grid: &SamplingGrid<S>,
    config: &SolverConfig<S>,
    x0: &[S],
) -> Result<TrackingRun<S>, SolverError> {
    run_tracking(problem, set, grid, config, x0, Algorithm::Constrained)
}

/// Runs the unconstrained prediction-correction loop (the feasible set
/// is the whole space, the suboptimality factor is active). With factor
/// 1 the iterates agree bit-for-bit with [`run_cfopc`] on the whole
/// space.
pub fn run_ufopc<S: Scalar, P: TimeVaryingProblem<S> + ?Sized>(
    problem: &P,
    grid: &SamplingGrid<S>,
    config: &SolverConfig<S>,
    x0: &[S],
) -> Result<TrackingRun<S>, SolverError> {
    let set = FeasibleSet::whole_space(problem.dim());
    run_tracking(problem, &set, grid, config, x0, Algorithm::Unconstrained)
}

fn run_tracking<S: Scalar, P: TimeVaryingProblem<S> + ?Sized>(
    problem: &P,
    set: &FeasibleSet<S>,
    grid: &SamplingGrid<S>,
    config: &SolverConfig<S>,
    x0: &[S],
    algorithm: Algorithm,
) -> Result<TrackingRun<S>, SolverError> {
    config.validate()?;
    let n = problem.dim();
    if set.dim() != n {
        return Err(SolverError::DimensionMismatch {
            expected: n,
            got: set.dim(),
        });
    }
    if x0.len() != n {
        return Err(SolverError::DimensionMismatch {
            expected: n,
            got: x0.len(),
        });
    }

    let constants = problem.constants();
    let initial_projected = !set.contains(x0, S::zero());
    let start = if initial_projected {
        set.project(x0)?
    } else {
        x0.to_vec()
    };

    let mut run = TrackingRun::new(*grid, *config, start);
    run.uncertified = !config.certified_stepsizes(&constants);
    run.initial_projected = initial_projected;

    let gamma = match algorithm {
        // the constrained prediction always takes the full gradient
        Algorithm::Constrained => S::one(),
        Algorithm::Unconstrained => config.suboptimality_factor,
    };

    let mut previous_gradient: Option<Vec<S>> = None;
    for k in 0..grid.steps {
        let t_k = grid.time_at(k);
        let t_next = grid.time_at(k + 1);
        let current = run.iterates.last().expect("nonempty").clone();

        let state = PredictionState::at(
            problem,
            &current,
            t_k,
            grid.period,
            config.derivative_mode,
            previous_gradient.as_deref(),
        )?;

        let predicted = match config.prediction_steps {
            PredictionSteps::Finite(steps) => match algorithm {
                Algorithm::Constrained => {
                    predict_constrained(problem, set, &state, config.prediction_step_size, steps)
                }
                Algorithm::Unconstrained => predict_unconstrained(
                    problem,
                    &state,
                    config.prediction_step_size,
                    steps,
                    gamma,
                ),
            },
            PredictionSteps::Exact => {
                let tol = config.exact_prediction_tol * (S::one() + vecmath::norm(&state.base));
                let cap = config.exact_iteration_cap(&constants, tol);
                match predict_exact(problem, set, &state, gamma, tol, cap) {
                    Ok(outcome) => {
                        if !outcome.converged {
                            run.exact_prediction_saturated = true;
                        }
                        Ok(outcome.point)
                    }
                    Err(err) => Err(err),
                }
            }
        };
        let predicted = match predicted {
            Ok(point) => point,
            Err(SolverError::Diverged { .. }) => {
                run.divergence = Some(k);
                return Ok(run);
            }
            Err(other) => return Err(other),
        };

        let corrected = match correct(
            problem,
            set,
            &predicted,
            t_next,
            config.correction_step_size,
            config.correction_steps,
        ) {
            Ok(point) => point,
            Err(SolverError::Diverged { .. }) => {
                run.predicted.push(predicted);
                run.divergence = Some(k);
                return Ok(run);
            }
            Err(other) => return Err(other),
        };

        run.predicted.push(predicted);
        run.iterates.push(corrected);
        previous_gradient = Some(state.gradient);
    }

    Ok(run)
}
