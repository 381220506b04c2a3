use crate::problem::SamplingGrid;
use crate::scalar::Scalar;

use super::SolverConfig;

/// Per-step record of a tracking run.
///
/// The solver drivers fill the iterate and prediction trajectories and
/// the flags; the harness attaches the oracle trajectory and the error
/// series afterwards (they stay empty until then).
#[derive(Debug, Clone)]
pub struct TrackingRun<S: Scalar> {
    pub grid: SamplingGrid<S>,
    pub config: SolverConfig<S>,
    /// Iterates `x_0 .. x_K`; one more entry than completed steps.
    pub iterates: Vec<Vec<S>>,
    /// Predicted points, one per completed step.
    pub predicted: Vec<Vec<S>>,
    /// Oracle optimizers per grid point (filled by the harness).
    pub oracle: Vec<Vec<S>>,
    /// Tracking errors per grid point (filled by the harness).
    pub errors: Vec<S>,
    /// Distance of each predicted point to the next oracle optimizer
    /// (filled by the harness).
    pub prediction_errors: Vec<S>,
    /// Outer step index at which a non-finite iterate appeared; the run
    /// record is truncated there.
    pub divergence: Option<usize>,
    /// Stepsizes violate the certificate range (the run still executed).
    pub uncertified: bool,
    /// The initial point was outside the feasible set and was projected.
    pub initial_projected: bool,
    /// Exact prediction hit its iteration cap at least once.
    pub exact_prediction_saturated: bool,
}

impl<S: Scalar> TrackingRun<S> {
    pub(crate) fn new(grid: SamplingGrid<S>, config: SolverConfig<S>, x0: Vec<S>) -> Self {
        let steps = grid.steps;
        let mut iterates = Vec::with_capacity(steps + 1);
        iterates.push(x0);
        Self {
            grid,
            config,
            iterates,
            predicted: Vec::with_capacity(steps),
            oracle: Vec::new(),
            errors: Vec::new(),
            prediction_errors: Vec::new(),
            divergence: None,
            uncertified: false,
            initial_projected: false,
            exact_prediction_saturated: false,
        }
    }

    /// Number of completed steps (equals the grid length unless the run
    /// diverged).
    pub fn completed_steps(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn diverged(&self) -> bool {
        self.divergence.is_some()
    }

    pub fn final_iterate(&self) -> &[S] {
        self.iterates.last().expect("runs always hold x0")
    }
}
