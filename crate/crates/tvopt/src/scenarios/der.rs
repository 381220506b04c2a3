// `!(x > 0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::problem::{FeasibleSet, SmoothnessConstants, TimeVaryingProblem};
use crate::scalar::{from_usize, lit, Scalar};
use crate::vecmath;

use super::{LoadTrace, ScenarioError};

/// Real-time dispatch of distributed energy resources: each node
/// contributes an active/reactive setpoint pair, the aggregate feeder
/// power is a linear function of the stacked setpoints plus the
/// non-controllable load, and the objective trades per-node quadratic
/// cost against tracking an aggregate-power setpoint:
///
/// `f(x; t) = sum_n c_n ||x_n||^2 + (w/2) (p0_set(t) - a(t) - s^T x)^2`
///
/// with `s` the stacked sensitivity coefficients. The Hessian is
/// constant in time, so the local certificates hold globally with no
/// sampling-period cap.
#[derive(Debug, Clone)]
pub struct DerScenario<S: Scalar> {
    /// Number of controllable nodes; the decision vector stacks
    /// `[p_n, q_n]` per node.
    pub nodes: usize,
    /// Per-node sensitivity of the aggregate power to `[p_n, q_n]`.
    pub sensitivity: Vec<[S; 2]>,
    /// Weight of the setpoint-tracking term.
    pub tracking_weight: S,
    /// Per-node quadratic cost weight on `||x_n||^2`.
    pub cost_coeffs: Vec<S>,
    /// Active-power bounds per node, kW.
    pub active_bounds: (S, S),
    /// Reactive-power bounds per node, kW.
    pub reactive_bounds: (S, S),
    /// Aggregate load and setpoint series driving the time variation.
    pub trace: LoadTrace<S>,
}

impl<S: Scalar> DerScenario<S> {
    /// Seeded construction hitting exact spectral targets: sensitivities
    /// are a standard-normal draw rescaled so that the constant Hessian
    /// has smallest eigenvalue `2 * cost_coeff` and largest eigenvalue
    /// `spectral_top` exactly.
    pub fn seeded(
        seed: u64,
        nodes: usize,
        trace: LoadTrace<S>,
        tracking_weight: S,
        spectral_top: S,
    ) -> Result<Self, ScenarioError> {
        if nodes == 0 {
            return Err(ScenarioError::InvalidParameter(
                "need at least one node".into(),
            ));
        }
        let cost_coeff = lit::<S>(0.5);
        let floor = lit::<S>(2.0) * cost_coeff; // smallest Hessian eigenvalue
        if !(spectral_top > floor) {
            return Err(ScenarioError::InvalidParameter(format!(
                "spectral target {spectral_top} must exceed the cost floor {floor}"
            )));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let std_normal = Normal::new(0.0f64, 1.0).unwrap();
        let raw: Vec<f64> = (0..2 * nodes)
            .map(|_| std_normal.sample(&mut rng))
            .collect();
        let raw_norm2: f64 = raw.iter().map(|v| v * v).sum();
        // w * ||s||^2 = spectral_top - floor
        let target = (spectral_top - floor).to_f64().unwrap();
        let scale = (target / (tracking_weight.to_f64().unwrap() * raw_norm2)).sqrt();
        let sensitivity: Vec<[S; 2]> = raw
            .chunks_exact(2)
            .map(|pair| [lit(pair[0] * scale), lit(pair[1] * scale)])
            .collect();
        Ok(Self {
            nodes,
            sensitivity,
            tracking_weight,
            cost_coeffs: vec![cost_coeff; nodes],
            active_bounds: (lit(-50.0), lit(50.0)),
            reactive_bounds: (lit(-50.0), lit(50.0)),
            trace,
        })
    }

    /// Builds the problem, the per-node box, and the declared
    /// constants. The spectral constants of the rank-one-plus-diagonal
    /// Hessian are exact; the time-variation bounds come from first and
    /// second differences of the residual series.
    #[allow(clippy::type_complexity)]
    pub fn build(
        &self,
    ) -> Result<(DerProblem<S>, FeasibleSet<S>, SmoothnessConstants<S>), ScenarioError> {
        if self.trace.len() < 2 {
            return Err(ScenarioError::InvalidParameter(
                "trace needs at least two samples".into(),
            ));
        }
        if self.sensitivity.len() != self.nodes || self.cost_coeffs.len() != self.nodes {
            return Err(ScenarioError::InvalidParameter(format!(
                "expected {} sensitivity/cost entries",
                self.nodes
            )));
        }
        let stacked: Vec<S> = self
            .sensitivity
            .iter()
            .flat_map(|pair| pair.iter().copied())
            .collect();
        // residual target r(t) = p0_set(t) - a(t)
        let residual: Vec<S> = self
            .trace
            .setpoint
            .iter()
            .zip(&self.trace.aggregate)
            .map(|(&s, &a)| s - a)
            .collect();

        let w = self.tracking_weight;
        let s_norm = vecmath::norm(&stacked);
        let s_norm2 = vecmath::dot(&stacked, &stacked);
        let two = lit::<S>(2.0);
        let min_cost = self.cost_coeffs.iter().copied().fold(S::infinity(), S::min);
        let max_cost = self
            .cost_coeffs
            .iter()
            .copied()
            .fold(S::neg_infinity(), S::max);
        let m = two * min_cost;
        let l = two * max_cost + w * s_norm2;

        let h = self.trace.period;
        let mut max_slope = S::zero();
        for pair in residual.windows(2) {
            max_slope = max_slope.max(((pair[1] - pair[0]) / h).abs());
        }
        let mut max_curvature = S::zero();
        for triple in residual.windows(3) {
            let second = (triple[2] - two * triple[1] + triple[0]) / (h * h);
            max_curvature = max_curvature.max(second.abs());
        }
        let c0 = w * s_norm * max_slope;
        let c3 = w * s_norm * max_curvature;

        let constants = SmoothnessConstants::new(m, l, c0)
            .map_err(|e| ScenarioError::InvalidParameter(e.to_string()))?
            .with_third_order(S::zero(), S::zero(), c3)
            .expect("third-order bounds are nonnegative");

        let mut lower = Vec::with_capacity(2 * self.nodes);
        let mut upper = Vec::with_capacity(2 * self.nodes);
        for _ in 0..self.nodes {
            lower.push(self.active_bounds.0);
            upper.push(self.active_bounds.1);
            lower.push(self.reactive_bounds.0);
            upper.push(self.reactive_bounds.1);
        }
        let set = FeasibleSet::box_bounds(lower, upper)
            .map_err(|e| ScenarioError::InvalidParameter(e.to_string()))?;

        let problem = DerProblem {
            stacked_sensitivity: stacked,
            cost_per_coordinate: self.cost_coeffs.iter().flat_map(|&c| [c, c]).collect(),
            tracking_weight: w,
            residual,
            period: h,
            origin: self.trace.origin,
            constants,
        };
        Ok((problem, set, constants))
    }
}

/// Evaluator bundle for [`DerScenario`]. Between grid points the
/// residual series is interpolated linearly; the solvers only evaluate
/// at grid points, the interpolation exists for finite-difference
/// probes.
#[derive(Debug, Clone)]
pub struct DerProblem<S: Scalar> {
    stacked_sensitivity: Vec<S>,
    cost_per_coordinate: Vec<S>,
    tracking_weight: S,
    residual: Vec<S>,
    period: S,
    origin: S,
    constants: SmoothnessConstants<S>,
}

impl<S: Scalar> DerProblem<S> {
    /// Linear interpolation of the residual series, clamped at the
    /// ends.
    fn residual_at(&self, t: S) -> S {
        let steps = self.residual.len();
        let position = (t - self.origin) / self.period;
        if position <= S::zero() {
            return self.residual[0];
        }
        let last = from_usize::<S>(steps - 1);
        if position >= last {
            return self.residual[steps - 1];
        }
        let idx = position.floor();
        let frac = position - idx;
        let i = idx.to_usize().unwrap();
        self.residual[i] + frac * (self.residual[i + 1] - self.residual[i])
    }
}

impl<S: Scalar> TimeVaryingProblem<S> for DerProblem<S> {
    fn dim(&self) -> usize {
        self.stacked_sensitivity.len()
    }

    fn value(&self, x: &[S], t: S) -> S {
        let cost: S = x
            .iter()
            .zip(&self.cost_per_coordinate)
            .fold(S::zero(), |acc, (&xi, &c)| acc + c * xi * xi);
        let mismatch = self.residual_at(t) - vecmath::dot(&self.stacked_sensitivity, x);
        cost + self.tracking_weight / lit::<S>(2.0) * mismatch * mismatch
    }

    fn gradient(&self, x: &[S], t: S) -> Vec<S> {
        let mismatch = self.residual_at(t) - vecmath::dot(&self.stacked_sensitivity, x);
        let two = lit::<S>(2.0);
        x.iter()
            .zip(
                self.cost_per_coordinate
                    .iter()
                    .zip(&self.stacked_sensitivity),
            )
            .map(|(&xi, (&c, &si))| two * c * xi - self.tracking_weight * si * mismatch)
            .collect()
    }

    fn hessian_vec(&self, _x: &[S], _t: S, v: &[S]) -> Vec<S> {
        let coupling = self.tracking_weight * vecmath::dot(&self.stacked_sensitivity, v);
        let two = lit::<S>(2.0);
        v.iter()
            .zip(
                self.cost_per_coordinate
                    .iter()
                    .zip(&self.stacked_sensitivity),
            )
            .map(|(&vi, (&c, &si))| two * c * vi + si * coupling)
            .collect()
    }

    // the residual series is only piecewise smooth; runs use the
    // backward-difference estimate instead of an analytic derivative

    fn constants(&self) -> SmoothnessConstants<S> {
        self.constants
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::generate_load_trace;

    fn scenario() -> DerScenario<f64> {
        let trace = generate_load_trace(11, 200, 1.0, 500.0, 120.0, 3.0);
        DerScenario::seeded(5, 10, trace, 2.0, 21.0).unwrap()
    }

    #[test]
    fn spectral_targets_are_hit_exactly() {
        let s = scenario();
        let (problem, _, constants) = s.build().unwrap();
        assert_eq!(constants.strong_convexity, 1.0);
        assert!((constants.gradient_lipschitz - 21.0).abs() < 1e-12);
        // rank-one structure: H s = (2c + w ||s||^2) s, so the top
        // eigenvalue is exactly L on the sensitivity direction
        let s_vec = problem.stacked_sensitivity.clone();
        let hs = problem.hessian_vec(&[0.0; 20], 0.0, &s_vec);
        let top = vecmath::dot(&s_vec, &hs) / vecmath::dot(&s_vec, &s_vec);
        assert!((top - 21.0).abs() < 1e-12);
    }

    #[test]
    fn hessian_is_constant_in_time_and_state() {
        let (problem, _, constants) = scenario().build().unwrap();
        assert_eq!(constants.hessian_lipschitz_x, Some(0.0));
        assert_eq!(constants.hessian_lipschitz_t, Some(0.0));
        let v: Vec<f64> = (0..20).map(|i| (i as f64 * 0.7).sin()).collect();
        let reference = problem.hessian_vec(&[0.0; 20], 0.0, &v);
        let mut rng_state = 1234u64;
        let mut next = || {
            rng_state = rng_state.wrapping_mul(6364136223846793005).wrapping_add(1);
            (rng_state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..10 {
            let x: Vec<f64> = (0..20).map(|_| next() * 100.0 - 50.0).collect();
            let t = next() * 199.0;
            let h = problem.hessian_vec(&x, t, &v);
            for (a, b) in reference.iter().zip(&h) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn zero_tracking_weight_leaves_a_separable_quadratic() {
        let mut s = scenario();
        s.tracking_weight = 0.0;
        // degenerate L: keep constants valid by rebuilding with a tiny weight
        let err = s.build();
        // with weight 0 the Hessian floor equals the top: L = 1 = m
        let (problem, set, constants) = err.unwrap();
        assert_eq!(constants.gradient_lipschitz, 1.0);
        let g = problem.gradient(&[3.0; 20], 0.0);
        // pure quadratic cost: gradient = 2 c x = x for c = 0.5
        assert!(g.iter().all(|&gi| (gi - 3.0).abs() < 1e-12));
        // minimizer is the projection of 0 onto the box, which contains it
        assert!(set.contains(&[0.0; 20], 0.0));
    }

    #[test]
    fn zero_sensitivity_makes_tracking_term_inert() {
        let mut s = scenario();
        for pair in &mut s.sensitivity {
            *pair = [0.0, 0.0];
        }
        let (problem, _, constants) = s.build().unwrap();
        assert_eq!(constants.mixed_bound, 0.0);
        let g0 = problem.gradient(&[1.0; 20], 0.0);
        let g1 = problem.gradient(&[1.0; 20], 57.0);
        assert_eq!(g0, g1);
    }

    #[test]
    fn series_length_mismatch_is_rejected() {
        let mut s = scenario();
        s.trace.aggregate.truncate(1);
        s.trace.setpoint.truncate(1);
        assert!(s.build().is_err());
    }

    #[test]
    fn interpolation_is_linear_between_samples() {
        let (problem, _, _) = scenario().build().unwrap();
        let r0 = problem.residual_at(10.0);
        let r1 = problem.residual_at(11.0);
        let mid = problem.residual_at(10.5);
        assert!((mid - 0.5 * (r0 + r1)).abs() < 1e-12);
    }
}
