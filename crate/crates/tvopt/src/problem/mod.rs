//! Time-varying problem abstraction: evaluator bundle, declared
//! smoothness constants, projectable feasible sets, and the sampling
//! grid.

// `!(x > 0)` style guards are deliberate: they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod verify;

pub use verify::{verify_problem, verify_problem_in, ProbeRanges, VerificationReport};

use thiserror::Error;

use crate::scalar::{from_usize, Scalar};
use crate::vecmath;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid smoothness constants: {0}")]
    InvalidConstants(String),
    #[error("invalid feasible set: {0}")]
    InvalidSet(String),
    #[error("invalid sampling grid: {0}")]
    InvalidGrid(String),
}

/// Declared smoothness constants of a time-varying problem.
///
/// `strong_convexity` and `gradient_lipschitz` bound the Hessian
/// spectrum from below/above; `mixed_bound` bounds the norm of the
/// mixed derivative of the objective (time derivative of the gradient).
/// The three optional constants bound third-order derivatives: without
/// them only the global first-order certificates are available.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessConstants<S: Scalar> {
    /// Lower Hessian bound `m > 0`.
    pub strong_convexity: S,
    /// Upper Hessian bound `L >= m`.
    pub gradient_lipschitz: S,
    /// Bound `C0` on the norm of the mixed derivative.
    pub mixed_bound: S,
    /// Bound `C1` on the third derivative in the decision variable.
    pub hessian_lipschitz_x: Option<S>,
    /// Bound `C2` on the time derivative of the Hessian.
    pub hessian_lipschitz_t: Option<S>,
    /// Bound `C3` on the second time derivative of the gradient.
    pub mixed_lipschitz_t: Option<S>,
}

impl<S: Scalar> SmoothnessConstants<S> {
    pub fn new(
        strong_convexity: S,
        gradient_lipschitz: S,
        mixed_bound: S,
    ) -> Result<Self, ProblemError> {
        let c = Self {
            strong_convexity,
            gradient_lipschitz,
            mixed_bound,
            hessian_lipschitz_x: None,
            hessian_lipschitz_t: None,
            mixed_lipschitz_t: None,
        };
        c.validate()?;
        Ok(c)
    }

    /// Attaches the third-order bounds enabling the local certificates.
    pub fn with_third_order(mut self, c1: S, c2: S, c3: S) -> Result<Self, ProblemError> {
        self.hessian_lipschitz_x = Some(c1);
        self.hessian_lipschitz_t = Some(c2);
        self.mixed_lipschitz_t = Some(c3);
        self.validate()?;
        Ok(self)
    }

    pub fn has_third_order(&self) -> bool {
        self.hessian_lipschitz_x.is_some()
            && self.hessian_lipschitz_t.is_some()
            && self.mixed_lipschitz_t.is_some()
    }

    fn validate(&self) -> Result<(), ProblemError> {
        if !(self.strong_convexity > S::zero()) {
            return Err(ProblemError::InvalidConstants(
                "strong convexity bound must be positive".into(),
            ));
        }
        if self.gradient_lipschitz < self.strong_convexity {
            return Err(ProblemError::InvalidConstants(
                "gradient Lipschitz bound must be >= strong convexity bound".into(),
            ));
        }
        if self.mixed_bound < S::zero() {
            return Err(ProblemError::InvalidConstants(
                "mixed-derivative bound must be nonnegative".into(),
            ));
        }
        for c in [
            self.hessian_lipschitz_x,
            self.hessian_lipschitz_t,
            self.mixed_lipschitz_t,
        ]
        .into_iter()
        .flatten()
        {
            if c < S::zero() {
                return Err(ProblemError::InvalidConstants(
                    "third-order bounds must be nonnegative".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Evaluator bundle for a time-varying objective `f(x; t)`.
///
/// Implementations must be pure functions of `(x, t)`: no interior
/// mutation observable across calls. That purity contract is what makes
/// instances shareable across concurrent harness workers.
///
/// The Hessian is exposed only through its action on a vector; all
/// solvers in this crate need nothing more.
pub trait TimeVaryingProblem<S: Scalar>: Send + Sync {
    /// Number of decision variables.
    fn dim(&self) -> usize;

    /// Objective value `f(x; t)`.
    fn value(&self, x: &[S], t: S) -> S;

    /// Gradient of the objective in `x`.
    fn gradient(&self, x: &[S], t: S) -> Vec<S>;

    /// Action of the Hessian at `(x, t)` on `v`.
    fn hessian_vec(&self, x: &[S], t: S, v: &[S]) -> Vec<S>;

    /// Time derivative of the gradient, when analytically available.
    fn mixed_derivative(&self, _x: &[S], _t: S) -> Option<Vec<S>> {
        None
    }

    /// Declared smoothness constants.
    fn constants(&self) -> SmoothnessConstants<S>;
}

/// Projectable convex feasible set.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet<S: Scalar> {
    /// The whole space (projection is the identity).
    WholeSpace { dim: usize },
    /// Axis-aligned box `[lower, upper]`.
    Box { lower: Vec<S>, upper: Vec<S> },
    /// Euclidean ball of given center and radius.
    Ball { center: Vec<S>, radius: S },
}

impl<S: Scalar> FeasibleSet<S> {
    pub fn whole_space(dim: usize) -> Self {
        FeasibleSet::WholeSpace { dim }
    }

    pub fn box_bounds(lower: Vec<S>, upper: Vec<S>) -> Result<Self, ProblemError> {
        if lower.len() != upper.len() {
            return Err(ProblemError::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.iter().zip(&upper).any(|(lo, hi)| lo > hi) {
            return Err(ProblemError::InvalidSet(
                "box lower bound exceeds upper bound".into(),
            ));
        }
        Ok(FeasibleSet::Box { lower, upper })
    }

    /// The box `[lo, hi]^dim`.
    pub fn uniform_box(dim: usize, lo: S, hi: S) -> Result<Self, ProblemError> {
        Self::box_bounds(vec![lo; dim], vec![hi; dim])
    }

    pub fn ball(center: Vec<S>, radius: S) -> Result<Self, ProblemError> {
        if !(radius > S::zero()) {
            return Err(ProblemError::InvalidSet(
                "ball radius must be positive".into(),
            ));
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleSet::WholeSpace { dim } => *dim,
            FeasibleSet::Box { lower, .. } => lower.len(),
            FeasibleSet::Ball { center, .. } => center.len(),
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, x: &[S]) -> Result<Vec<S>, ProblemError> {
        if x.len() != self.dim() {
            return Err(ProblemError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(match self {
            FeasibleSet::WholeSpace { .. } => x.to_vec(),
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&v, (&lo, &hi))| v.max(lo).min(hi))
                .collect(),
            FeasibleSet::Ball { center, radius } => {
                // radial rescale, iterated to a floating-point fixed
                // point so that projecting twice gives bitwise the same
                // result even when rounding lands a hair outside
                let mut current = x.to_vec();
                for _ in 0..64 {
                    let offset = vecmath::sub(&current, center);
                    let dist = vecmath::norm(&offset);
                    if dist <= *radius {
                        break;
                    }
                    let scale = *radius / dist;
                    let next: Vec<S> = center
                        .iter()
                        .zip(&offset)
                        .map(|(&c, &o)| c + scale * o)
                        .collect();
                    if next == current {
                        break;
                    }
                    current = next;
                }
                current
            }
        })
    }

    /// Membership test with an absolute slack on the ball radius.
    pub fn contains(&self, x: &[S], tol: S) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            FeasibleSet::WholeSpace { .. } => true,
            FeasibleSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(&v, (&lo, &hi))| v >= lo && v <= hi),
            FeasibleSet::Ball { center, radius } => vecmath::dist(x, center) <= *radius + tol,
        }
    }
}

/// Fixed-period sampling grid `t_k = origin + k * period`.
///
/// Times are always computed multiplicatively from the step index,
/// never by accumulation, so the grid is drift-free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingGrid<S: Scalar> {
    pub period: S,
    pub steps: usize,
    pub origin: S,
}

impl<S: Scalar> SamplingGrid<S> {
    pub fn new(period: S, steps: usize) -> Result<Self, ProblemError> {
        Self::with_origin(period, steps, S::zero())
    }

    pub fn with_origin(period: S, steps: usize, origin: S) -> Result<Self, ProblemError> {
        if !(period > S::zero()) || !period.is_finite() {
            return Err(ProblemError::InvalidGrid(
                "period must be positive and finite".into(),
            ));
        }
        if steps == 0 {
            return Err(ProblemError::InvalidGrid("need at least one step".into()));
        }
        Ok(Self {
            period,
            steps,
            origin,
        })
    }

    pub fn time_at(&self, k: usize) -> S {
        self.origin + from_usize::<S>(k) * self.period
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_projection_clamps_componentwise() {
        let set = FeasibleSet::box_bounds(vec![0.0, 0.0, 0.0], vec![0.4, 0.4, 0.4]).unwrap();
        let p = set.project(&[-0.1, 0.2, 0.7]).unwrap();
        assert_eq!(p, vec![0.0, 0.2, 0.4]);
    }

    #[test]
    fn whole_space_projection_is_identity() {
        let set = FeasibleSet::whole_space(2);
        let p = set.project(&[3.0, -7.0]).unwrap();
        assert_eq!(p, vec![3.0, -7.0]);
    }

    #[test]
    fn ball_projection_matches_sphere_grid_search() {
        // radial rescale by r/||x||, cross-checked against a brute-force
        // nearest point over a fine grid of the sphere
        let set = FeasibleSet::ball(vec![0.0_f64, 0.0], 1.0).unwrap();
        let p = set.project(&[3.0, 4.0]).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-12);
        assert!((p[1] - 0.8).abs() < 1e-12);

        let mut best = f64::INFINITY;
        let mut best_pt = [0.0, 0.0];
        let n = 2_000_000usize;
        for i in 0..n {
            let th = 2.0 * std::f64::consts::PI * (i as f64) / (n as f64);
            let cand = [th.cos(), th.sin()];
            let d = (cand[0] - 3.0).powi(2) + (cand[1] - 4.0).powi(2);
            if d < best {
                best = d;
                best_pt = cand;
            }
        }
        assert!((p[0] - best_pt[0]).abs() < 1e-5);
        assert!((p[1] - best_pt[1]).abs() < 1e-5);
    }

    #[test]
    fn ball_projection_fixes_center() {
        let set = FeasibleSet::ball(vec![1.0, 2.0], 0.5).unwrap();
        let p = set.project(&[1.0, 2.0]).unwrap();
        assert_eq!(p, vec![1.0, 2.0]);
    }

    #[test]
    fn projection_rejects_dimension_mismatch() {
        let set = FeasibleSet::whole_space(2);
        assert!(set.project(&[1.0]).is_err());
    }

    #[test]
    fn box_constructor_rejects_crossed_bounds() {
        assert!(FeasibleSet::box_bounds(vec![1.0], vec![0.0]).is_err());
    }

    #[test]
    fn grid_time_is_multiplicative() {
        let grid = SamplingGrid::new(0.1, 1_000_000).unwrap();
        let t = grid.time_at(1_000_000);
        assert_eq!(t, 1_000_000_f64 * 0.1);
        // accumulation would drift; the multiplicative form must not
        assert!((t - 100_000.0).abs() < 1e-6);
    }

    #[test]
    fn constants_validation() {
        assert!(SmoothnessConstants::new(0.0, 1.0, 0.0).is_err());
        assert!(SmoothnessConstants::new(2.0, 1.0, 0.0).is_err());
        assert!(SmoothnessConstants::new(1.0, 2.0, -1.0).is_err());
        let c = SmoothnessConstants::new(1.0, 2.0, 0.5).unwrap();
        assert!(!c.has_third_order());
        let c = c.with_third_order(0.0, 0.0, 0.0).unwrap();
        assert!(c.has_third_order());
    }
}
