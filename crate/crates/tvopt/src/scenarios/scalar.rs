use crate::problem::{FeasibleSet, SmoothnessConstants, TimeVaryingProblem};
use crate::scalar::{lit, Scalar};

use super::max_abs_on_interval;

/// Scalar tracking benchmark: a quadratic pull toward a periodically
/// varying target plus a logistic penalty on large values,
/// `f(x; t) = 0.5 (x - cos(w t))^2 + kappa * ln(1 + exp(mu x))`.
#[derive(Debug, Clone, Copy)]
pub struct ScalarScenario<S: Scalar> {
    /// Angular frequency of the target (rad/s).
    pub omega: S,
    /// Weight of the logistic penalty.
    pub kappa: S,
    /// Slope of the logistic penalty.
    pub mu: S,
}

impl<S: Scalar> Default for ScalarScenario<S> {
    fn default() -> Self {
        Self {
            omega: S::FRAC_PI_2(),
            kappa: lit(2.0),
            mu: lit(1.75),
        }
    }
}

/// Operating range the third-derivative bounds are taken over; the
/// target stays in `[-1, 1]` and the logistic pushes the minimizer
/// left, so trajectories live well inside it.
const OPERATING_RANGE: (f64, f64) = (-2.0, 2.0);

impl<S: Scalar> ScalarScenario<S> {
    /// Builds the problem, its (unbounded) feasible set, and the
    /// declared constants. The second-order constants are analytic
    /// (`m = 1`, `L = 1 + kappa mu^2 / 4`, mixed bound `|omega|`); the
    /// third-order constants are bounded numerically over the operating
    /// range.
    pub fn build(&self) -> (ScalarProblem<S>, FeasibleSet<S>, SmoothnessConstants<S>) {
        let omega = self.omega.to_f64().unwrap();
        let kappa = self.kappa.to_f64().unwrap();
        let mu = self.mu.to_f64().unwrap();

        let m = 1.0;
        let l = 1.0 + kappa * mu * mu / 4.0;
        let c0 = omega.abs();

        let (lo, hi) = OPERATING_RANGE;
        // third derivative in x: kappa mu^3 s''(mu x)
        let c1 = max_abs_on_interval(
            |x| kappa * mu.powi(3) * logistic_second_derivative(mu * x),
            lo,
            hi,
        );
        // the Hessian does not depend on t
        let c2 = max_abs_on_interval(|_| 0.0, lo, hi);
        // second time derivative of the gradient: w^2 cos(w t)
        let period = if omega == 0.0 {
            1.0
        } else {
            2.0 * std::f64::consts::PI / omega.abs()
        };
        let c3 = max_abs_on_interval(|t| omega * omega * (omega * t).cos(), 0.0, period);

        let constants = SmoothnessConstants::new(lit(m), lit(l), lit(c0))
            .expect("scalar scenario constants are valid")
            .with_third_order(lit(c1), lit(c2), lit(c3))
            .expect("third-order bounds are nonnegative");

        let problem = ScalarProblem {
            omega: self.omega,
            kappa: self.kappa,
            mu: self.mu,
            constants,
        };
        (problem, FeasibleSet::whole_space(1), constants)
    }
}

/// Evaluator bundle for [`ScalarScenario`].
#[derive(Debug, Clone)]
pub struct ScalarProblem<S: Scalar> {
    omega: S,
    kappa: S,
    mu: S,
    constants: SmoothnessConstants<S>,
}

/// Numerically stable `ln(1 + exp(z))`.
fn softplus<S: Scalar>(z: S) -> S {
    if z > S::zero() {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Numerically stable logistic function.
fn logistic<S: Scalar>(z: S) -> S {
    if z >= S::zero() {
        S::one() / (S::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (S::one() + e)
    }
}

/// `s''(z) = s (1 - s) (1 - 2 s)` with `s` the logistic function.
fn logistic_second_derivative(z: f64) -> f64 {
    let s = 1.0 / (1.0 + (-z).exp());
    s * (1.0 - s) * (1.0 - 2.0 * s)
}

impl<S: Scalar> TimeVaryingProblem<S> for ScalarProblem<S> {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, x: &[S], t: S) -> S {
        let target = (self.omega * t).cos();
        let residual = x[0] - target;
        lit::<S>(0.5) * residual * residual + self.kappa * softplus(self.mu * x[0])
    }

    fn gradient(&self, x: &[S], t: S) -> Vec<S> {
        let target = (self.omega * t).cos();
        vec![x[0] - target + self.kappa * self.mu * logistic(self.mu * x[0])]
    }

    fn hessian_vec(&self, x: &[S], _t: S, v: &[S]) -> Vec<S> {
        let s = logistic(self.mu * x[0]);
        let curvature = S::one() + self.kappa * self.mu * self.mu * s * (S::one() - s);
        vec![curvature * v[0]]
    }

    fn mixed_derivative(&self, _x: &[S], t: S) -> Option<Vec<S>> {
        Some(vec![self.omega * (self.omega * t).sin()])
    }

    fn constants(&self) -> SmoothnessConstants<S> {
        self.constants
    }
}
