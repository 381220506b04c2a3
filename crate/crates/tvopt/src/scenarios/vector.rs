use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::problem::{FeasibleSet, SmoothnessConstants, TimeVaryingProblem};
use crate::scalar::{lit, Scalar};
use crate::vecmath;

use super::max_abs_on_interval;

/// Box-constrained vector benchmark on `[0, 0.4]^n`:
/// a rank-one-perturbed quadratic plus per-coordinate oscillating
/// exponential terms,
/// `f(x; t) = 0.5 ||x + 1||^2_Q + sum_i kappa_i sin^2(w t + phi_i) exp(mu (x_i - 2)^2)`
/// with `Q = I + u u^T / n` for a seeded standard-normal `u`.
#[derive(Debug, Clone)]
pub struct VectorScenario<S: Scalar> {
    pub n: usize,
    pub omega: S,
    pub mu: S,
    pub rng_seed: u64,
}

impl<S: Scalar> VectorScenario<S> {
    pub fn new(n: usize, rng_seed: u64) -> Self {
        Self {
            n,
            omega: lit::<S>(0.1) * S::PI(),
            mu: lit(0.25),
            rng_seed,
        }
    }
}

const BOX_LOW: f64 = 0.0;
const BOX_HIGH: f64 = 0.4;

impl<S: Scalar> VectorScenario<S> {
    /// Builds the seeded instance. Draw order: the rank-one direction
    /// (standard normal), then the oscillation weights (uniform on
    /// `[0, 1]`), then the phases (normal with variance pi). Constants:
    /// `m = 1` exactly (the quadratic dominates from below); the rest
    /// are bounded numerically over the box.
    pub fn build(&self) -> (VectorProblem<S>, FeasibleSet<S>, SmoothnessConstants<S>) {
        assert!(self.n >= 1, "need at least one variable");
        let n = self.n;
        let mut rng = ChaCha12Rng::seed_from_u64(self.rng_seed);
        let std_normal = Normal::new(0.0f64, 1.0).unwrap();
        let weight_dist = Uniform::new_inclusive(0.0f64, 1.0);
        let phase_dist = Normal::new(0.0f64, std::f64::consts::PI.sqrt()).unwrap();

        let direction: Vec<f64> = (0..n).map(|_| std_normal.sample(&mut rng)).collect();
        let weights: Vec<f64> = (0..n).map(|_| weight_dist.sample(&mut rng)).collect();
        let phases: Vec<f64> = (0..n).map(|_| phase_dist.sample(&mut rng)).collect();

        let mu = self.mu.to_f64().unwrap();
        let omega = self.omega.to_f64().unwrap();
        let direction_norm2: f64 = direction.iter().map(|u| u * u).sum();
        let max_weight = weights.iter().cloned().fold(0.0f64, f64::max);
        let weight_norm: f64 = weights.iter().map(|k| k * k).sum::<f64>().sqrt();

        let bump = |x: f64| (mu * (x - 2.0) * (x - 2.0)).exp();
        // second derivative of the exponential term
        let curv = |x: f64| {
            let s = x - 2.0;
            bump(x) * (2.0 * mu + 4.0 * mu * mu * s * s)
        };
        // first derivative magnitude
        let slope = |x: f64| {
            let s = x - 2.0;
            bump(x) * 2.0 * mu * s
        };
        // third derivative
        let third = |x: f64| {
            let s = x - 2.0;
            bump(x) * s * (12.0 * mu * mu + 8.0 * mu.powi(3) * s * s)
        };

        let curv_max = max_abs_on_interval(curv, BOX_LOW, BOX_HIGH);
        let slope_max = max_abs_on_interval(slope, BOX_LOW, BOX_HIGH);
        let third_max = max_abs_on_interval(third, BOX_LOW, BOX_HIGH);

        let m = 1.0;
        let l = 1.0 + direction_norm2 / n as f64 + max_weight * curv_max;
        // the oscillating exponential terms are separable, so the mixed
        // derivative and its time derivative are plain vectors (l2 norm)
        // while the perturbed Hessians stay diagonal (max norm)
        let c0 = weight_norm * omega * slope_max;
        let c1 = max_weight * third_max;
        let c2 = max_weight * omega * curv_max;
        let c3 = weight_norm * 2.0 * omega * omega * slope_max;

        let constants = SmoothnessConstants::new(lit(m), lit(l), lit(c0))
            .expect("vector scenario constants are valid")
            .with_third_order(lit(c1), lit(c2), lit(c3))
            .expect("third-order bounds are nonnegative");

        let problem = VectorProblem {
            direction: direction.iter().map(|&u| lit(u)).collect(),
            weights: weights.iter().map(|&k| lit(k)).collect(),
            phases: phases.iter().map(|&p| lit(p)).collect(),
            omega: self.omega,
            mu: self.mu,
            constants,
        };
        let set = FeasibleSet::uniform_box(n, lit(BOX_LOW), lit(BOX_HIGH))
            .expect("box bounds are ordered");
        (problem, set, constants)
    }
}

/// Evaluator bundle for [`VectorScenario`].
#[derive(Debug, Clone)]
pub struct VectorProblem<S: Scalar> {
    direction: Vec<S>,
    weights: Vec<S>,
    phases: Vec<S>,
    omega: S,
    mu: S,
    constants: SmoothnessConstants<S>,
}

impl<S: Scalar> VectorProblem<S> {
    fn bump(&self, xi: S) -> S {
        let s = xi - lit::<S>(2.0);
        (self.mu * s * s).exp()
    }

    /// `Q v = v + u (u^T v) / n`.
    fn quadratic_action(&self, v: &[S]) -> Vec<S> {
        let n = self.direction.len();
        let coupling = vecmath::dot(&self.direction, v) / crate::scalar::from_usize::<S>(n);
        v.iter()
            .zip(&self.direction)
            .map(|(&vi, &ui)| vi + ui * coupling)
            .collect()
    }
}

impl<S: Scalar> TimeVaryingProblem<S> for VectorProblem<S> {
    fn dim(&self) -> usize {
        self.direction.len()
    }

    #[allow(clippy::needless_range_loop)]
    fn value(&self, x: &[S], t: S) -> S {
        let shifted: Vec<S> = x.iter().map(|&xi| xi + S::one()).collect();
        let q_shifted = self.quadratic_action(&shifted);
        let quad = lit::<S>(0.5) * vecmath::dot(&shifted, &q_shifted);
        let mut oscillating = S::zero();
        for i in 0..x.len() {
            let sin = (self.omega * t + self.phases[i]).sin();
            oscillating += self.weights[i] * sin * sin * self.bump(x[i]);
        }
        quad + oscillating
    }

    #[allow(clippy::needless_range_loop)]
    fn gradient(&self, x: &[S], t: S) -> Vec<S> {
        let shifted: Vec<S> = x.iter().map(|&xi| xi + S::one()).collect();
        let mut grad = self.quadratic_action(&shifted);
        let two_mu = lit::<S>(2.0) * self.mu;
        for i in 0..x.len() {
            let sin = (self.omega * t + self.phases[i]).sin();
            let s = x[i] - lit::<S>(2.0);
            grad[i] += self.weights[i] * sin * sin * self.bump(x[i]) * two_mu * s;
        }
        grad
    }

    fn hessian_vec(&self, x: &[S], t: S, v: &[S]) -> Vec<S> {
        let mut out = self.quadratic_action(v);
        let two_mu = lit::<S>(2.0) * self.mu;
        let four_mu2 = lit::<S>(4.0) * self.mu * self.mu;
        for i in 0..x.len() {
            let sin = (self.omega * t + self.phases[i]).sin();
            let s = x[i] - lit::<S>(2.0);
            let curvature =
                self.weights[i] * sin * sin * self.bump(x[i]) * (two_mu + four_mu2 * s * s);
            out[i] += curvature * v[i];
        }
        out
    }

    fn mixed_derivative(&self, x: &[S], t: S) -> Option<Vec<S>> {
        let two_mu = lit::<S>(2.0) * self.mu;
        Some(
            (0..x.len())
                .map(|i| {
                    let theta = self.omega * t + self.phases[i];
                    let s = x[i] - lit::<S>(2.0);
                    // d/dt sin^2 = omega sin(2 theta)
                    self.weights[i]
                        * self.omega
                        * (theta + theta).sin()
                        * self.bump(x[i])
                        * two_mu
                        * s
                })
                .collect(),
        )
    }

    fn constants(&self) -> SmoothnessConstants<S> {
        self.constants
    }
}
