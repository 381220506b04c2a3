use crate::problem::{FeasibleSet, SmoothnessConstants, TimeVaryingProblem};
use crate::scalar::Scalar;

/// Separable quadratic with a center drifting at constant velocity:
/// `f(x; t) = 0.5 sum_i d_i (x_i - c_i - v_i t)^2`.
///
/// Constant Hessian and linear drift make every certificate quantity
/// closed-form (all third-order bounds vanish), and the minimizer under
/// whole-space or box sets is a componentwise clamp. Used as an
/// exactness baseline in tests and checks.
#[derive(Debug, Clone)]
pub struct MovingQuadratic<S: Scalar> {
    pub curvatures: Vec<S>,
    pub start_center: Vec<S>,
    pub velocity: Vec<S>,
}

impl<S: Scalar> MovingQuadratic<S> {
    pub fn new(curvatures: Vec<S>, start_center: Vec<S>, velocity: Vec<S>) -> Self {
        assert_eq!(curvatures.len(), start_center.len());
        assert_eq!(curvatures.len(), velocity.len());
        assert!(curvatures.iter().all(|&d| d > S::zero()));
        Self {
            curvatures,
            start_center,
            velocity,
        }
    }

    /// Static instance (no drift).
    pub fn fixed(curvatures: Vec<S>, center: Vec<S>) -> Self {
        let velocity = vec![S::zero(); center.len()];
        Self::new(curvatures, center, velocity)
    }

    pub fn center_at(&self, t: S) -> Vec<S> {
        self.start_center
            .iter()
            .zip(&self.velocity)
            .map(|(&c, &v)| c + v * t)
            .collect()
    }

    /// Exact minimizer over the whole space or a box (separable
    /// problems clamp componentwise). Other sets have no closed form
    /// here.
    pub fn exact_minimizer(&self, set: &FeasibleSet<S>, t: S) -> Option<Vec<S>> {
        let center = self.center_at(t);
        match set {
            FeasibleSet::WholeSpace { .. } => Some(center),
            FeasibleSet::Box { .. } => Some(set.project(&center).expect("dims match")),
            FeasibleSet::Ball { .. } => None,
        }
    }
}

impl<S: Scalar> TimeVaryingProblem<S> for MovingQuadratic<S> {
    fn dim(&self) -> usize {
        self.curvatures.len()
    }

    fn value(&self, x: &[S], t: S) -> S {
        let center = self.center_at(t);
        let half = S::one() / (S::one() + S::one());
        x.iter()
            .zip(center.iter().zip(&self.curvatures))
            .fold(S::zero(), |acc, (&xi, (&ci, &di))| {
                acc + half * di * (xi - ci) * (xi - ci)
            })
    }

    fn gradient(&self, x: &[S], t: S) -> Vec<S> {
        let center = self.center_at(t);
        x.iter()
            .zip(center.iter().zip(&self.curvatures))
            .map(|(&xi, (&ci, &di))| di * (xi - ci))
            .collect()
    }

    fn hessian_vec(&self, _x: &[S], _t: S, v: &[S]) -> Vec<S> {
        v.iter()
            .zip(&self.curvatures)
            .map(|(&vi, &di)| di * vi)
            .collect()
    }

    fn mixed_derivative(&self, _x: &[S], _t: S) -> Option<Vec<S>> {
        Some(
            self.velocity
                .iter()
                .zip(&self.curvatures)
                .map(|(&vi, &di)| -di * vi)
                .collect(),
        )
    }

    fn constants(&self) -> SmoothnessConstants<S> {
        let m = self.curvatures.iter().copied().fold(S::infinity(), S::min);
        let l = self
            .curvatures
            .iter()
            .copied()
            .fold(S::neg_infinity(), S::max);
        let c0 = self
            .velocity
            .iter()
            .zip(&self.curvatures)
            .fold(S::zero(), |acc, (&v, &d)| acc + d * d * v * v)
            .sqrt();
        SmoothnessConstants::new(m, l, c0)
            .expect("positive curvatures give valid constants")
            .with_third_order(S::zero(), S::zero(), S::zero())
            .expect("zeros are valid third-order bounds")
    }
}
