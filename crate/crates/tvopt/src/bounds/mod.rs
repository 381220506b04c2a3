//! Analytical convergence certificates for the prediction-correction
//! solvers: contraction factors, linear rates for the global and local
//! regimes, certified sampling-period and attraction-region bounds,
//! Taylor-error bounds on the optimal prediction, and the error
//! recursion that turns all of it into a per-step envelope.
//!
//! Certificates are computed from *declared* smoothness constants only;
//! empirical constants are used solely for dominance testing by the
//! harness. That keeps the certificate evaluation auditable.

mod report;

pub use report::{BoundReport, Regime};

use crate::problem::SmoothnessConstants;
use crate::scalar::{lit, Scalar};
use crate::solver::PredictionSteps;

/// Which algorithm family a certificate is for. The unconstrained
/// family carries the suboptimality factor; the constrained prediction
/// always uses the full gradient, which coincides with factor 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlgorithmClass<S: Scalar> {
    Constrained,
    Unconstrained { gamma: S },
}

impl<S: Scalar> AlgorithmClass<S> {
    fn gamma(&self) -> S {
        match self {
            AlgorithmClass::Constrained => S::one(),
            AlgorithmClass::Unconstrained { gamma } => *gamma,
        }
    }
}

/// Per-inner-step contraction factors of the prediction and correction
/// gradient iterations: `max{|1 - a m|, |1 - a L|}` for each stepsize.
pub fn contraction_rates<S: Scalar>(m: S, l: S, alpha: S, beta: S) -> (S, S) {
    let rate = |step: S| (S::one() - step * m).abs().max((S::one() - step * l).abs());
    (rate(alpha), rate(beta))
}

/// `rho^P` extended to the exact-prediction marker: the limit of the
/// power as the inner iteration runs to convergence.
pub fn prediction_contraction_power<S: Scalar>(rho_p: S, steps: PredictionSteps) -> S {
    match steps {
        PredictionSteps::Finite(p) => rho_p.powi(p as i32),
        PredictionSteps::Exact => {
            if rho_p < S::one() {
                S::zero()
            } else if rho_p == S::one() {
                S::one()
            } else {
                S::infinity()
            }
        }
    }
}

fn correction_contraction_power<S: Scalar>(rho_c: S, steps: usize) -> S {
    rho_c.powi(steps as i32)
}

/// Shared body of the global-rate formulas. `gamma_factor` is
/// `(1 - gamma) + gamma * 2L/m`; the constrained family uses factor 1,
/// making both rates coincide there exactly.
fn tau0_from_powers<S: Scalar>(rho_p_pow: S, rho_c_pow: S, gamma: S, m: S, l: S) -> S {
    let q = lit::<S>(2.0) * l / m;
    let gamma_factor = (S::one() - gamma) + gamma * q;
    rho_c_pow * (rho_p_pow + (rho_p_pow + S::one()) * gamma_factor)
}

/// Global linear rate of the constrained algorithm; certificate exists
/// when the result is below 1.
pub fn tau0_constrained<S: Scalar>(
    rho_p: S,
    rho_c: S,
    prediction_steps: PredictionSteps,
    correction_steps: usize,
    m: S,
    l: S,
) -> S {
    let rho_p_pow = prediction_contraction_power(rho_p, prediction_steps);
    let rho_c_pow = correction_contraction_power(rho_c, correction_steps);
    tau0_from_powers(rho_p_pow, rho_c_pow, S::one(), m, l)
}

/// Global linear rate of the unconstrained algorithm. At factor 1 this
/// equals [`tau0_constrained`] exactly.
pub fn tau0_unconstrained<S: Scalar>(
    rho_p: S,
    rho_c: S,
    prediction_steps: PredictionSteps,
    correction_steps: usize,
    gamma: S,
    m: S,
    l: S,
) -> S {
    let rho_p_pow = prediction_contraction_power(rho_p, prediction_steps);
    let rho_c_pow = correction_contraction_power(rho_c, correction_steps);
    tau0_from_powers(rho_p_pow, rho_c_pow, gamma, m, l)
}

/// Taylor-error bounds on the optimal prediction from an exact
/// optimizer: the first-order bound always exists; the second-order
/// bound needs all three third-derivative constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorBounds<S: Scalar> {
    pub first_order: S,
    pub second_order: Option<S>,
}

pub fn taylor_error_bounds<S: Scalar>(
    m: S,
    l: S,
    c0: S,
    h: S,
    c1: Option<S>,
    c2: Option<S>,
    c3: Option<S>,
) -> TaylorBounds<S> {
    let two = lit::<S>(2.0);
    let first_order = two * h * c0 * (S::one() + l / m) / m;
    let second_order = match (c1, c2, c3) {
        (Some(c1), Some(c2), Some(c3)) => {
            Some(h * h / two * (c0 * c0 * c1 / (m * m * m) + two * c0 * c2 / (m * m) + c3 / m))
        }
        _ => None,
    };
    TaylorBounds {
        first_order,
        second_order,
    }
}

/// Certified sampling-period bound and attraction radius of the local
/// second-order regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalRegion<S: Scalar> {
    /// Largest certified sampling period (infinite for quadratic
    /// problems, where the Hessian does not vary).
    pub h_bar: S,
    /// Attraction radius for the initial optimality gap (infinite when
    /// the curvature does not vary in the decision variable, in which
    /// case convergence is global).
    pub r_bar: S,
}

/// Outcome of the local-region evaluation; failed preconditions yield a
/// value, not an error, because parameter sweeps legitimately cross
/// into uncertified territory.
#[derive(Debug, Clone, PartialEq)]
pub enum LocalRegionOutcome<S: Scalar> {
    Certified(LocalRegion<S>),
    NoCertificate { reason: String },
}

impl<S: Scalar> LocalRegionOutcome<S> {
    pub fn certified(&self) -> Option<&LocalRegion<S>> {
        match self {
            LocalRegionOutcome::Certified(region) => Some(region),
            LocalRegionOutcome::NoCertificate { .. } => None,
        }
    }
}

/// Evaluates the certified sampling-period bound and attraction radius
/// for a chosen local rate `tau`.
#[allow(clippy::too_many_arguments)]
pub fn local_region<S: Scalar>(
    m: S,
    c0: S,
    c1: S,
    c2: S,
    rho_p: S,
    rho_c: S,
    prediction_steps: PredictionSteps,
    correction_steps: usize,
    tau: S,
    class: AlgorithmClass<S>,
    h: S,
) -> LocalRegionOutcome<S> {
    if !(tau > S::zero() && tau < S::one()) {
        return LocalRegionOutcome::NoCertificate {
            reason: format!("local rate {tau} must lie strictly inside (0, 1)"),
        };
    }
    let rho_p_pow = prediction_contraction_power(rho_p, prediction_steps);
    let rho_c_pow = correction_contraction_power(rho_c, correction_steps);
    let gamma = class.gamma();

    // the rate condition; with factor 1 it reduces to the constrained one
    let gate = (S::one() - gamma) * rho_c_pow * (S::one() + rho_p_pow) + rho_p_pow * rho_c_pow;
    if gate >= tau {
        return LocalRegionOutcome::NoCertificate {
            reason: format!("rate condition violated: {gate} >= tau = {tau}"),
        };
    }

    let curvature_drift = c1 * c0 / (m * m) + c2 / m;
    let headroom =
        (tau - rho_c_pow * rho_p_pow) / (rho_c_pow * (rho_p_pow + S::one())) - (S::one() - gamma);
    let h_bar = if curvature_drift == S::zero() {
        S::infinity()
    } else {
        headroom / curvature_drift
    };

    let r_bar = if gamma == S::zero() || c1 == S::zero() || h_bar.is_infinite() {
        S::infinity()
    } else {
        lit::<S>(2.0) * m / (gamma * c1) * curvature_drift * (h_bar - h)
    };

    LocalRegionOutcome::Certified(LocalRegion { h_bar, r_bar })
}

/// Coefficients of the per-step error recursion
/// `e_{k+1} <= rho_C^C (eta0 e_k^2 + eta1 e_k + eta2)` together with the
/// regime's linear rate and the geometric-sum asymptote.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRecursion<S: Scalar> {
    pub eta0: S,
    pub eta1: S,
    pub eta2: S,
    /// Linear rate of the envelope: the global rate for the first-order
    /// case, the user-selected local rate otherwise.
    pub rate: S,
    /// `rho_C^C * eta2 / (1 - rate)`, infinite when the rate reaches 1.
    pub asymptotic_bound: S,
}

/// Which error-recursion case to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecursionCase {
    /// First-order smoothness only: linear recursion, `O(h)` floor.
    GlobalFirstOrder,
    /// Third-order smoothness: quadratic recursion, `O(h^2)` floor,
    /// valid inside the attraction region at the selected local rate.
    LocalSecondOrder,
}

/// Evaluates the recursion coefficients. `delta` is the matching
/// Taylor-error bound (first-order for the global case, second-order
/// for the local case); `tau` is required for the local case.
#[allow(clippy::too_many_arguments)]
pub fn recursion_coefficients<S: Scalar>(
    case: RecursionCase,
    class: AlgorithmClass<S>,
    rho_p: S,
    rho_c: S,
    prediction_steps: PredictionSteps,
    correction_steps: usize,
    constants: &SmoothnessConstants<S>,
    h: S,
    delta: S,
    tau: Option<S>,
) -> ErrorRecursion<S> {
    let rho_p_pow = prediction_contraction_power(rho_p, prediction_steps);
    let rho_c_pow = correction_contraction_power(rho_c, correction_steps);
    let gamma = class.gamma();
    let m = constants.strong_convexity;
    let l = constants.gradient_lipschitz;
    let c0 = constants.mixed_bound;
    let two = lit::<S>(2.0);

    let (eta0, eta1, eta2, rate) = match case {
        RecursionCase::GlobalFirstOrder => {
            let q = two * l / m;
            let gamma_factor = (S::one() - gamma) + gamma * q;
            let eta1 = rho_p_pow + (rho_p_pow + S::one()) * gamma_factor;
            let eta2 = match class {
                AlgorithmClass::Constrained => (two * rho_p_pow + S::one()) * delta,
                AlgorithmClass::Unconstrained { .. } => two * (two * rho_p_pow + S::one()) * delta,
            };
            (S::zero(), eta1, eta2, rho_c_pow * eta1)
        }
        RecursionCase::LocalSecondOrder => {
            let c1 = constants.hessian_lipschitz_x.unwrap_or_else(S::zero);
            let c2 = constants.hessian_lipschitz_t.unwrap_or_else(S::zero);
            let curvature_drift = c1 * c0 / (m * m) + c2 / m;
            let eta0 = gamma * (rho_p_pow + S::one()) * c1 / (two * m);
            let eta1 =
                rho_p_pow + (rho_p_pow + S::one()) * ((S::one() - gamma) + h * curvature_drift);
            let eta2 = rho_p_pow * (h * c0 / m + delta) + delta;
            let rate = tau.expect("local recursion requires a selected rate");
            (eta0, eta1, eta2, rate)
        }
    };

    let asymptotic_bound = if rate < S::one() {
        rho_c_pow * eta2 / (S::one() - rate)
    } else {
        S::infinity()
    };

    ErrorRecursion {
        eta0,
        eta1,
        eta2,
        rate,
        asymptotic_bound,
    }
}

/// Inputs to [`certify`]: the declared constants plus the solver
/// parameters the certificate is evaluated for.
#[derive(Debug, Clone, Copy)]
pub struct CertificateInputs<S: Scalar> {
    pub constants: SmoothnessConstants<S>,
    pub prediction_step_size: S,
    pub correction_step_size: S,
    pub prediction_steps: PredictionSteps,
    pub correction_steps: usize,
    pub class: AlgorithmClass<S>,
    /// Sampling period the certificate is evaluated at.
    pub period: S,
    /// User-selected local rate; omitting it restricts the report to
    /// the global regime.
    pub tau: Option<S>,
    /// Declared initial optimality gap, required to certify the local
    /// regime when the attraction radius is finite.
    pub initial_gap: Option<S>,
}

/// Evaluates every certificate quantity and classifies the regime.
///
/// Regime selection: the local second-order regime when the
/// third-order constants, a local rate, the sampling-period bound and
/// the attraction radius all admit it; otherwise the global regime when
/// its rate is below one; otherwise no certificate (whose report still
/// carries the global-rate diagnostics, with an infinite asymptote).
pub fn certify<S: Scalar>(inputs: &CertificateInputs<S>) -> BoundReport<S> {
    let constants = &inputs.constants;
    let m = constants.strong_convexity;
    let l = constants.gradient_lipschitz;
    let c0 = constants.mixed_bound;
    let h = inputs.period;

    let (rho_p, rho_c) = contraction_rates(
        m,
        l,
        inputs.prediction_step_size,
        inputs.correction_step_size,
    );
    let rho_c_pow = correction_contraction_power(rho_c, inputs.correction_steps);
    let gamma = inputs.class.gamma();
    // every certificate presumes stepsizes strictly below 2/L
    let stepsize_bound = lit::<S>(2.0) / l;
    let stepsizes_ok = inputs.prediction_step_size < stepsize_bound
        && inputs.correction_step_size < stepsize_bound;

    let tau0 = tau0_from_powers(
        prediction_contraction_power(rho_p, inputs.prediction_steps),
        rho_c_pow,
        gamma,
        m,
        l,
    );

    let taylor = taylor_error_bounds(
        m,
        l,
        c0,
        h,
        constants.hessian_lipschitz_x,
        constants.hessian_lipschitz_t,
        constants.mixed_lipschitz_t,
    );

    // local-regime evaluation, when all its ingredients are present
    let mut h_bar = None;
    let mut r_bar = None;
    let mut local = None;
    if constants.has_third_order() && stepsizes_ok {
        if let (Some(tau), Some(delta2)) = (inputs.tau, taylor.second_order) {
            let outcome = local_region(
                m,
                c0,
                constants.hessian_lipschitz_x.unwrap(),
                constants.hessian_lipschitz_t.unwrap(),
                rho_p,
                rho_c,
                inputs.prediction_steps,
                inputs.correction_steps,
                tau,
                inputs.class,
                h,
            );
            if let Some(region) = outcome.certified() {
                h_bar = Some(region.h_bar);
                r_bar = Some(region.r_bar);
                let gap_ok = if region.r_bar.is_infinite() {
                    true
                } else {
                    inputs
                        .initial_gap
                        .map(|gap| gap <= region.r_bar)
                        .unwrap_or(false)
                };
                if h <= region.h_bar && gap_ok {
                    local = Some(recursion_coefficients(
                        RecursionCase::LocalSecondOrder,
                        inputs.class,
                        rho_p,
                        rho_c,
                        inputs.prediction_steps,
                        inputs.correction_steps,
                        constants,
                        h,
                        delta2,
                        Some(tau),
                    ));
                }
            }
        }
    }

    let global = recursion_coefficients(
        RecursionCase::GlobalFirstOrder,
        inputs.class,
        rho_p,
        rho_c,
        inputs.prediction_steps,
        inputs.correction_steps,
        constants,
        h,
        taylor.first_order,
        None,
    );

    let (regime, recursion) = if let Some(local) = local {
        (Regime::LocalOh2, local)
    } else if stepsizes_ok && tau0 < S::one() {
        (Regime::GlobalOh, global)
    } else {
        (Regime::NoCertificate, global)
    };

    BoundReport {
        rho_p,
        rho_c,
        rho_c_pow,
        tau0,
        tau: inputs.tau,
        h_bar,
        r_bar,
        delta1: taylor.first_order,
        delta2: taylor.second_order,
        eta: (recursion.eta0, recursion.eta1, recursion.eta2),
        rate: recursion.rate,
        asymptotic_bound: recursion.asymptotic_bound,
        regime,
    }
}

/// Certified error envelope after `k` steps from an initial gap:
/// `rate^k * gap + rho_C^C eta2 (1 - rate^k) / (1 - rate)`.
pub fn error_envelope<S: Scalar>(
    report: &BoundReport<S>,
    initial_gap: S,
    k: usize,
) -> Result<S, BoundsError> {
    if report.regime == Regime::NoCertificate {
        return Err(BoundsError::NoCertificate);
    }
    let rate_pow = report.rate.powi(k as i32);
    let eta_bar2 = report.rho_c_pow * report.eta.2;
    Ok(rate_pow * initial_gap + eta_bar2 * (S::one() - rate_pow) / (S::one() - report.rate))
}

#[derive(Debug, thiserror::Error)]
pub enum BoundsError {
    #[error("the report carries no certificate")]
    NoCertificate,
}
