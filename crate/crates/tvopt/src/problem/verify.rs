//! Empirical cross-check of an evaluator bundle against its declared
//! smoothness constants: finite-difference consistency of the
//! derivatives and Rayleigh-quotient bounds of the Hessian.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::scalar::{lit, Scalar};
use crate::vecmath;

use super::{FeasibleSet, TimeVaryingProblem};

/// Ranges the probe points are drawn from. Probes stay strictly inside
/// the feasible set (pulled in by a small margin) so that central
/// differences never leave the region where the declared constants
/// hold.
#[derive(Debug, Clone)]
pub struct ProbeRanges<S: Scalar> {
    /// Fallback coordinate range for unbounded sets.
    pub x_low: S,
    pub x_high: S,
    pub t_low: S,
    pub t_high: S,
}

impl<S: Scalar> Default for ProbeRanges<S> {
    fn default() -> Self {
        Self {
            x_low: lit(-2.0),
            x_high: lit(2.0),
            t_low: S::zero(),
            t_high: lit(10.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerificationReport<S: Scalar> {
    /// Relative residual of the gradient against a central difference of
    /// the value, one entry per probe.
    pub gradient_residuals: Vec<S>,
    /// Relative residual of the Hessian action against a central
    /// difference of the gradient.
    pub hessian_residuals: Vec<S>,
    /// Relative symmetry defect `|<u,Hv> - <v,Hu>|`.
    pub symmetry_residuals: Vec<S>,
    /// Relative residual of the provided mixed derivative against a
    /// central difference of the gradient in time (empty when the
    /// problem does not provide one).
    pub mixed_residuals: Vec<S>,
    /// Empirical extremes of the Rayleigh quotient `<v,Hv>/<v,v>`.
    pub rayleigh_min: S,
    pub rayleigh_max: S,
    /// Human-readable descriptions of every violated check.
    pub violations: Vec<String>,
}

impl<S: Scalar> VerificationReport<S> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const GRADIENT_REL_TOL: f64 = 1e-5;
pub const HESSIAN_REL_TOL: f64 = 1e-4;
pub const SYMMETRY_REL_TOL: f64 = 1e-10;
pub const MIXED_REL_TOL: f64 = 1e-4;
/// Absolute tolerance on the Rayleigh quotient against declared bounds.
pub const RAYLEIGH_ABS_TOL: f64 = 1e-6;

/// Verifies a problem over `probes` seeded probe points drawn from the
/// default ranges. Violations are reported, never thrown.
pub fn verify_problem<S: Scalar, P: TimeVaryingProblem<S> + ?Sized>(
    problem: &P,
    set: &FeasibleSet<S>,
    probes: usize,
    seed: u64,
) -> VerificationReport<S> {
    verify_problem_in(problem, set, &ProbeRanges::default(), probes, seed)
}

/// As [`verify_problem`] with explicit probe ranges.
pub fn verify_problem_in<S: Scalar, P: TimeVaryingProblem<S> + ?Sized>(
    problem: &P,
    set: &FeasibleSet<S>,
    ranges: &ProbeRanges<S>,
    probes: usize,
    seed: u64,
) -> VerificationReport<S> {
    assert!(probes >= 1, "need at least one probe");
    let n = problem.dim();
    let constants = problem.constants();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let mut report = VerificationReport {
        gradient_residuals: Vec::with_capacity(probes),
        hessian_residuals: Vec::with_capacity(probes),
        symmetry_residuals: Vec::with_capacity(probes),
        mixed_residuals: Vec::new(),
        rayleigh_min: S::infinity(),
        rayleigh_max: S::neg_infinity(),
        violations: Vec::new(),
    };

    for probe in 0..probes {
        let x = sample_interior(set, ranges, n, &mut rng);
        let t = lit::<S>(
            rng.gen_range(ranges.t_low.to_f64().unwrap()..=ranges.t_high.to_f64().unwrap()),
        );

        // gradient vs central difference of the value along a random direction
        let u = random_unit(n, &mut rng);
        let delta = lit::<S>(1e-5) * (S::one() + vecmath::norm(&x));
        let xp = shifted(&x, &u, delta);
        let xm = shifted(&x, &u, -delta);
        let fd = (problem.value(&xp, t) - problem.value(&xm, t)) / (delta + delta);
        let grad = problem.gradient(&x, t);
        let directional = vecmath::dot(&grad, &u);
        let gres = rel_residual(fd, directional);
        if gres > lit(GRADIENT_REL_TOL) {
            report.violations.push(format!(
                "probe {probe}: gradient residual {gres} > {GRADIENT_REL_TOL}"
            ));
        }
        report.gradient_residuals.push(gres);

        // Hessian action vs central difference of the gradient
        let v = random_unit(n, &mut rng);
        let hdelta = lit::<S>(1e-5) * (S::one() + vecmath::norm(&x));
        let gp = problem.gradient(&shifted(&x, &v, hdelta), t);
        let gm = problem.gradient(&shifted(&x, &v, -hdelta), t);
        let hv = problem.hessian_vec(&x, t, &v);
        let mut hres = S::zero();
        let mut scale = S::one();
        for i in 0..n {
            let fd_i = (gp[i] - gm[i]) / (hdelta + hdelta);
            hres = hres.max((fd_i - hv[i]).abs());
            scale = scale.max(hv[i].abs());
        }
        let hres = hres / scale;
        if hres > lit(HESSIAN_REL_TOL) {
            report.violations.push(format!(
                "probe {probe}: Hessian residual {hres} > {HESSIAN_REL_TOL}"
            ));
        }
        report.hessian_residuals.push(hres);

        // symmetry <u, Hv> = <v, Hu>
        let hu = problem.hessian_vec(&x, t, &u);
        let uhv = vecmath::dot(&u, &hv);
        let vhu = vecmath::dot(&v, &hu);
        let sres = rel_residual(uhv, vhu);
        if sres > lit(SYMMETRY_REL_TOL) {
            report.violations.push(format!(
                "probe {probe}: symmetry defect {sres} > {SYMMETRY_REL_TOL}"
            ));
        }
        report.symmetry_residuals.push(sres);

        // Rayleigh quotient of the Hessian against declared bounds
        let hvv = problem.hessian_vec(&x, t, &v);
        let quotient = vecmath::dot(&v, &hvv) / vecmath::dot(&v, &v);
        report.rayleigh_min = report.rayleigh_min.min(quotient);
        report.rayleigh_max = report.rayleigh_max.max(quotient);

        // mixed derivative vs central difference of the gradient in time
        if let Some(mixed) = problem.mixed_derivative(&x, t) {
            let tdelta = lit::<S>(1e-5) * S::one().max(t.abs());
            let gp = problem.gradient(&x, t + tdelta);
            let gm = problem.gradient(&x, t - tdelta);
            let mut mres = S::zero();
            let mut scale = S::one();
            for i in 0..n {
                let fd_i = (gp[i] - gm[i]) / (tdelta + tdelta);
                mres = mres.max((fd_i - mixed[i]).abs());
                scale = scale.max(mixed[i].abs());
            }
            let mres = mres / scale;
            if mres > lit(MIXED_REL_TOL) {
                report.violations.push(format!(
                    "probe {probe}: mixed-derivative residual {mres} > {MIXED_REL_TOL}"
                ));
            }
            report.mixed_residuals.push(mres);
        }
    }

    let tol = lit::<S>(RAYLEIGH_ABS_TOL);
    if report.rayleigh_min < constants.strong_convexity - tol {
        report.violations.push(format!(
            "Rayleigh quotient {} below declared strong convexity {}",
            report.rayleigh_min, constants.strong_convexity
        ));
    }
    if report.rayleigh_max > constants.gradient_lipschitz + tol {
        report.violations.push(format!(
            "Rayleigh quotient {} above declared gradient Lipschitz bound {}",
            report.rayleigh_max, constants.gradient_lipschitz
        ));
    }

    report
}

fn rel_residual<S: Scalar>(a: S, b: S) -> S {
    (a - b).abs() / S::one().max(a.abs().max(b.abs()))
}

fn shifted<S: Scalar>(x: &[S], dir: &[S], delta: S) -> Vec<S> {
    x.iter()
        .zip(dir)
        .map(|(&xi, &di)| xi + delta * di)
        .collect()
}

fn random_unit<S: Scalar>(n: usize, rng: &mut ChaCha12Rng) -> Vec<S> {
    loop {
        let v: Vec<S> = (0..n).map(|_| lit(rng.gen_range(-1.0..=1.0))).collect();
        let norm = vecmath::norm(&v);
        if norm > lit(1e-3) {
            return v.iter().map(|&x| x / norm).collect();
        }
    }
}

/// Samples a point strictly inside the set, staying a margin away from
/// box/ball boundaries so finite-difference probes remain feasible.
fn sample_interior<S: Scalar>(
    set: &FeasibleSet<S>,
    ranges: &ProbeRanges<S>,
    n: usize,
    rng: &mut ChaCha12Rng,
) -> Vec<S> {
    match set {
        FeasibleSet::WholeSpace { .. } => (0..n)
            .map(|_| {
                lit(rng.gen_range(ranges.x_low.to_f64().unwrap()..=ranges.x_high.to_f64().unwrap()))
            })
            .collect(),
        FeasibleSet::Box { lower, upper } => lower
            .iter()
            .zip(upper)
            .map(|(&lo, &hi)| {
                let lo = lo.to_f64().unwrap();
                let hi = hi.to_f64().unwrap();
                let margin = ((hi - lo) * 1e-3).min(1e-3);
                lit(rng.gen_range((lo + margin)..=(hi - margin)))
            })
            .collect(),
        FeasibleSet::Ball { center, radius } => {
            // rejection sampling in the bounding box, shrunk slightly
            let r = radius.to_f64().unwrap() * (1.0 - 1e-3);
            loop {
                let offset: Vec<f64> = (0..n).map(|_| rng.gen_range(-r..=r)).collect();
                let norm2: f64 = offset.iter().map(|o| o * o).sum();
                if norm2 <= r * r {
                    return center
                        .iter()
                        .zip(&offset)
                        .map(|(&c, &o)| c + lit::<S>(o))
                        .collect();
                }
            }
        }
    }
}
