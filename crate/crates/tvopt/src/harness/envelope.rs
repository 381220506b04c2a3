use crate::bounds::{error_envelope, BoundReport, Regime};
use crate::scalar::{lit, Scalar};
use crate::solver::TrackingRun;

use super::HarnessError;

/// Absolute slack absorbing oracle and floating-point error when
/// comparing empirical errors against the certified envelope.
pub const ENVELOPE_ABS_TOL: f64 = 1e-8;

/// Result of checking a run against its certificate's envelope.
#[derive(Debug, Clone)]
pub struct EnvelopeCheck<S: Scalar> {
    pub passed: bool,
    /// First step whose error exceeded the envelope.
    pub first_violation: Option<usize>,
    /// `envelope(k) + slack - error(k)` per step; negative entries are
    /// violations.
    pub margins: Vec<S>,
}

/// Asserts that the tracking error never exceeds the certified
/// envelope (plus slack) at any step. The run must have been evaluated
/// against the oracle, and the report must carry a certificate.
pub fn envelope_check<S: Scalar>(
    run: &TrackingRun<S>,
    report: &BoundReport<S>,
) -> Result<EnvelopeCheck<S>, HarnessError> {
    if report.regime == Regime::NoCertificate {
        return Err(HarnessError::Bounds(
            crate::bounds::BoundsError::NoCertificate,
        ));
    }
    if run.errors.is_empty() {
        return Err(HarnessError::NotEvaluated);
    }
    let slack = lit::<S>(ENVELOPE_ABS_TOL);
    let initial_gap = run.errors[0];
    let mut margins = Vec::with_capacity(run.errors.len());
    let mut first_violation = None;
    for (k, &observed) in run.errors.iter().enumerate() {
        let envelope = error_envelope(report, initial_gap, k)?;
        let margin = envelope + slack - observed;
        if margin < S::zero() && first_violation.is_none() {
            first_violation = Some(k);
        }
        margins.push(margin);
    }
    Ok(EnvelopeCheck {
        passed: first_violation.is_none(),
        first_violation,
        margins,
    })
}
