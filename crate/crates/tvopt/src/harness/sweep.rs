use crate::bounds::{certify, AlgorithmClass, BoundReport, CertificateInputs};
use crate::problem::{FeasibleSet, SamplingGrid, TimeVaryingProblem};
use crate::scalar::{from_usize, lit, Scalar};
use crate::solver::{run_cfopc, run_ufopc, SolverConfig};

use super::{asymptotic_error, evaluate_run, HarnessError, KBarPolicy};

/// Which driver a sweep entry runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAlgorithm {
    Constrained,
    Unconstrained,
}

/// One algorithm variant in a sampling-period sweep.
#[derive(Debug, Clone)]
pub struct SweepEntry<S: Scalar> {
    pub label: String,
    pub algorithm: SweepAlgorithm,
    pub config: SolverConfig<S>,
    /// Local rate to request certificates with, when desired.
    pub tau: Option<S>,
}

/// Sweep controls: the sampling periods, how the horizon scales with
/// them, and the burn-in policy.
#[derive(Debug, Clone)]
pub struct SweepSettings<S: Scalar> {
    /// Sampling periods, sorted ascending, at least three.
    pub h_values: Vec<S>,
    /// Oscillation period of the scenario; the horizon covers
    /// `min_periods` of it regardless of the sampling period.
    pub oscillation_period: S,
    pub min_periods: S,
    pub k_bar: KBarPolicy,
    pub oracle_tol: Option<S>,
    pub x0: Vec<S>,
}

/// Least-squares fit of `log(error)` against `log(h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit<S: Scalar> {
    pub slope: S,
    pub intercept: S,
    /// Root of the summed squared residuals of the fit.
    pub residual: S,
}

/// One sampling period of one variant.
#[derive(Debug, Clone)]
pub struct SweepPoint<S: Scalar> {
    pub h: S,
    pub steps: usize,
    pub asymptotic_error: S,
    pub report: BoundReport<S>,
    pub diverged: bool,
}

/// All sampling periods of one variant plus the fitted slope.
#[derive(Debug, Clone)]
pub struct SweepResult<S: Scalar> {
    pub label: String,
    pub points: Vec<SweepPoint<S>>,
    /// Absent when fewer than two points produced usable errors.
    pub fit: Option<SlopeFit<S>>,
}

/// Fits `ln e = slope * ln h + intercept` by least squares. Exact power
/// laws recover their exponent to high accuracy.
pub fn fit_loglog<S: Scalar>(points: &[(S, S)]) -> Option<SlopeFit<S>> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(h, e)| h.is_finite() && e.is_finite() && *h > S::zero() && *e > S::zero())
        .map(|(h, e)| (h.to_f64().unwrap().ln(), e.to_f64().unwrap().ln()))
        .collect();
    if usable.len() < 2 {
        return None;
    }
    let n = usable.len() as f64;
    let sx: f64 = usable.iter().map(|(x, _)| x).sum();
    let sy: f64 = usable.iter().map(|(_, y)| y).sum();
    let sxx: f64 = usable.iter().map(|(x, _)| x * x).sum();
    let sxy: f64 = usable.iter().map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let residual = usable
        .iter()
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum::<f64>()
        .sqrt();
    Some(SlopeFit {
        slope: lit(slope),
        intercept: lit(intercept),
        residual: lit(residual),
    })
}

/// Runs every variant at every sampling period, with the horizon scaled
/// so each run covers the configured number of oscillation periods, and
/// fits the log-log slope of the asymptotic worst-case error. Diverged
/// runs are recorded and excluded from the fit.
pub fn sweep_h<S: Scalar, P: TimeVaryingProblem<S> + ?Sized>(
    problem: &P,
    set: &FeasibleSet<S>,
    entries: &[SweepEntry<S>],
    settings: &SweepSettings<S>,
) -> Result<Vec<SweepResult<S>>, HarnessError> {
    if settings.h_values.len() < 3 {
        return Err(HarnessError::InvalidInput(
            "sweep needs at least three sampling periods".into(),
        ));
    }
    // also rejects NaN entries
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if settings
        .h_values
        .windows(2)
        .any(|pair| !(pair[0] < pair[1]))
    {
        return Err(HarnessError::InvalidInput(
            "sampling periods must be sorted strictly ascending".into(),
        ));
    }

    let horizon = settings.oscillation_period * settings.min_periods;
    let mut results = Vec::with_capacity(entries.len());
    for entry in entries {
        let mut points = Vec::with_capacity(settings.h_values.len());
        for &h in &settings.h_values {
            let steps = (horizon / h)
                .ceil()
                .to_usize()
                .ok_or_else(|| HarnessError::InvalidInput("horizon overflow".into()))?
                .max(2);
            let grid = SamplingGrid::new(h, steps)?;
            let mut run = match entry.algorithm {
                SweepAlgorithm::Constrained => {
                    run_cfopc(problem, set, &grid, &entry.config, &settings.x0)?
                }
                SweepAlgorithm::Unconstrained => {
                    run_ufopc(problem, &grid, &entry.config, &settings.x0)?
                }
            };
            let diverged = run.diverged();
            let error = if diverged {
                S::infinity()
            } else {
                evaluate_run(problem, set, &mut run, settings.oracle_tol)?;
                asymptotic_error(&run, settings.k_bar.resolve(steps))
            };
            let class = match entry.algorithm {
                SweepAlgorithm::Constrained => AlgorithmClass::Constrained,
                SweepAlgorithm::Unconstrained => AlgorithmClass::Unconstrained {
                    gamma: entry.config.suboptimality_factor,
                },
            };
            let report = certify(&CertificateInputs {
                constants: problem.constants(),
                prediction_step_size: entry.config.prediction_step_size,
                correction_step_size: entry.config.correction_step_size,
                prediction_steps: entry.config.prediction_steps,
                correction_steps: entry.config.correction_steps,
                class,
                period: h,
                tau: entry.tau,
                initial_gap: run.errors.first().copied(),
            });
            points.push(SweepPoint {
                h,
                steps,
                asymptotic_error: error,
                report,
                diverged,
            });
        }
        let fit = fit_loglog(
            &points
                .iter()
                .filter(|p| !p.diverged)
                .map(|p| (p.h, p.asymptotic_error))
                .collect::<Vec<_>>(),
        );
        results.push(SweepResult {
            label: entry.label.clone(),
            points,
            fit,
        });
    }
    Ok(results)
}

/// Horizon long enough to cover `periods` oscillations at period
/// `oscillation`; convenience for building grids outside sweeps.
pub fn steps_for_horizon<S: Scalar>(h: S, oscillation: S, periods: usize) -> usize {
    (oscillation * from_usize::<S>(periods) / h)
        .ceil()
        .to_usize()
        .unwrap_or(2)
        .max(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::ScalarScenario;
    use crate::solver::SolverConfig;

    #[test]
    fn sweep_runs_variants_and_fits_slopes() {
        let (problem, set, _) = ScalarScenario::<f64>::default().build();
        let entries = [
            SweepEntry {
                label: "running".into(),
                algorithm: SweepAlgorithm::Unconstrained,
                config: SolverConfig::new(0.56, 0.56, crate::solver::PredictionSteps::Finite(0), 3)
                    .with_suboptimality_factor(0.0),
                tau: None,
            },
            SweepEntry {
                label: "exact".into(),
                algorithm: SweepAlgorithm::Unconstrained,
                config: SolverConfig::new(0.56, 0.56, crate::solver::PredictionSteps::Exact, 3)
                    .with_suboptimality_factor(0.0),
                tau: None,
            },
        ];
        let settings = SweepSettings {
            h_values: vec![0.05, 0.1, 0.2, 0.4],
            oscillation_period: 4.0,
            min_periods: 10.0,
            k_bar: crate::harness::KBarPolicy::DeskScale,
            oracle_tol: None,
            x0: vec![0.0],
        };
        let results = sweep_h(&problem, &set, &entries, &settings).unwrap();
        assert_eq!(results.len(), 2);
        for result in &results {
            assert_eq!(result.points.len(), 4);
            assert!(result.points.iter().all(|p| p.asymptotic_error.is_finite()));
        }
        let running = results[0].fit.unwrap();
        let exact = results[1].fit.unwrap();
        assert!(
            (running.slope - 1.0).abs() < 0.35,
            "slope {}",
            running.slope
        );
        assert!((exact.slope - 2.0).abs() < 0.4, "slope {}", exact.slope);
    }

    #[test]
    fn sweep_rejects_short_or_unsorted_period_lists() {
        let (problem, set, _) = ScalarScenario::<f64>::default().build();
        let entry = SweepEntry {
            label: "x".into(),
            algorithm: SweepAlgorithm::Unconstrained,
            config: SolverConfig::new(0.56, 0.56, crate::solver::PredictionSteps::Finite(0), 3),
            tau: None,
        };
        let mut settings = SweepSettings {
            h_values: vec![0.1, 0.2],
            oscillation_period: 4.0,
            min_periods: 2.0,
            k_bar: crate::harness::KBarPolicy::DeskScale,
            oracle_tol: None,
            x0: vec![0.0],
        };
        assert!(sweep_h(&problem, &set, std::slice::from_ref(&entry), &settings).is_err());
        settings.h_values = vec![0.1, 0.4, 0.2];
        assert!(sweep_h(&problem, &set, std::slice::from_ref(&entry), &settings).is_err());
    }

    #[test]
    fn exact_power_laws_recover_their_exponent() {
        for exponent in [1.0, 2.0, 3.0] {
            let points: Vec<(f64, f64)> = [0.05, 0.1, 0.2, 0.4]
                .iter()
                .map(|&h: &f64| (h, 0.37 * h.powf(exponent)))
                .collect();
            let fit = fit_loglog(&points).unwrap();
            assert!(
                (fit.slope - exponent).abs() < 1e-6,
                "slope {} for exponent {exponent}",
                fit.slope
            );
            assert!(fit.residual < 1e-10);
        }
    }

    #[test]
    fn degenerate_inputs_yield_no_fit() {
        assert!(fit_loglog::<f64>(&[]).is_none());
        assert!(fit_loglog(&[(0.1, 1.0)]).is_none());
        assert!(fit_loglog(&[(0.1, 1.0), (0.1, 2.0)]).is_none());
        // non-finite errors are filtered out
        assert!(fit_loglog(&[(0.1, f64::INFINITY), (0.2, f64::INFINITY)]).is_none());
    }
}
