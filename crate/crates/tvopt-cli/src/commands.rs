use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

use tvopt::bounds::{certify, error_envelope, AlgorithmClass, CertificateInputs, Regime};
use tvopt::harness::{
    allocate_budget, asymptotic_error, evaluate_run, fit_loglog, run_budgeted, steps_for_horizon,
    sweep_h, BudgetStrategy, BudgetTiming, KBarPolicy, SweepAlgorithm, SweepEntry, SweepSettings,
};
use tvopt::problem::SamplingGrid;
use tvopt::scenarios::full_precision;
use tvopt::solver::{run_cfopc, run_ufopc, PredictionSteps, SolverConfig};
use tvopt::TrackingRun64;

use crate::config::{
    build_scenario, initial_point, Algorithm, BuiltScenario, ExperimentConfig, SweepSection,
    VariantConfig,
};

/// Process outcome mapped to exit codes by `main`.
pub enum Outcome {
    Success,
    Diverged,
}

fn k_bar_policy(config: &ExperimentConfig) -> KBarPolicy {
    match config.k_bar {
        Some(k) => KBarPolicy::Fixed(k),
        None => KBarPolicy::DeskScale,
    }
}

fn execute(
    scenario: &BuiltScenario,
    config: &ExperimentConfig,
    solver: &SolverConfig<f64>,
    algorithm: Algorithm,
    grid: &SamplingGrid<f64>,
    x0: &[f64],
) -> Result<TrackingRun64> {
    let mut run = match algorithm {
        Algorithm::Cfopc => run_cfopc(&*scenario.problem, &scenario.set, grid, solver, x0)?,
        Algorithm::Ufopc => run_ufopc(&*scenario.problem, grid, solver, x0)?,
    };
    // diverged runs still get their completed prefix evaluated
    evaluate_run(
        &*scenario.problem,
        &scenario.set,
        &mut run,
        config.oracle_tol,
    )?;
    Ok(run)
}

fn certificate_for(
    scenario: &BuiltScenario,
    config: &ExperimentConfig,
    solver: &SolverConfig<f64>,
    algorithm: Algorithm,
    h: f64,
    tau: Option<f64>,
    initial_gap: Option<f64>,
) -> tvopt::BoundReport64 {
    let class = match algorithm {
        Algorithm::Cfopc => AlgorithmClass::Constrained,
        Algorithm::Ufopc => AlgorithmClass::Unconstrained {
            gamma: solver.suboptimality_factor,
        },
    };
    certify(&CertificateInputs {
        constants: scenario.problem.constants(),
        prediction_step_size: solver.prediction_step_size,
        correction_step_size: solver.correction_step_size,
        prediction_steps: solver.prediction_steps,
        correction_steps: solver.correction_steps,
        class,
        period: h,
        tau: tau.or(config.tau),
        initial_gap,
    })
}

pub fn cmd_run(config: &ExperimentConfig, out_dir: &Path) -> Result<Outcome> {
    let scenario = build_scenario(config)?;
    let solver = config.solver.build();
    solver.validate().context("solver configuration")?;
    let grid = SamplingGrid::new(config.grid.h, config.grid.steps)
        .map(|g| SamplingGrid {
            origin: config.grid.t0,
            ..g
        })
        .context("grid configuration")?;
    let x0 = initial_point(config, scenario.problem.dim())?;

    let run = execute(
        &scenario,
        config,
        &solver,
        config.solver.algorithm,
        &grid,
        &x0,
    )?;
    let report = certificate_for(
        &scenario,
        config,
        &solver,
        config.solver.algorithm,
        grid.period,
        None,
        run.errors.first().copied(),
    );

    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let path = out_dir.join("run.csv");
    let mut csv = String::from("k,t,error,pred_error,certified_envelope\n");
    let initial_gap = run.errors.first().copied().unwrap_or(0.0);
    for k in 1..=run.completed_steps() {
        let envelope = if report.regime == Regime::NoCertificate {
            String::new()
        } else {
            full_precision(error_envelope(&report, initial_gap, k).expect("certified"))
        };
        csv.push_str(&format!(
            "{k},{},{},{},{envelope}\n",
            full_precision(grid.time_at(k)),
            full_precision(run.errors[k]),
            full_precision(run.prediction_errors[k - 1]),
        ));
    }
    fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;

    if run.diverged() {
        println!("diverged at step {}", run.divergence.unwrap());
        println!("regime: {}", report.regime.as_str());
        println!("wrote {}", path.display());
        return Ok(Outcome::Diverged);
    }
    let k_bar = k_bar_policy(config).resolve(grid.steps);
    println!(
        "asymptotic error (k > {k_bar}): {}",
        full_precision(asymptotic_error(&run, k_bar))
    );
    println!("regime: {}", report.regime.as_str());
    if run.uncertified {
        println!("note: stepsizes outside the certificate range");
    }
    println!("wrote {}", path.display());
    Ok(Outcome::Success)
}

pub struct SweepOptions {
    pub h_list: Option<Vec<f64>>,
    pub budget: Option<BudgetTiming<f64>>,
}

fn default_variants() -> Vec<VariantConfig> {
    serde_json::from_str(
        r#"[
        {"label": "running", "prediction_steps": 0, "gamma": 0.0},
        {"label": "exact_prediction", "prediction_steps": "exact", "gamma": 0.0}
    ]"#,
    )
    .expect("default variants parse")
}

pub fn cmd_sweep(
    config: &ExperimentConfig,
    out_dir: &Path,
    options: &SweepOptions,
) -> Result<Outcome> {
    let scenario = build_scenario(config)?;
    let empty_sweep = SweepSection {
        h_list: Vec::new(),
        variants: Vec::new(),
        horizon_periods: 20.0,
        oscillation_period: None,
    };
    let sweep = config.sweep.as_ref().unwrap_or(&empty_sweep);
    let h_list = options
        .h_list
        .clone()
        .unwrap_or_else(|| sweep.h_list.clone());
    if h_list.is_empty() {
        bail!("sweep: h_list is empty (pass --h-list or set sweep.h_list)");
    }
    if h_list.windows(2).any(|w| w[0] >= w[1]) {
        bail!("sweep: h_list must be sorted strictly ascending");
    }
    let oscillation = sweep
        .oscillation_period
        .unwrap_or(scenario.oscillation_period);
    let x0 = initial_point(config, scenario.problem.dim())?;
    let k_bar = k_bar_policy(config);

    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let path = out_dir.join("sweep.csv");
    let mut csv = String::from("variant,h,asymptotic_error,slope_contrib,P,C,certified\n");
    let mut any_diverged = false;

    if let Some(timing) = &options.budget {
        // budgeted mode: the three strategies with counts allocated per
        // sampling period
        for (strategy, label) in [
            (
                BudgetStrategy::PredictionCorrection,
                "prediction_correction",
            ),
            (BudgetStrategy::CorrectionExtra, "correction_extra"),
            (BudgetStrategy::TotalCorrection, "total_correction"),
        ] {
            let mut previous: Option<(f64, f64)> = None;
            let mut pairs = Vec::new();
            for &h in &h_list {
                let plan = allocate_budget(h, *timing);
                let (p_column, c_column) = match strategy {
                    BudgetStrategy::PredictionCorrection => (
                        plan.predictions.map(|p| p.to_string()).unwrap_or_default(),
                        plan.corrections,
                    ),
                    BudgetStrategy::CorrectionExtra => (String::from("0"), plan.corrections),
                    BudgetStrategy::TotalCorrection => (String::from("0"), plan.total_corrections),
                };
                if strategy == BudgetStrategy::PredictionCorrection
                    && plan.prediction_unaffordable()
                {
                    csv.push_str(&format!(
                        "{label},{},,,,{c_column},false\n",
                        full_precision(h)
                    ));
                    continue;
                }
                let steps =
                    steps_for_horizon(h, oscillation, sweep.horizon_periods.ceil() as usize);
                let grid = SamplingGrid::new(h, steps)?;
                let mut run = run_budgeted(
                    &*scenario.problem,
                    &scenario.set,
                    &grid,
                    config.solver.alpha,
                    config.solver.beta,
                    &plan,
                    strategy,
                    config.solver.derivative_mode.resolve(),
                    &x0,
                )?;
                let error = if run.diverged() {
                    any_diverged = true;
                    f64::INFINITY
                } else {
                    evaluate_run(
                        &*scenario.problem,
                        &scenario.set,
                        &mut run,
                        config.oracle_tol,
                    )?;
                    asymptotic_error(&run, k_bar.resolve(steps))
                };
                let effective = SolverConfig::new(
                    config.solver.alpha,
                    config.solver.beta,
                    match strategy {
                        BudgetStrategy::PredictionCorrection => {
                            PredictionSteps::Finite(plan.predictions.unwrap_or(0))
                        }
                        _ => PredictionSteps::Finite(0),
                    },
                    c_column,
                );
                let report = certificate_for(
                    &scenario,
                    config,
                    &effective,
                    Algorithm::Cfopc,
                    h,
                    None,
                    run.errors.first().copied(),
                );
                let slope_contrib = slope_against(&mut previous, h, error);
                pairs.push((h, error));
                csv.push_str(&format!(
                    "{label},{},{},{slope_contrib},{p_column},{c_column},{}\n",
                    full_precision(h),
                    full_precision(error),
                    report.regime != Regime::NoCertificate,
                ));
            }
            print_fit(label, &pairs);
        }
    } else {
        let owned_defaults;
        let variants: &[VariantConfig] = if sweep.variants.is_empty() {
            owned_defaults = default_variants();
            &owned_defaults
        } else {
            &sweep.variants
        };
        run_variants(
            config,
            &scenario,
            variants,
            &h_list,
            oscillation,
            sweep,
            &x0,
            k_bar,
            &mut csv,
            &mut any_diverged,
        )?;
    }

    fs::write(&path, &csv).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    if any_diverged {
        return Ok(Outcome::Diverged);
    }
    Ok(Outcome::Success)
}

#[allow(clippy::too_many_arguments)]
fn run_variants(
    config: &ExperimentConfig,
    scenario: &BuiltScenario,
    variants: &[VariantConfig],
    h_list: &[f64],
    oscillation: f64,
    sweep: &SweepSection,
    x0: &[f64],
    k_bar: KBarPolicy,
    csv: &mut String,
    any_diverged: &mut bool,
) -> Result<()> {
    let mut entries = Vec::with_capacity(variants.len());
    for variant in variants {
        let solver = variant.solver(&config.solver);
        solver
            .validate()
            .with_context(|| format!("variant {}", variant.label))?;
        entries.push(SweepEntry {
            label: variant.label.clone(),
            algorithm: match variant.algorithm(&config.solver) {
                Algorithm::Cfopc => SweepAlgorithm::Constrained,
                Algorithm::Ufopc => SweepAlgorithm::Unconstrained,
            },
            config: solver,
            tau: variant.tau.or(config.tau),
        });
    }
    let settings = SweepSettings {
        h_values: h_list.to_vec(),
        oscillation_period: oscillation,
        min_periods: sweep.horizon_periods,
        k_bar,
        oracle_tol: config.oracle_tol,
        x0: x0.to_vec(),
    };
    let results = sweep_h(&*scenario.problem, &scenario.set, &entries, &settings)?;
    for result in &results {
        let entry = entries
            .iter()
            .find(|e| e.label == result.label)
            .expect("result labels mirror entries");
        let (p_column, c_column) = match entry.config.prediction_steps {
            PredictionSteps::Finite(p) => (p.to_string(), entry.config.correction_steps),
            PredictionSteps::Exact => ("inf".to_string(), entry.config.correction_steps),
        };
        let mut previous: Option<(f64, f64)> = None;
        for point in &result.points {
            if point.diverged {
                *any_diverged = true;
            }
            let slope_contrib = slope_against(&mut previous, point.h, point.asymptotic_error);
            csv.push_str(&format!(
                "{},{},{},{slope_contrib},{p_column},{c_column},{}\n",
                result.label,
                full_precision(point.h),
                full_precision(point.asymptotic_error),
                point.report.regime != Regime::NoCertificate,
            ));
        }
        match &result.fit {
            Some(fit) => println!(
                "{}: slope {} (intercept {}, residual {})",
                result.label,
                full_precision(fit.slope),
                full_precision(fit.intercept),
                full_precision(fit.residual)
            ),
            None => println!("{}: slope unavailable", result.label),
        }
    }
    Ok(())
}

/// Pairwise log-log slope against the previous sampling period, written
/// into the `slope_contrib` column (empty for the first row of a
/// variant or when either error is unusable).
fn slope_against(previous: &mut Option<(f64, f64)>, h: f64, error: f64) -> String {
    let contrib = match *previous {
        Some((h0, e0)) if e0 > 0.0 && error > 0.0 && e0.is_finite() && error.is_finite() => {
            full_precision((error.ln() - e0.ln()) / (h.ln() - h0.ln()))
        }
        _ => String::new(),
    };
    *previous = Some((h, error));
    contrib
}

fn print_fit(label: &str, pairs: &[(f64, f64)]) {
    match fit_loglog(pairs) {
        Some(fit) => println!(
            "{label}: slope {} (intercept {}, residual {})",
            full_precision(fit.slope),
            full_precision(fit.intercept),
            full_precision(fit.residual)
        ),
        None => println!("{label}: slope unavailable"),
    }
}

#[allow(clippy::too_many_arguments)]
pub struct BoundsArgs {
    pub m: f64,
    pub l: f64,
    pub alpha: f64,
    pub beta: f64,
    pub prediction_steps: PredictionSteps,
    pub correction_steps: usize,
    pub gamma: Option<f64>,
    pub c0: f64,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub c3: Option<f64>,
    pub h: f64,
    pub tau: f64,
    pub initial_gap: Option<f64>,
}

pub fn cmd_bounds(args: &BoundsArgs) -> Result<()> {
    let mut constants = tvopt::SmoothnessConstants64::new(args.m, args.l, args.c0)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    if args.c1.is_some() || args.c2.is_some() || args.c3.is_some() {
        // partially specified third-order bounds default to zero
        constants = constants
            .with_third_order(
                args.c1.unwrap_or(0.0),
                args.c2.unwrap_or(0.0),
                args.c3.unwrap_or(0.0),
            )
            .map_err(|e| anyhow::anyhow!("{e}"))?;
    }
    let class = match args.gamma {
        Some(gamma) => AlgorithmClass::Unconstrained { gamma },
        None => AlgorithmClass::Constrained,
    };
    let report = certify(&CertificateInputs {
        constants,
        prediction_step_size: args.alpha,
        correction_step_size: args.beta,
        prediction_steps: args.prediction_steps,
        correction_steps: args.correction_steps,
        class,
        period: args.h,
        tau: Some(args.tau),
        initial_gap: args.initial_gap,
    });
    println!("{}", serde_json::to_string_pretty(&report.to_json())?);
    Ok(())
}
