//! JSON experiment configuration. Every field has a default; unknown
//! keys are rejected so typos fail loudly instead of silently running
//! the wrong experiment.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use tvopt::problem::{FeasibleSet, TimeVaryingProblem};
use tvopt::scenarios::{
    generate_load_trace, load_trace_csv, DerScenario, ScalarScenario, VectorScenario,
};
use tvopt::solver::{DerivativeMode, PredictionSteps, SolverConfig};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverSection,
    /// Oracle fixed-point tolerance; `null` uses the adaptive default.
    #[serde(default)]
    pub oracle_tol: Option<f64>,
    /// Burn-in index for the asymptotic error; `null` uses the
    /// desk-scale policy `max(100, steps/2)`.
    #[serde(default)]
    pub k_bar: Option<usize>,
    /// Local certificate rate; `null` restricts reports to the global
    /// regime.
    #[serde(default)]
    pub tau: Option<f64>,
    /// Master seed for scenario draws (overridable per scenario).
    #[serde(default)]
    pub seed: u64,
    /// Initial iterate; `null` starts from the origin.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioConfig {
    /// Scalar periodic tracking benchmark.
    Scalar {
        #[serde(default = "default_omega")]
        omega: f64,
        #[serde(default = "default_kappa")]
        kappa: f64,
        #[serde(default = "default_mu")]
        mu: f64,
    },
    /// Box-constrained vector benchmark.
    Vector {
        #[serde(default = "default_vector_n")]
        n: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// DER dispatch benchmark.
    Der {
        #[serde(default = "default_der_nodes")]
        nodes: usize,
        #[serde(default = "default_tracking_weight")]
        tracking_weight: f64,
        #[serde(default = "default_spectral_top")]
        spectral_top: f64,
        #[serde(default)]
        seed: Option<u64>,
        #[serde(default)]
        trace: TraceConfig,
    },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TraceConfig {
    Synthetic {
        #[serde(default = "default_trace_steps")]
        steps: usize,
        #[serde(default = "default_trace_period")]
        period_s: f64,
        #[serde(default = "default_trace_base")]
        base_kw: f64,
        #[serde(default = "default_trace_amplitude")]
        amplitude_kw: f64,
        #[serde(default = "default_trace_noise")]
        noise_kw: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    Csv {
        path: String,
    },
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig::Synthetic {
            steps: default_trace_steps(),
            period_s: default_trace_period(),
            base_kw: default_trace_base(),
            amplitude_kw: default_trace_amplitude(),
            noise_kw: default_trace_noise(),
            seed: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub t0: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            h: default_h(),
            steps: default_steps(),
            t0: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Cfopc,
    Ufopc,
}

/// Prediction steps: a count or the string `"exact"`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum PredictionStepsConfig {
    Count(usize),
    Mode(ExactMarker),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactMarker {
    Exact,
}

impl PredictionStepsConfig {
    pub fn resolve(self) -> PredictionSteps {
        match self {
            PredictionStepsConfig::Count(p) => PredictionSteps::Finite(p),
            PredictionStepsConfig::Mode(ExactMarker::Exact) => PredictionSteps::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeModeConfig {
    Analytic,
    BackwardDifference,
}

impl DerivativeModeConfig {
    pub fn resolve(self) -> DerivativeMode {
        match self {
            DerivativeModeConfig::Analytic => DerivativeMode::Analytic,
            DerivativeModeConfig::BackwardDifference => DerivativeMode::BackwardDifference,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default = "default_stepsize")]
    pub alpha: f64,
    #[serde(default = "default_stepsize")]
    pub beta: f64,
    #[serde(default = "default_prediction_steps")]
    pub prediction_steps: PredictionStepsConfig,
    #[serde(default = "default_correction_steps")]
    pub correction_steps: usize,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_derivative_mode")]
    pub derivative_mode: DerivativeModeConfig,
    #[serde(default = "default_exact_tol")]
    pub exact_tol: f64,
    #[serde(default)]
    pub exact_max_iters: Option<usize>,
}

impl Default for SolverSection {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all solver fields have defaults")
    }
}

impl SolverSection {
    pub fn build(&self) -> SolverConfig<f64> {
        let mut cfg = SolverConfig::new(
            self.alpha,
            self.beta,
            self.prediction_steps.resolve(),
            self.correction_steps,
        )
        .with_suboptimality_factor(self.gamma)
        .with_derivative_mode(self.derivative_mode.resolve());
        cfg.exact_prediction_tol = self.exact_tol;
        cfg.exact_prediction_max_iters = self.exact_max_iters;
        cfg
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub h_list: Vec<f64>,
    #[serde(default)]
    pub variants: Vec<VariantConfig>,
    #[serde(default = "default_horizon_periods")]
    pub horizon_periods: f64,
    /// Oscillation period of the scenario; `null` uses the scenario's
    /// natural period.
    #[serde(default)]
    pub oscillation_period: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantConfig {
    pub label: String,
    #[serde(default)]
    pub algorithm: Option<Algorithm>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub prediction_steps: Option<PredictionStepsConfig>,
    #[serde(default)]
    pub correction_steps: Option<usize>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub derivative_mode: Option<DerivativeModeConfig>,
    #[serde(default)]
    pub tau: Option<f64>,
}

impl VariantConfig {
    pub fn solver(&self, base: &SolverSection) -> SolverConfig<f64> {
        let mut cfg = SolverConfig::new(
            self.alpha.unwrap_or(base.alpha),
            self.beta.unwrap_or(base.beta),
            self.prediction_steps
                .unwrap_or(base.prediction_steps)
                .resolve(),
            self.correction_steps.unwrap_or(base.correction_steps),
        )
        .with_suboptimality_factor(self.gamma.unwrap_or(base.gamma))
        .with_derivative_mode(
            self.derivative_mode
                .unwrap_or(base.derivative_mode)
                .resolve(),
        );
        cfg.exact_prediction_tol = base.exact_tol;
        cfg.exact_prediction_max_iters = base.exact_max_iters;
        cfg
    }

    pub fn algorithm(&self, base: &SolverSection) -> Algorithm {
        self.algorithm.unwrap_or(base.algorithm)
    }
}

fn default_omega() -> f64 {
    std::f64::consts::FRAC_PI_2
}
fn default_kappa() -> f64 {
    2.0
}
fn default_mu() -> f64 {
    1.75
}
fn default_vector_n() -> usize {
    50
}
fn default_der_nodes() -> usize {
    10
}
fn default_tracking_weight() -> f64 {
    2.0
}
fn default_spectral_top() -> f64 {
    21.0
}
fn default_trace_steps() -> usize {
    400
}
fn default_trace_period() -> f64 {
    1.0
}
fn default_trace_base() -> f64 {
    500.0
}
fn default_trace_amplitude() -> f64 {
    150.0
}
fn default_trace_noise() -> f64 {
    2.0
}
fn default_h() -> f64 {
    0.1
}
fn default_steps() -> usize {
    400
}
fn default_algorithm() -> Algorithm {
    Algorithm::Cfopc
}
fn default_stepsize() -> f64 {
    0.56
}
fn default_prediction_steps() -> PredictionStepsConfig {
    PredictionStepsConfig::Count(1)
}
fn default_correction_steps() -> usize {
    3
}
fn default_gamma() -> f64 {
    1.0
}
fn default_derivative_mode() -> DerivativeModeConfig {
    DerivativeModeConfig::Analytic
}
fn default_exact_tol() -> f64 {
    1e-10
}
fn default_horizon_periods() -> f64 {
    20.0
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))?;
    Ok(config)
}

/// A built scenario: the problem behind a trait object, its feasible
/// set, and the natural oscillation period used to size sweep horizons.
pub struct BuiltScenario {
    pub problem: Box<dyn TimeVaryingProblem<f64>>,
    pub set: FeasibleSet<f64>,
    pub oscillation_period: f64,
}

pub fn build_scenario(config: &ExperimentConfig) -> Result<BuiltScenario> {
    Ok(match &config.scenario {
        ScenarioConfig::Scalar { omega, kappa, mu } => {
            if *omega == 0.0 {
                bail!("scenario: omega must be nonzero");
            }
            let scenario = ScalarScenario {
                omega: *omega,
                kappa: *kappa,
                mu: *mu,
            };
            let (problem, set, _) = scenario.build();
            BuiltScenario {
                problem: Box::new(problem),
                set,
                oscillation_period: 2.0 * std::f64::consts::PI / omega.abs(),
            }
        }
        ScenarioConfig::Vector { n, seed } => {
            let scenario = VectorScenario::<f64>::new(*n, seed.unwrap_or(config.seed));
            let omega = scenario.omega;
            let (problem, set, _) = scenario.build();
            BuiltScenario {
                problem: Box::new(problem),
                set,
                oscillation_period: 2.0 * std::f64::consts::PI / omega,
            }
        }
        ScenarioConfig::Der {
            nodes,
            tracking_weight,
            spectral_top,
            seed,
            trace,
        } => {
            let trace = match trace {
                TraceConfig::Synthetic {
                    steps,
                    period_s,
                    base_kw,
                    amplitude_kw,
                    noise_kw,
                    seed: trace_seed,
                } => generate_load_trace(
                    trace_seed.unwrap_or(config.seed),
                    *steps,
                    *period_s,
                    *base_kw,
                    *amplitude_kw,
                    *noise_kw,
                ),
                TraceConfig::Csv { path } => load_trace_csv(Path::new(path))?,
            };
            let scenario = DerScenario::seeded(
                seed.unwrap_or(config.seed),
                *nodes,
                trace,
                *tracking_weight,
                *spectral_top,
            )?;
            let (problem, set, _) = scenario.build()?;
            BuiltScenario {
                problem: Box::new(problem),
                set,
                // the synthetic generator's slow oscillation
                oscillation_period: 600.0,
            }
        }
    })
}

pub fn initial_point(config: &ExperimentConfig, dim: usize) -> Result<Vec<f64>> {
    match &config.x0 {
        None => Ok(vec![0.0; dim]),
        Some(x0) => {
            if x0.len() != dim {
                bail!("x0: expected {dim} entries, got {}", x0.len());
            }
            Ok(x0.clone())
        }
    }
}
