//! Cross-cutting solver contracts: projection properties, per-step
//! contraction, loop-structure equivalences, evaluator freezing, and
//! determinism.

use std::sync::Mutex;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use tvopt::bounds::contraction_rates;
use tvopt::problem::{FeasibleSet, SmoothnessConstants, TimeVaryingProblem};
use tvopt::scenarios::{MovingQuadratic, ScalarScenario};
use tvopt::solver::{
    correct, predict_constrained, predict_unconstrained, run_cfopc, run_ufopc, PredictionState,
    PredictionSteps, SolverConfig,
};

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn random_set(rng: &mut ChaCha12Rng, dim: usize) -> FeasibleSet<f64> {
    match rng.gen_range(0..3) {
        0 => FeasibleSet::whole_space(dim),
        1 => {
            let lower: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..0.5)).collect();
            let upper: Vec<f64> = lower
                .iter()
                .map(|lo| lo + rng.gen_range(0.0..3.0))
                .collect();
            FeasibleSet::box_bounds(lower, upper).unwrap()
        }
        _ => {
            let center: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            FeasibleSet::ball(center, rng.gen_range(0.1..3.0)).unwrap()
        }
    }
}

#[test]
fn projection_idempotent_and_nonexpansive_over_1000_cases() {
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let dim = rng.gen_range(1..6);
        let set = random_set(&mut rng, dim);
        let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let y: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let px = set.project(&x).unwrap();
        let py = set.project(&y).unwrap();
        // idempotence is exact
        assert_eq!(set.project(&px).unwrap(), px);
        // nonexpansiveness up to roundoff
        assert!(dist(&px, &py) <= dist(&x, &y) + 1e-12);
        assert!(set.contains(&px, 1e-12));
    }
}

#[test]
fn correction_contracts_at_the_certified_factor_per_step() {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for _ in 0..50 {
        let dim = rng.gen_range(1..5);
        let curvatures: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.5..4.0)).collect();
        let center: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let q = MovingQuadratic::fixed(curvatures.clone(), center);
        let constants = q.constants();
        let l = constants.gradient_lipschitz;
        let m = constants.strong_convexity;
        let beta = rng.gen_range(0.05..2.0 / l);
        let (_, rho_c) = contraction_rates(m, l, beta, beta);

        let set = if rng.gen_bool(0.5) {
            FeasibleSet::whole_space(dim)
        } else {
            FeasibleSet::uniform_box(dim, -1.0, 1.0).unwrap()
        };
        let minimizer = q.exact_minimizer(&set, 0.0).unwrap();
        let mut x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        x = set.project(&x).unwrap();
        for _ in 0..20 {
            let next = correct(&q, &set, &x, 0.0, beta, 1).unwrap();
            let before = dist(&x, &minimizer);
            let after = dist(&next, &minimizer);
            assert!(
                after <= rho_c * before + 1e-9,
                "contraction violated: {after} > {rho_c} * {before}"
            );
            x = next;
        }
    }
}

/// Independent naive reimplementation of the prediction iteration on an
/// explicit 2x2 diagonal model, mirroring the update formula term by
/// term.
#[allow(clippy::too_many_arguments)]
fn naive_prediction(
    hessian_diag: [f64; 2],
    grad: [f64; 2],
    tdx: [f64; 2],
    base: [f64; 2],
    h: f64,
    alpha: f64,
    steps: usize,
    clamp: Option<([f64; 2], [f64; 2])>,
) -> [f64; 2] {
    let mut x = base;
    for _ in 0..steps {
        let mut next = [0.0; 2];
        for i in 0..2 {
            let model = hessian_diag[i] * (x[i] - base[i]) + h * tdx[i] + grad[i];
            next[i] = x[i] - alpha * model;
            if let Some((lo, hi)) = clamp {
                next[i] = next[i].max(lo[i]).min(hi[i]);
            }
        }
        x = next;
    }
    x
}

#[test]
fn prediction_matches_a_naive_unrolled_loop() {
    let mut rng = ChaCha12Rng::seed_from_u64(99);
    for _ in 0..200 {
        let diag = [rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0)];
        let base = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let velocity = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let q = MovingQuadratic::new(diag.to_vec(), vec![0.3, -0.4], velocity.to_vec());
        let t = rng.gen_range(0.0..5.0);
        let h = rng.gen_range(0.01..0.5);
        let alpha = rng.gen_range(0.05..0.6);
        let steps = rng.gen_range(0..6);

        let state = PredictionState::at(
            &q,
            &base,
            t,
            h,
            tvopt::solver::DerivativeMode::Analytic,
            None,
        )
        .unwrap();
        let grad = [state.gradient[0], state.gradient[1]];
        let tdx = [state.mixed[0], state.mixed[1]];

        let boxed = rng.gen_bool(0.5);
        let (set, clamp) = if boxed {
            (
                FeasibleSet::uniform_box(2, -0.5, 0.5).unwrap(),
                Some(([-0.5, -0.5], [0.5, 0.5])),
            )
        } else {
            (FeasibleSet::whole_space(2), None)
        };
        let predicted = predict_constrained(&q, &set, &state, alpha, steps).unwrap();
        let naive = naive_prediction(diag, grad, tdx, base, h, alpha, steps, clamp);
        assert!((predicted[0] - naive[0]).abs() < 1e-12);
        assert!((predicted[1] - naive[1]).abs() < 1e-12);
    }
}

#[test]
fn unconstrained_full_factor_prediction_is_bitwise_constrained() {
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    for _ in 0..100 {
        let diag = vec![rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0)];
        let q = MovingQuadratic::new(
            diag,
            vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
            vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
        );
        let base: Vec<f64> = vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let state = PredictionState::at(
            &q,
            &base,
            rng.gen_range(0.0..3.0),
            0.1,
            tvopt::solver::DerivativeMode::Analytic,
            None,
        )
        .unwrap();
        let set = FeasibleSet::whole_space(2);
        let alpha = rng.gen_range(0.05..0.6);
        let steps = rng.gen_range(0..5);
        let constrained = predict_constrained(&q, &set, &state, alpha, steps).unwrap();
        let unconstrained = predict_unconstrained(&q, &state, alpha, steps, 1.0).unwrap();
        assert_eq!(
            constrained.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            unconstrained
                .iter()
                .map(|v| v.to_bits())
                .collect::<Vec<_>>()
        );
    }
}

#[test]
fn full_factor_run_equals_constrained_run_step_for_step() {
    let (problem, whole_space, _) = ScalarScenario::<f64>::default().build();
    let grid = tvopt::SamplingGrid::new(0.1, 60).unwrap();
    let cfg =
        SolverConfig::new(0.56, 0.56, PredictionSteps::Finite(2), 3).with_suboptimality_factor(1.0);
    let constrained = run_cfopc(&problem, &whole_space, &grid, &cfg, &[0.0]).unwrap();
    let unconstrained = run_ufopc(&problem, &grid, &cfg, &[0.0]).unwrap();
    for (a, b) in constrained.iterates.iter().zip(&unconstrained.iterates) {
        assert_eq!(a[0].to_bits(), b[0].to_bits());
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    let (problem, _set, _) = ScalarScenario::<f64>::default().build();
    let grid = tvopt::SamplingGrid::new(0.1, 80).unwrap();
    let cfg =
        SolverConfig::new(0.56, 0.56, PredictionSteps::Exact, 3).with_suboptimality_factor(0.0);
    let a = run_ufopc(&problem, &grid, &cfg, &[0.0]).unwrap();
    let b = run_ufopc(&problem, &grid, &cfg, &[0.0]).unwrap();
    assert_eq!(a.iterates.len(), b.iterates.len());
    for (xa, xb) in a.iterates.iter().zip(&b.iterates) {
        assert_eq!(xa[0].to_bits(), xb[0].to_bits());
    }
    for (pa, pb) in a.predicted.iter().zip(&b.predicted) {
        assert_eq!(pa[0].to_bits(), pb[0].to_bits());
    }
}

#[test]
fn constrained_iterates_stay_feasible() {
    let q = MovingQuadratic::new(vec![1.0, 2.0], vec![2.0, 2.0], vec![0.5, -0.5]);
    let grid = tvopt::SamplingGrid::new(0.05, 100).unwrap();
    let cfg = SolverConfig::new(0.4, 0.4, PredictionSteps::Finite(2), 2);

    let boxed = FeasibleSet::uniform_box(2, -1.0, 1.0).unwrap();
    let run = run_cfopc(&q, &boxed, &grid, &cfg, &[0.0, 0.0]).unwrap();
    for x in &run.iterates {
        assert!(boxed.contains(x, 0.0), "box membership is exact");
    }

    let ball = FeasibleSet::ball(vec![0.0, 0.0], 1.5).unwrap();
    let run = run_cfopc(&q, &ball, &grid, &cfg, &[0.0, 0.0]).unwrap();
    for x in &run.iterates {
        assert!(ball.contains(x, 1e-12));
    }
}

#[test]
fn constrained_prediction_beats_the_running_baseline() {
    // one prediction step lowers the asymptotic band relative to no
    // prediction, everything else equal
    use tvopt::harness::{asymptotic_error, evaluate_run, KBarPolicy};
    let (problem, set, _) = ScalarScenario::<f64>::default().build();
    let grid = tvopt::SamplingGrid::new(0.1, 400).unwrap();
    let mut bands = Vec::new();
    for steps in [0usize, 1] {
        let cfg = SolverConfig::new(0.56, 0.56, PredictionSteps::Finite(steps), 3);
        let mut run = run_cfopc(&problem, &set, &grid, &cfg, &[0.0]).unwrap();
        evaluate_run(&problem, &set, &mut run, None).unwrap();
        bands.push(asymptotic_error(&run, KBarPolicy::DeskScale.resolve(400)));
    }
    assert!(
        bands[1] < bands[0],
        "P=1 band {} vs P=0 band {}",
        bands[1],
        bands[0]
    );
}

#[test]
fn iso_residual_exact_prediction_fixes_a_static_optimum() {
    // time-invariant problem started at the optimum: the iso-residual
    // exact prediction has nothing to do (zero drift, gradient ignored)
    let q = MovingQuadratic::fixed(vec![2.0_f64, 1.0], vec![0.25, -0.75]);
    let grid = tvopt::SamplingGrid::new(0.1, 25).unwrap();
    let cfg = SolverConfig::new(0.3, 0.3, PredictionSteps::Exact, 0).with_suboptimality_factor(0.0);
    let run = run_ufopc(&q, &grid, &cfg, &[0.25, -0.75]).unwrap();
    for x in &run.iterates {
        assert_eq!(x, &vec![0.25, -0.75]);
    }
}

#[test]
fn solver_loop_runs_in_single_precision() {
    let (problem, _, _) = ScalarScenario::<f32>::default().build();
    let grid = tvopt::SamplingGrid::<f32>::new(0.1, 100).unwrap();
    let cfg = SolverConfig::<f32>::new(0.56, 0.56, PredictionSteps::Finite(1), 3)
        .with_suboptimality_factor(0.0);
    let run = run_ufopc(&problem, &grid, &cfg, &[0.0f32]).unwrap();
    assert!(!run.diverged());
    // tracks the target loosely: stays within the oscillation range
    assert!(run.final_iterate()[0].abs() < 2.0);

    let set = tvopt::FeasibleSet::<f32>::whole_space(1);
    let x = tvopt::harness::oracle_optimizer(&problem, &set, 0.0f32, &[0.0f32], None).unwrap();
    assert!((x[0] - (-0.3004)).abs() < 1e-3);
}

/// Wrapper recording every evaluation point, used to assert the
/// prediction loop freezes its linearization.
struct Spy<'a> {
    inner: &'a dyn TimeVaryingProblem<f64>,
    calls: Mutex<Vec<(Vec<f64>, f64)>>,
}

impl TimeVaryingProblem<f64> for Spy<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn value(&self, x: &[f64], t: f64) -> f64 {
        self.calls.lock().unwrap().push((x.to_vec(), t));
        self.inner.value(x, t)
    }
    fn gradient(&self, x: &[f64], t: f64) -> Vec<f64> {
        self.calls.lock().unwrap().push((x.to_vec(), t));
        self.inner.gradient(x, t)
    }
    fn hessian_vec(&self, x: &[f64], t: f64, v: &[f64]) -> Vec<f64> {
        self.calls.lock().unwrap().push((x.to_vec(), t));
        self.inner.hessian_vec(x, t, v)
    }
    fn mixed_derivative(&self, x: &[f64], t: f64) -> Option<Vec<f64>> {
        self.calls.lock().unwrap().push((x.to_vec(), t));
        self.inner.mixed_derivative(x, t)
    }
    fn constants(&self) -> SmoothnessConstants<f64> {
        self.inner.constants()
    }
}

#[test]
fn prediction_only_evaluates_at_the_frozen_point() {
    let (problem, set, _) = ScalarScenario::<f64>::default().build();
    let base = vec![0.37];
    let t = 1.3;
    let state = PredictionState::at(
        &problem,
        &base,
        t,
        0.1,
        tvopt::solver::DerivativeMode::Analytic,
        None,
    )
    .unwrap();

    let spy = Spy {
        inner: &problem,
        calls: Mutex::new(Vec::new()),
    };
    predict_constrained(&spy, &set, &state, 0.56, 7).unwrap();
    tvopt::solver::predict_exact(&spy, &set, &state, 1.0, 1e-11, 10_000).unwrap();
    let calls = spy.calls.lock().unwrap();
    assert!(!calls.is_empty());
    for (x, time) in calls.iter() {
        assert_eq!(x, &base, "inner loop strayed from the base point");
        assert_eq!(*time, t, "inner loop strayed from the sampling instant");
    }
}
