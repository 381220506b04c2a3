//! Ready-made benchmark problems: the scalar periodic tracking problem,
//! the box-constrained vector problem, the DER dispatch problem with
//! synthetic load traces, and a drifting quadratic used as an exactness
//! baseline.
//!
//! Builders are pure given a seed, and every built problem satisfies
//! the evaluator purity contract, so instances can be shared freely
//! across harness workers.

mod der;
mod quadratic;
mod scalar;
mod trace;
mod vector;

pub use der::{DerProblem, DerScenario};
pub use quadratic::MovingQuadratic;
pub use scalar::{ScalarProblem, ScalarScenario};
pub use trace::{full_precision, generate_load_trace, load_trace_csv, save_trace_csv, LoadTrace};
pub use vector::{VectorProblem, VectorScenario};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario parameter: {0}")]
    InvalidParameter(String),
    #[error("{path}:{line}: {message}")]
    Csv {
        path: String,
        line: usize,
        message: String,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Maximizes `|f|` over `[lo, hi]` by a dense grid scan followed by a
/// golden-section polish around the best cell. Used by the scenario
/// builders to bound derivative expressions numerically over their
/// operating ranges.
pub(crate) fn max_abs_on_interval(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    assert!(hi >= lo);
    if hi == lo {
        return f(lo).abs();
    }
    let g = |x: f64| f(x).abs();
    let cells = 4096usize;
    let width = (hi - lo) / cells as f64;
    let mut best_idx = 0usize;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=cells {
        let v = g(lo + width * i as f64);
        if v > best {
            best = v;
            best_idx = i;
        }
    }
    // golden-section refinement on the bracketing cells
    let mut a = lo + width * best_idx.saturating_sub(1) as f64;
    let mut b = (lo + width * (best_idx + 1) as f64).min(hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    for _ in 0..120 {
        if g(c) > g(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - inv_phi * (b - a);
        d = a + inv_phi * (b - a);
    }
    best.max(g((a + b) / 2.0))
}
