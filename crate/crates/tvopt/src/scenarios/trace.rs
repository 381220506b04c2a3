use std::fs;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::scalar::{lit, Scalar};

use super::ScenarioError;

/// Aggregate-load and setpoint time series on a fixed-period grid,
/// in kW.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadTrace<S: Scalar> {
    /// Sampling period in seconds.
    pub period: S,
    /// Time of the first sample in seconds.
    pub origin: S,
    /// Non-controllable aggregate load `a(t_k)`.
    pub aggregate: Vec<S>,
    /// Aggregate-power setpoint `p0_set(t_k)`, a smoothed version of
    /// the load.
    pub setpoint: Vec<S>,
}

impl<S: Scalar> LoadTrace<S> {
    pub fn len(&self) -> usize {
        self.aggregate.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aggregate.is_empty()
    }

    pub fn time_at(&self, k: usize) -> S {
        self.origin + crate::scalar::from_usize::<S>(k) * self.period
    }
}

/// Period of the synthetic slow oscillation in seconds.
const OSCILLATION_PERIOD_S: f64 = 600.0;
/// Autocorrelation of the AR(1) noise between consecutive samples.
const AR1_COEFFICIENT: f64 = 0.9;
/// Time constant of the setpoint low-pass in seconds.
const SETPOINT_SMOOTHING_S: f64 = 120.0;

/// Synthesizes a load trace: base level plus a slow sinusoid plus
/// seeded AR(1) noise (`noise_kw` is the innovation standard
/// deviation, started from the stationary distribution). The setpoint
/// series is a first-order low-pass of the load, giving the tracking
/// problem a smoother target than the raw aggregate.
pub fn generate_load_trace<S: Scalar>(
    seed: u64,
    steps: usize,
    period_s: f64,
    base_kw: f64,
    daily_amplitude_kw: f64,
    noise_kw: f64,
) -> LoadTrace<S> {
    assert!(steps >= 1, "need at least one sample");
    assert!(period_s > 0.0, "period must be positive");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0f64, 1.0).unwrap();

    let stationary_std = if noise_kw > 0.0 {
        noise_kw / (1.0 - AR1_COEFFICIENT * AR1_COEFFICIENT).sqrt()
    } else {
        0.0
    };
    let mut ar = stationary_std * std_normal.sample(&mut rng);

    let mut aggregate = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = k as f64 * period_s;
        let sinusoid =
            daily_amplitude_kw * (2.0 * std::f64::consts::PI * t / OSCILLATION_PERIOD_S).sin();
        aggregate.push(base_kw + sinusoid + ar);
        ar = AR1_COEFFICIENT * ar + noise_kw * std_normal.sample(&mut rng);
    }

    let lambda = period_s / (period_s + SETPOINT_SMOOTHING_S);
    let mut setpoint = Vec::with_capacity(steps);
    let mut smoothed = aggregate[0];
    for &a in &aggregate {
        smoothed += lambda * (a - smoothed);
        setpoint.push(smoothed);
    }

    LoadTrace {
        period: lit(period_s),
        origin: S::zero(),
        aggregate: aggregate.into_iter().map(lit).collect(),
        setpoint: setpoint.into_iter().map(lit).collect(),
    }
}

const CSV_HEADER: &str = "t_seconds,load_kW,setpoint_kW";

/// Full-roundtrip decimal rendering (17 significant digits), shared by
/// every CSV emitter so downstream fits are bit-reproducible.
pub fn full_precision<S: Scalar>(v: S) -> String {
    format!("{:.16e}", v.to_f64().expect("scalar convertible to f64"))
}

/// Writes a trace in the `t_seconds,load_kW,setpoint_kW` schema
/// (UTF-8, LF line endings).
pub fn save_trace_csv<S: Scalar>(trace: &LoadTrace<S>, path: &Path) -> Result<(), ScenarioError> {
    let io_err = |source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for k in 0..trace.len() {
        out.push_str(&full_precision(trace.time_at(k)));
        out.push(',');
        out.push_str(&full_precision(trace.aggregate[k]));
        out.push(',');
        out.push_str(&full_precision(trace.setpoint[k]));
        out.push('\n');
    }
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(out.as_bytes()).map_err(io_err)
}

/// Parses a trace CSV, validating the header, the field count and
/// types per row, and that timestamps advance monotonically on the
/// fixed period inferred from the first two rows. Errors carry the
/// 1-based line number.
pub fn load_trace_csv<S: Scalar>(path: &Path) -> Result<LoadTrace<S>, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let csv_err = |line: usize, message: String| ScenarioError::Csv {
        path: path.display().to_string(),
        line,
        message,
    };

    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| csv_err(1, "empty file".into()))?;
    if header.trim_end() != CSV_HEADER {
        return Err(csv_err(
            1,
            format!("expected header `{CSV_HEADER}`, got `{header}`"),
        ));
    }

    let mut times = Vec::new();
    let mut aggregate = Vec::new();
    let mut setpoint = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(csv_err(
                line_no,
                format!("expected 3 fields, got {}", fields.len()),
            ));
        }
        let mut parsed = [0.0f64; 3];
        for (slot, field) in parsed.iter_mut().zip(&fields) {
            *slot = field
                .trim()
                .parse::<f64>()
                .map_err(|_| csv_err(line_no, format!("non-numeric field `{field}`")))?;
        }
        times.push(parsed[0]);
        aggregate.push(parsed[1]);
        setpoint.push(parsed[2]);
    }

    if times.len() < 2 {
        return Err(csv_err(
            times.len() + 1,
            "need at least two data rows to infer the period".into(),
        ));
    }
    let origin = times[0];
    let period = times[1] - times[0];
    if period <= 0.0 {
        return Err(csv_err(3, "timestamps must be strictly increasing".into()));
    }
    for (k, &t) in times.iter().enumerate() {
        let expected = origin + k as f64 * period;
        let tol = 1e-9 * expected.abs().max(1.0);
        if (t - expected).abs() > tol {
            return Err(csv_err(
                k + 2,
                format!("non-uniform period: expected t = {expected}, got {t}"),
            ));
        }
    }

    Ok(LoadTrace {
        period: lit(period),
        origin: lit(origin),
        aggregate: aggregate.into_iter().map(lit).collect(),
        setpoint: setpoint.into_iter().map(lit).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_flat_trace_is_constant() {
        let trace = generate_load_trace::<f64>(1, 64, 1.0, 500.0, 0.0, 0.0);
        assert!(trace.aggregate.iter().all(|&a| a == 500.0));
        assert!(trace.setpoint.iter().all(|&s| s == 500.0));
    }

    #[test]
    fn same_seed_gives_identical_traces() {
        let a = generate_load_trace::<f64>(42, 256, 1.0, 500.0, 100.0, 5.0);
        let b = generate_load_trace::<f64>(42, 256, 1.0, 500.0, 100.0, 5.0);
        assert_eq!(a, b);
    }

    #[test]
    fn increment_spread_matches_the_ar1_closed_form() {
        // stationary AR(1) with autocorrelation r and innovation std s:
        // std(z_{k+1} - z_k) = s * sqrt(2 / (1 + r))
        let noise = 5.0;
        let trace = generate_load_trace::<f64>(7, 3000, 1.0, 0.0, 0.0, noise);
        let increments: Vec<f64> = trace.aggregate.windows(2).map(|w| w[1] - w[0]).collect();
        let mean = increments.iter().sum::<f64>() / increments.len() as f64;
        let var = increments.iter().map(|d| (d - mean).powi(2)).sum::<f64>()
            / (increments.len() - 1) as f64;
        let expected = noise * (2.0 / (1.0 + AR1_COEFFICIENT)).sqrt();
        let measured = var.sqrt();
        assert!(
            (measured - expected).abs() / expected < 0.2,
            "measured {measured}, closed form {expected}"
        );
    }

    #[test]
    fn csv_roundtrip_is_lossless() {
        let dir = std::env::temp_dir().join("tvopt-trace-roundtrip");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("trace.csv");
        let trace = generate_load_trace::<f64>(3, 128, 1.0, 480.0, 120.0, 4.0);
        save_trace_csv(&trace, &path).unwrap();
        let loaded = load_trace_csv::<f64>(&path).unwrap();
        assert_eq!(loaded.len(), trace.len());
        for k in 0..trace.len() {
            assert!((loaded.aggregate[k] - trace.aggregate[k]).abs() < 1e-9);
            assert!((loaded.setpoint[k] - trace.setpoint[k]).abs() < 1e-9);
        }
        fs::remove_file(&path).unwrap();
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let dir = std::env::temp_dir().join("tvopt-trace-errors");
        fs::create_dir_all(&dir).unwrap();

        let path = dir.join("bad_field.csv");
        fs::write(
            &path,
            "t_seconds,load_kW,setpoint_kW\n0.0,1.0,1.0\n1.0,oops,1.0\n",
        )
        .unwrap();
        let err = load_trace_csv::<f64>(&path).unwrap_err();
        match err {
            ScenarioError::Csv { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("non-numeric"));
            }
            other => panic!("unexpected error {other}"),
        }

        let path = dir.join("bad_period.csv");
        fs::write(
            &path,
            "t_seconds,load_kW,setpoint_kW\n0.0,1.0,1.0\n1.0,1.0,1.0\n2.5,1.0,1.0\n",
        )
        .unwrap();
        let err = load_trace_csv::<f64>(&path).unwrap_err();
        match err {
            ScenarioError::Csv { line, message, .. } => {
                assert_eq!(line, 4);
                assert!(message.contains("non-uniform"));
            }
            other => panic!("unexpected error {other}"),
        }

        let path = dir.join("two_rows.csv");
        fs::write(
            &path,
            "t_seconds,load_kW,setpoint_kW\n0.0,1.0,1.0\n1.0,2.0,2.0\n",
        )
        .unwrap();
        let trace = load_trace_csv::<f64>(&path).unwrap();
        assert_eq!(trace.len(), 2);
    }
}
