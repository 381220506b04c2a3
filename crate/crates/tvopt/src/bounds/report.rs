use serde_json::{json, Value};

use crate::scalar::Scalar;

/// Certificate regime a report was issued under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Global linear convergence to an `O(h)` error floor.
    GlobalOh,
    /// Local linear convergence to an `O(h^2)` floor inside the
    /// attraction region.
    LocalOh2,
    /// Preconditions of both regimes failed; diagnostics only.
    NoCertificate,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::GlobalOh => "global_oh",
            Regime::LocalOh2 => "local_oh2",
            Regime::NoCertificate => "no_certificate",
        }
    }
}

/// Machine-checkable convergence certificate: every analytical quantity
/// evaluated from the declared constants and solver parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<S: Scalar> {
    /// Per-inner-step contraction factor of the prediction iteration.
    pub rho_p: S,
    /// Per-inner-step contraction factor of the correction iteration.
    pub rho_c: S,
    /// `rho_C^C`, the total per-step correction contraction.
    pub rho_c_pow: S,
    /// Global-regime linear rate.
    pub tau0: S,
    /// User-selected local rate, when provided.
    pub tau: Option<S>,
    /// Certified sampling-period bound (local regime).
    pub h_bar: Option<S>,
    /// Attraction radius (local regime).
    pub r_bar: Option<S>,
    /// First-order Taylor-error bound on the optimal prediction.
    pub delta1: S,
    /// Second-order Taylor-error bound, when the third-order constants
    /// are declared.
    pub delta2: Option<S>,
    /// Error-recursion coefficients of the issued regime.
    pub eta: (S, S, S),
    /// Linear rate of the issued regime's envelope.
    pub rate: S,
    /// Limit of the error envelope as the step count grows.
    pub asymptotic_bound: S,
    pub regime: Regime,
}

fn scalar_value<S: Scalar>(v: S) -> Value {
    let v = v.to_f64().expect("scalar convertible to f64");
    if v.is_infinite() {
        json!(if v > 0.0 { "inf" } else { "-inf" })
    } else {
        json!(v)
    }
}

fn optional_value<S: Scalar>(v: Option<S>) -> Value {
    v.map(scalar_value).unwrap_or(Value::Null)
}

impl<S: Scalar> BoundReport<S> {
    /// JSON rendering with every field; infinities become the string
    /// `"inf"`, absent optionals become `null`.
    pub fn to_json(&self) -> Value {
        json!({
            "rho_p": scalar_value(self.rho_p),
            "rho_c": scalar_value(self.rho_c),
            "rho_c_pow": scalar_value(self.rho_c_pow),
            "tau0": scalar_value(self.tau0),
            "tau": optional_value(self.tau),
            "h_bar": optional_value(self.h_bar),
            "r_bar": optional_value(self.r_bar),
            "delta1": scalar_value(self.delta1),
            "delta2": optional_value(self.delta2),
            "eta0": scalar_value(self.eta.0),
            "eta1": scalar_value(self.eta.1),
            "eta2": scalar_value(self.eta.2),
            "rate": scalar_value(self.rate),
            "asymptotic_bound": scalar_value(self.asymptotic_bound),
            "regime": self.regime.as_str(),
        })
    }
}
