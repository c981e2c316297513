//! Spectrum + profile validation and the sign-condition report.

use serde::{Deserialize, Serialize};

use super::profile::{AProfile, ProfileSpec};
use crate::error::{Error, Result};

/// Number of uniformly spaced λ samples used by the sign checks.
pub const CONDITION_SAMPLES: usize = 2001;

/// One row of the sign table: the sampled minimum of a signed derivative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignCheck {
    /// `"tilde"` for `(−1)^k Ã^{(k)}`, `"profile"` for `(−1)^{k+1} A^{(k)}`.
    pub family: String,
    pub order: usize,
    pub min_value: f64,
    pub at_lambda: f64,
    /// Finite-difference estimate of the same signed quantity at `at_lambda`.
    pub fd_value: f64,
    /// False when the order exceeds what the profile evaluates exactly.
    pub exact: bool,
    pub positive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub samples: usize,
    pub checks: Vec<SignCheck>,
    pub passes: bool,
    /// Constant profile: every `Ã^{(k)}` with `k ≥ 2` vanishes identically.
    pub round_sphere: bool,
    pub warnings: Vec<String>,
}

impl ConditionReport {
    /// Strict pass, or the constant-profile warning mode.
    pub fn accepted(&self) -> bool {
        self.passes || self.round_sphere
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub a: Vec<f64>,
    pub profile: AProfile,
    pub condition: ConditionReport,
}

impl ManifoldSpec {
    pub fn n(&self) -> usize {
        self.a.len() - 1
    }

    pub fn width(&self) -> f64 {
        self.a[0] - self.a[self.n()]
    }
}

/// Manifold description as read from a TOML or JSON file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldConfig {
    pub a: Vec<f64>,
    pub profile: ProfileSpec,
    /// Optional base point given as fractions `s_i ∈ (0,1)` with `f_i = a_i + s_i (a_{i−1} − a_i)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_point: Option<Vec<f64>>,
}

impl ManifoldConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    /// Dispatch on the file extension; anything but `.toml` is read as JSON.
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Self::from_toml_str(&text),
            _ => Self::from_json_str(&text),
        }
    }

    /// Validate; a violated condition still yields the spec inside the error.
    pub fn validate(&self) -> Result<ManifoldSpec> {
        let profile = AProfile::new(self.profile.clone())?;
        validate_spec(&self.a, profile)
    }
}

/// Check the spectrum, positivity of `A`, and the sign conditions.
pub fn validate_spec(a: &[f64], profile: AProfile) -> Result<ManifoldSpec> {
    let spec = inspect_spec(a, profile)?;
    if spec.condition.accepted() {
        Ok(spec)
    } else {
        Err(Error::ConditionViolated(Box::new(spec)))
    }
}

/// Like [`validate_spec`] but returns the spec even when the condition fails.
pub fn inspect_spec(a: &[f64], profile: AProfile) -> Result<ManifoldSpec> {
    let n_plus = a.len();
    if n_plus < 3
        || a.iter().any(|v| !v.is_finite())
        || a.windows(2).any(|w| !(w[0] > w[1]))
        || !(a[n_plus - 1] > 0.0)
    {
        return Err(Error::NonMonotoneSpectrum(a.to_vec()));
    }
    let n = n_plus - 1;
    let (lo, hi) = (a[n], a[0]);
    if let Some((d0, d1)) = profile.domain() {
        if d0 > lo || d1 < hi {
            return Err(Error::InvalidProfile(format!(
                "tabulated domain [{d0}, {d1}] does not cover [{lo}, {hi}]"
            )));
        }
    }
    let grid: Vec<f64> = (0..CONDITION_SAMPLES)
        .map(|k| lo + (hi - lo) * k as f64 / (CONDITION_SAMPLES - 1) as f64)
        .collect();
    for &lam in &grid {
        let v = profile.value(lam);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositiveProfile { lambda: lam });
        }
    }

    let exact_limit = profile.exact_order().unwrap_or(usize::MAX);
    let fd_step = 1e-4 * (hi - lo);
    let mut checks = Vec::new();
    let mut push = |family: &str, order: usize, signed: &dyn Fn(usize, f64) -> f64| {
        let (mut min_value, mut at_lambda) = (f64::INFINITY, lo);
        for &lam in &grid {
            let v = signed(order, lam);
            if v < min_value {
                min_value = v;
                at_lambda = lam;
            }
        }
        // Derivative of the order-(k−1) quantity, stepping inward at the ends.
        let c = at_lambda.clamp(lo + fd_step, hi - fd_step);
        let fd_value = -(signed(order - 1, c + fd_step) - signed(order - 1, c - fd_step)) / (2.0 * fd_step);
        checks.push(SignCheck {
            family: family.to_string(),
            order,
            min_value,
            at_lambda,
            fd_value,
            exact: order <= exact_limit,
            positive: min_value > 0.0,
        });
    };
    let an = a[n];
    let tilde = |k: usize, lam: f64| sign(k) * profile.tilde_deriv(k, an, lam);
    for k in 2..=n {
        push("tilde", k, &tilde);
    }
    let prof = |k: usize, lam: f64| -sign(k) * profile.deriv(k, lam);
    for k in 1..n {
        push("profile", k, &prof);
    }

    let passes = checks.iter().all(|c| c.positive && c.exact);
    let round_sphere = profile.is_constant();
    let mut warnings = Vec::new();
    if round_sphere {
        warnings.push("constant profile: round-sphere mode, strict sign conditions vacuous".to_string());
    }
    if checks.iter().any(|c| !c.exact) {
        warnings.push("tabulated profile: orders above 2 are not evaluated exactly".to_string());
    }
    Ok(ManifoldSpec {
        a: a.to_vec(),
        profile,
        condition: ConditionReport { samples: CONDITION_SAMPLES, checks, passes, round_sphere, warnings },
    })
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
