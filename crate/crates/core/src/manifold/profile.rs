//! The profile function `A(λ)` and its derivatives.

use serde::{Deserialize, Serialize};

use super::spline::CubicSpline;
use crate::dual::Scalar;
use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

/// Serialized description of `A(λ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// `A ≡ c`; the round-sphere reference case.
    Constant {
        #[serde(default = "one")]
        c: f64,
    },
    /// `A = √λ`; the ellipsoid.
    Sqrt,
    /// `A = Σ coefficients[k] λ^k`.
    Polynomial { coefficients: Vec<f64> },
    /// `A = coefficient · λ^exponent`.
    Power {
        #[serde(default = "one")]
        coefficient: f64,
        exponent: f64,
    },
    /// Natural cubic spline through `(lambda[k], values[k])`.
    Tabulated { lambda: Vec<f64>, values: Vec<f64> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ProfileSpec", into = "ProfileSpec")]
pub struct AProfile {
    spec: ProfileSpec,
    spline: Option<CubicSpline>,
}

impl PartialEq for AProfile {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl TryFrom<ProfileSpec> for AProfile {
    type Error = Error;
    fn try_from(spec: ProfileSpec) -> Result<Self> {
        AProfile::new(spec)
    }
}

impl From<AProfile> for ProfileSpec {
    fn from(p: AProfile) -> Self {
        p.spec
    }
}

impl AProfile {
    pub fn new(spec: ProfileSpec) -> Result<Self> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let spline = match &spec {
            ProfileSpec::Constant { c } if !c.is_finite() => {
                return Err(Error::InvalidProfile("constant must be finite".into()))
            }
            ProfileSpec::Polynomial { coefficients } if coefficients.is_empty() || !finite(coefficients) => {
                return Err(Error::InvalidProfile("polynomial needs finite coefficients".into()))
            }
            ProfileSpec::Power { coefficient, exponent } if !coefficient.is_finite() || !exponent.is_finite() => {
                return Err(Error::InvalidProfile("power profile needs finite parameters".into()))
            }
            ProfileSpec::Tabulated { lambda, values } => {
                if !finite(lambda) || !finite(values) {
                    return Err(Error::InvalidProfile("tabulated values must be finite".into()));
                }
                Some(CubicSpline::new(lambda, values)?)
            }
            _ => None,
        };
        Ok(AProfile { spec, spline })
    }

    pub fn sqrt() -> Self {
        AProfile::new(ProfileSpec::Sqrt).unwrap()
    }

    pub fn constant(c: f64) -> Self {
        AProfile::new(ProfileSpec::Constant { c }).unwrap()
    }

    pub fn spec(&self) -> &ProfileSpec {
        &self.spec
    }

    pub fn is_sqrt(&self) -> bool {
        matches!(self.spec, ProfileSpec::Sqrt)
            || matches!(self.spec, ProfileSpec::Power { coefficient, exponent } if coefficient == 1.0 && exponent == 0.5)
    }

    pub fn is_constant(&self) -> bool {
        match &self.spec {
            ProfileSpec::Constant { .. } => true,
            ProfileSpec::Polynomial { coefficients } => coefficients.iter().skip(1).all(|&c| c == 0.0),
            ProfileSpec::Power { exponent, .. } => *exponent == 0.0,
            _ => false,
        }
    }

    /// Highest derivative order that is evaluated exactly (`None` = unbounded).
    pub fn exact_order(&self) -> Option<usize> {
        match self.spec {
            ProfileSpec::Tabulated { .. } => Some(2),
            _ => None,
        }
    }

    /// Interval on which the profile is defined, if restricted.
    pub fn domain(&self) -> Option<(f64, f64)> {
        self.spline.as_ref().map(|s| s.domain())
    }

    /// `A^{(k)}(λ)`.
    pub fn deriv(&self, k: usize, lam: f64) -> f64 {
        match &self.spec {
            ProfileSpec::Constant { c } => {
                if k == 0 {
                    *c
                } else {
                    0.0
                }
            }
            ProfileSpec::Sqrt => match k {
                0 => lam.sqrt(),
                1 => 0.5 / lam.sqrt(),
                2 => -0.25 / (lam * lam.sqrt()),
                _ => power_deriv(1.0, 0.5, k, lam),
            },
            ProfileSpec::Power { coefficient, exponent } => power_deriv(*coefficient, *exponent, k, lam),
            ProfileSpec::Polynomial { coefficients } => coefficients
                .iter()
                .enumerate()
                .skip(k)
                .map(|(m, &c)| {
                    let falling: f64 = ((m - k + 1)..=m).map(|v| v as f64).product();
                    c * falling * lam.powi((m - k) as i32)
                })
                .sum(),
            ProfileSpec::Tabulated { .. } => self.spline.as_ref().unwrap().eval(lam, k),
        }
    }

    pub fn value(&self, lam: f64) -> f64 {
        self.deriv(0, lam)
    }

    /// `A` applied to a (possibly dual) argument.
    #[inline]
    pub fn eval<T: Scalar>(&self, lam: T) -> T {
        let x = lam.re();
        lam.lift(self.deriv(0, x), self.deriv(1, x))
    }

    /// `A'` applied to a (possibly dual) argument.
    #[inline]
    pub fn eval_d1<T: Scalar>(&self, lam: T) -> T {
        let x = lam.re();
        lam.lift(self.deriv(1, x), self.deriv(2, x))
    }

    /// `Ã^{(k)}(λ)` with `Ã(λ) = (λ − a_n) A(λ)`.
    pub fn tilde_deriv(&self, k: usize, an: f64, lam: f64) -> f64 {
        let base = (lam - an) * self.deriv(k, lam);
        if k == 0 {
            base
        } else {
            base + k as f64 * self.deriv(k - 1, lam)
        }
    }
}

fn power_deriv(c: f64, p: f64, k: usize, lam: f64) -> f64 {
    let falling: f64 = (0..k).map(|j| p - j as f64).product();
    c * falling * lam.powf(p - k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(p: &AProfile, k: usize, x: f64) -> f64 {
        let h = 1e-4;
        (p.deriv(k - 1, x + h) - p.deriv(k - 1, x - h)) / (2.0 * h)
    }

    #[test]
    fn derivatives_agree_with_differences() {
        let profiles = [
            AProfile::sqrt(),
            AProfile::new(ProfileSpec::Polynomial { coefficients: vec![0.5, -0.2, 0.3, 0.1] }).unwrap(),
            AProfile::new(ProfileSpec::Power { coefficient: 2.0, exponent: -1.0 }).unwrap(),
        ];
        for p in &profiles {
            for k in 1..=4 {
                let x = 1.7;
                let rel = (p.deriv(k, x) - fd(p, k, x)).abs() / (1.0 + p.deriv(k, x).abs());
                assert!(rel < 1e-6, "{:?} k={k}", p.spec());
            }
        }
    }

    #[test]
    fn parses_tagged_json() {
        let p: AProfile = serde_json::from_str(r#"{"kind":"sqrt"}"#).unwrap();
        assert!(p.is_sqrt());
        let c: AProfile = serde_json::from_str(r#"{"kind":"constant"}"#).unwrap();
        assert_eq!(c.value(2.0), 1.0);
        assert!(serde_json::from_str::<AProfile>(r#"{"kind":"tabulated","lambda":[1,2],"values":[1,2]}"#).is_err());
    }
}
