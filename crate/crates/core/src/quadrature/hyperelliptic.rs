//! Integrals `∫ G(λ) w(λ) dλ / √(−Π_k(λ − b_k) Π_k(λ − a_k))` over the oscillation intervals.
//!
//! On `[lo, hi]` put `λ = lo + W sin²(ψ/2)`, `W = hi − lo`. Then
//! `dλ / √((λ − lo)(hi − λ)) = dψ` and the integrand becomes smooth in `ψ ∈ [0, π]`.
//! The distances to the remaining roots are formed from the nearer endpoint so that
//! roots just outside the interval do not lose digits. Numerator factors `λ − b_k`
//! that also occur in the radicand are cancelled to `±√|λ − b_k|`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::gk::{integrate, Estimate, GkOptions};
use crate::error::{Error, Result};
use crate::manifold::AProfile;
use crate::poly::Poly;

/// The polynomial `G`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Numerator {
    Poly(Poly),
    /// `scale · Π (λ − roots[k])`.
    Roots { scale: f64, roots: Vec<f64> },
}

impl Numerator {
    pub fn one() -> Self {
        Numerator::Roots { scale: 1.0, roots: vec![] }
    }

    pub fn monomial(m: usize) -> Self {
        Numerator::Roots { scale: 1.0, roots: vec![0.0; m] }
    }
}

/// Extra factor `w(λ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Weight {
    One,
    /// `A(λ)`.
    A(AProfile),
    /// `Ã(λ) = A(λ)(λ − a_n)`.
    ATilde(AProfile),
}

impl Weight {
    fn eval(&self, lam: f64, an: f64) -> f64 {
        match self {
            Weight::One => 1.0,
            Weight::A(p) => p.value(lam),
            Weight::ATilde(p) => p.value(lam) * (lam - an),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperellipticIntegrand {
    pub numerator: Numerator,
    pub weight: Weight,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Interval index `l ∈ 1..=n`, selecting `[a_l^+, a_{l−1}^−]`.
    pub l: usize,
    /// Multiply by `(−1)^l`.
    pub signed: bool,
}

/// `[a_l^+, a_{l−1}^−]` with `b_0 = +∞`, `b_n = −∞`.
pub fn interval(a: &[f64], b: &[f64], l: usize) -> (f64, f64) {
    let n = a.len() - 1;
    let lo = if l < n { a[l].max(b[l - 1]) } else { a[n] };
    let hi = if l > 1 { a[l - 1].min(b[l - 2]) } else { a[0] };
    (lo, hi)
}

struct Prepared {
    lo: f64,
    hi: f64,
    lo_singular: bool,
    hi_singular: bool,
    /// Radicand roots left after removing one `lo`, one `hi` and the cancelled ones.
    rad: Vec<f64>,
    /// Cancelled roots: contribute `sign(λ − r) √|λ − r|`.
    half: Vec<f64>,
    /// Plain numerator roots.
    num: Vec<f64>,
    scale: f64,
    poly: Option<Poly>,
}

fn take(list: &mut Vec<f64>, v: f64) -> bool {
    if let Some(k) = list.iter().position(|&x| x == v) {
        list.swap_remove(k);
        true
    } else {
        false
    }
}

fn prepare(ig: &HyperellipticIntegrand) -> Result<Option<Prepared>> {
    let (lo, hi) = interval(&ig.a, &ig.b, ig.l);
    if !(hi > lo) {
        return Ok(None);
    }
    let mut rad: Vec<f64> = ig.b.iter().chain(ig.a.iter()).copied().collect();
    let (mut num, scale, poly) = match &ig.numerator {
        Numerator::Roots { scale, roots } => (roots.clone(), *scale, None),
        Numerator::Poly(p) => (vec![], 1.0, Some(p.clone())),
    };
    let mut half = Vec::new();
    num.retain(|&r| {
        if take(&mut rad, r) {
            half.push(r);
            false
        } else {
            true
        }
    });
    let lo_singular = take(&mut rad, lo);
    let hi_singular = take(&mut rad, hi);
    for &r in &rad {
        if r > lo && r < hi {
            return Err(Error::SingularInterior { lo, hi });
        }
        if (r == lo && lo_singular) || (r == hi && hi_singular) {
            // A second copy of an endpoint root: non-integrable.
            return Err(Error::SingularInterior { lo, hi });
        }
    }
    Ok(Some(Prepared { lo, hi, lo_singular, hi_singular, rad, half, num, scale, poly }))
}

impl Prepared {
    /// Integrand in `ψ` (the `dψ` density).
    fn eval(&self, psi: f64, weight: &Weight, an: f64) -> f64 {
        let w = self.hi - self.lo;
        let (s, c) = (0.5 * psi).sin_cos();
        let (s2, c2) = (s * s, c * c);
        let lam = if s2 <= 0.5 { self.lo + w * s2 } else { self.hi - w * c2 };
        let diff = |r: f64| -> f64 {
            if r <= self.lo {
                (self.lo - r) + w * s2
            } else {
                (self.hi - r) - w * c2
            }
        };
        let mut v = self.scale * weight.eval(lam, an);
        if let Some(p) = &self.poly {
            v *= p.eval(lam);
        }
        for &r in &self.num {
            v *= diff(r);
        }
        for &r in &self.half {
            let d = diff(r);
            v *= d.signum() * d.abs().sqrt();
        }
        let mut den = 1.0;
        for &r in &self.rad {
            den *= diff(r).abs();
        }
        v /= den.sqrt();
        if !self.lo_singular {
            v *= w.sqrt() * s;
        }
        if !self.hi_singular {
            v *= w.sqrt() * c;
        }
        v
    }
}

/// `∫_{a_l^+}^{a_{l−1}^−}` of the integrand; 0 on a degenerate interval.
pub fn singular_integral(ig: &HyperellipticIntegrand, opts: &GkOptions) -> Result<Estimate> {
    let Some(p) = prepare(ig)? else {
        return Ok(Estimate::default());
    };
    let an = *ig.a.last().unwrap();
    let sign = if ig.signed && ig.l % 2 == 1 { -1.0 } else { 1.0 };
    let mid = p.eval(0.5 * PI, &Weight::One, an);
    if !mid.is_finite() {
        return Err(Error::QuadratureFailure { lo: p.lo, hi: p.hi, err: f64::INFINITY });
    }
    let est = integrate(|psi| p.eval(psi, &ig.weight, an), 0.0, PI, opts)?;
    Ok(Estimate { value: sign * est.value, error: est.error })
}

/// `Σ_l s_l ∫_{a_l^+}^{a_{l−1}^−}` with per-interval signs `s_l = sign(l)`.
pub fn interval_sum<S: Fn(usize) -> f64>(
    a: &[f64],
    b: &[f64],
    numerator: &Numerator,
    weight: &Weight,
    sign: S,
    opts: &GkOptions,
) -> Result<Estimate> {
    let n = a.len() - 1;
    let mut total = Estimate::default();
    for l in 1..=n {
        let ig = HyperellipticIntegrand {
            numerator: numerator.clone(),
            weight: weight.clone(),
            a: a.to_vec(),
            b: b.to_vec(),
            l,
            signed: false,
        };
        let e = singular_integral(&ig, opts)?;
        let s = sign(l);
        total = total + Estimate { value: s * e.value, error: e.error };
    }
    Ok(total)
}
