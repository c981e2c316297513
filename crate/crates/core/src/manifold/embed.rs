//! Ambient embeddings: the ellipsoid (`A = √λ`) and the round sphere (`A ≡ c`).
//!
//! With `λ_k = f_k`, `u_i² = s_i Π_k (λ_k − a_i) / Π_{j≠i} (a_j − a_i)` where
//! `s_i = a_i` for the ellipsoid and `s_i = c²` for the sphere. The two factors
//! that vanish on `N_i` are written as `sin(φ_i/2) cos(φ_{i+1}/2)`, which fixes
//! the signs consistently on the covering torus.

use super::profile::ProfileSpec;
use super::Manifold;
use crate::error::{Error, Result};

/// Ellipsoid embedding; rejects every other profile.
pub fn embed_ellipsoid(m: &Manifold, phi: &[f64]) -> Result<Vec<f64>> {
    if !m.spec.profile.is_sqrt() {
        return Err(Error::WrongProfile);
    }
    embed(m, phi)
}

/// Embedding into `ℝ^{n+1}` for the ellipsoid or the round sphere.
pub fn embed(m: &Manifold, phi: &[f64]) -> Result<Vec<f64>> {
    let a = m.a();
    let n = m.n();
    let scale: Box<dyn Fn(usize) -> f64> = if m.spec.profile.is_sqrt() {
        Box::new(|i| a[i])
    } else if let ProfileSpec::Constant { c } = m.spec.profile.spec() {
        let c2 = c * c;
        Box::new(move |_| c2)
    } else {
        return Err(Error::WrongProfile);
    };
    let f: Vec<f64> = phi.iter().zip(&m.charts).map(|(&p, c)| c.f(p)).collect();
    let mut u = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut mag = scale(i);
        let mut trig = 1.0;
        for k in 1..=n {
            if k == i {
                mag *= a[i - 1] - a[i];
                trig *= (0.5 * phi[k - 1]).sin();
            } else if k == i + 1 {
                mag *= a[i] - a[i + 1];
                trig *= (0.5 * phi[k - 1]).cos();
            } else {
                mag *= (f[k - 1] - a[i]).abs();
            }
        }
        for (j, aj) in a.iter().enumerate() {
            if j != i {
                mag /= (aj - a[i]).abs();
            }
        }
        u.push(mag.sqrt() * trig);
    }
    Ok(u)
}

/// Recover `λ_1 > … > λ_n` from an ambient point by bracketing the roots of
/// `Σ u_i²/(a_i − λ) = rhs` (1 on the ellipsoid, 0 on the sphere) in each `[a_k, a_{k−1}]`.
pub fn elliptic_coordinates(a: &[f64], u: &[f64], ellipsoid: bool) -> Vec<f64> {
    let rhs = if ellipsoid { 1.0 } else { 0.0 };
    let n = a.len() - 1;
    let r = |lam: f64| -> f64 { u.iter().zip(a).map(|(ui, ai)| ui * ui / (ai - lam)).sum::<f64>() - rhs };
    (1..=n)
        .map(|k| {
            // r increases from −∞ (just above a_k) to +∞ (just below a_{k−1}) unless a weight vanishes.
            let (mut lo, mut hi) = (a[k], a[k - 1]);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let v = r(mid);
                if v.is_nan() || v > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}
