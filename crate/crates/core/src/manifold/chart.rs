//! Angular chart for one coordinate `f_i`.
//!
//! With `f = a_i + w sin²(φ/2)`, `w = a_{i−1} − a_i`, the inverse-square-root
//! endpoints of `x(f)` disappear and `dx/dφ = h(φ) = A(f) / (2√Q(f))` is a
//! smooth, even, 2π-periodic function. Its cosine series gives `x(φ)` and the
//! period `α = 4π h̄` to spectral accuracy.

use std::f64::consts::PI;

use crate::dual::Scalar;
use crate::error::{Error, Result};

use super::profile::AProfile;

const COEF_TOL: f64 = 1e-15;
const MAX_SAMPLES: usize = 1 << 14;

#[derive(Clone, Debug)]
pub struct Chart {
    /// 1-based coordinate index.
    pub i: usize,
    /// `a_i`, lower end of the range of `f_i`.
    pub lo: f64,
    /// `a_{i−1}`, upper end.
    pub hi: f64,
    /// `a_j` for `j ≥ i+1` (below the range).
    below: Vec<f64>,
    /// `a_j` for `j ≤ i−2` (above the range).
    above: Vec<f64>,
    profile: AProfile,
    /// Mean of `h`.
    pub hbar: f64,
    /// `ĥ_k` for `k ≥ 1` in `h = h̄ + Σ ĥ_k cos kφ`.
    coef: Vec<f64>,
    pub alpha: f64,
}

impl Chart {
    pub fn new(a: &[f64], i: usize, profile: &AProfile) -> Result<Self> {
        let lo = a[i];
        let hi = a[i - 1];
        let mut c = Chart {
            i,
            lo,
            hi,
            below: a[i + 1..].to_vec(),
            above: a[..i - 1].to_vec(),
            profile: profile.clone(),
            hbar: 0.0,
            coef: Vec::new(),
            alpha: 0.0,
        };
        c.fit_series()?;
        Ok(c)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn fit_series(&mut self) -> Result<()> {
        let mut m = 64;
        loop {
            let samples: Vec<f64> = (0..m).map(|k| self.h(2.0 * PI * k as f64 / m as f64)).collect();
            let cos_table: Vec<f64> = (0..m).map(|k| (2.0 * PI * k as f64 / m as f64).cos()).collect();
            let half = m / 2;
            let hbar = samples.iter().sum::<f64>() / m as f64;
            let mut coef = Vec::with_capacity(half);
            for k in 1..half {
                let s: f64 = samples.iter().enumerate().map(|(j, v)| v * cos_table[(k * j) % m]).sum();
                coef.push(2.0 * s / m as f64);
            }
            let tail = coef[half / 2..].iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
            if tail < COEF_TOL * hbar {
                let keep = coef.iter().rposition(|v| v.abs() > 1e-3 * COEF_TOL * hbar).map_or(0, |p| p + 1);
                coef.truncate(keep);
                self.hbar = hbar;
                self.coef = coef;
                self.alpha = 4.0 * PI * hbar;
                return Ok(());
            }
            if m >= MAX_SAMPLES {
                return Err(Error::QuadratureFailure { lo: self.lo, hi: self.hi, err: tail / hbar });
            }
            m *= 2;
        }
    }

    /// `f(φ) = a_i + w sin²(φ/2)`.
    #[inline]
    pub fn f<T: Scalar>(&self, phi: T) -> T {
        let s = (phi * 0.5).sin();
        s * s * self.width() + self.lo
    }

    /// `df/dφ = (w/2) sin φ`.
    #[inline]
    pub fn fp<T: Scalar>(&self, phi: T) -> T {
        phi.sin() * (0.5 * self.width())
    }

    /// `Q(f) = Π_{j ∉ {i−1,i}} |f − a_j|`, positive on the range.
    #[inline]
    pub fn q<T: Scalar>(&self, f: T) -> T {
        let mut q = T::cst(1.0);
        for &aj in &self.below {
            q = q * (f - aj);
        }
        for &aj in &self.above {
            q = q * (-f + aj);
        }
        q
    }

    /// `Σ_{j ∉ {i−1,i}} 1/(f − a_j)`.
    #[inline]
    fn q_log_deriv<T: Scalar>(&self, f: T) -> T {
        let mut s = T::cst(0.0);
        for &aj in self.below.iter().chain(&self.above) {
            s = s + (f - aj).recip();
        }
        s
    }

    /// `h(φ) = dx/dφ`.
    #[inline]
    pub fn h<T: Scalar>(&self, phi: T) -> T {
        let f = self.f(phi);
        self.profile.eval(f) / (self.q(f).sqrt() * 2.0)
    }

    /// `d log h / dφ`.
    #[inline]
    pub fn dlogh<T: Scalar>(&self, phi: T) -> T {
        let f = self.f(phi);
        self.fp(phi) * (self.profile.eval_d1(f) / self.profile.eval(f) - self.q_log_deriv(f) * 0.5)
    }

    /// `(f, df/dφ, h, d log h/dφ)` sharing one profile evaluation.
    #[inline]
    pub fn local<T: Scalar>(&self, phi: T) -> (T, T, T, T) {
        let s = (phi * 0.5).sin();
        let f = s * s * self.width() + self.lo;
        let fp = phi.sin() * (0.5 * self.width());
        let a = self.profile.eval(f);
        let ap = self.profile.eval_d1(f);
        let h = a / (self.q(f).sqrt() * 2.0);
        let dlogh = fp * (ap / a - self.q_log_deriv(f) * 0.5);
        (f, fp, h, dlogh)
    }

    /// `df/dx = (df/dφ) / h`.
    pub fn fprime_x(&self, phi: f64) -> f64 {
        self.fp(phi) / self.h(phi)
    }

    /// `x(φ) = h̄ φ + Σ (ĥ_k / k) sin kφ`; odd, with `x(φ + 2π) = x(φ) + α/2`.
    pub fn x_of_phi(&self, phi: f64) -> f64 {
        let (s1, c1) = phi.sin_cos();
        let (mut s_prev, mut s_cur) = (0.0, s1);
        let mut acc = 0.0;
        for (k, &hk) in self.coef.iter().enumerate() {
            acc += hk * s_cur / (k + 1) as f64;
            let s_next = 2.0 * c1 * s_cur - s_prev;
            s_prev = s_cur;
            s_cur = s_next;
        }
        self.hbar * phi + acc
    }

    /// Inverse of [`Chart::x_of_phi`] by safeguarded Newton iteration.
    pub fn phi_of_x(&self, x: f64) -> f64 {
        let half = 0.5 * self.alpha;
        let q = (x / half).floor();
        let r = x - q * half;
        let (mut a, mut b) = (0.0, 2.0 * PI);
        let mut p = (r / self.hbar).clamp(a, b);
        for _ in 0..100 {
            let g = self.x_of_phi(p) - r;
            if g > 0.0 {
                b = p;
            } else {
                a = p;
            }
            let step = g / self.h(p);
            let mut np = p - step;
            if !(np > a && np < b) {
                np = 0.5 * (a + b);
            }
            if (np - p).abs() < 1e-15 * (1.0 + p.abs()) {
                p = np;
                break;
            }
            p = np;
        }
        2.0 * PI * q + p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_period_values() {
        let a = [3.0, 2.0, 1.0];
        for i in 1..=2 {
            let c = Chart::new(&a, i, &AProfile::sqrt()).unwrap();
            assert!((c.x_of_phi(PI) - c.alpha / 4.0).abs() < 1e-14);
            let x = 0.123 * c.alpha;
            assert!((c.x_of_phi(c.phi_of_x(x)) - x).abs() < 1e-13);
            let x = -1.7 * c.alpha;
            assert!((c.x_of_phi(c.phi_of_x(x)) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_profile_two_dim_periods() {
        // n = 2, A ≡ 1: h = 1/(2√(f − a_2)) for i = 1.
        let a = [3.0, 2.0, 1.0];
        let c = Chart::new(&a, 1, &AProfile::constant(1.0)).unwrap();
        let h0 = c.h(0.0_f64);
        assert!((h0 - 0.5).abs() < 1e-15);
    }
}
