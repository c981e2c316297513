//! Dense real polynomials in ascending-coefficient form and a real-root solver
//! for the spectral polynomial.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly {
    /// `coef[k]` multiplies `λ^k`.
    pub coef: Vec<f64>,
}

impl Poly {
    pub fn new(coef: Vec<f64>) -> Self {
        let mut p = Poly { coef };
        p.trim();
        p
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    pub fn monomial(m: usize) -> Self {
        let mut coef = vec![0.0; m + 1];
        coef[m] = 1.0;
        Poly { coef }
    }

    /// `∏ (λ − r)`.
    pub fn from_roots(roots: &[f64]) -> Self {
        let mut p = Poly::constant(1.0);
        for &r in roots {
            p = p.mul(&Poly::new(vec![-r, 1.0]));
        }
        p
    }

    fn trim(&mut self) {
        while self.coef.len() > 1 && *self.coef.last().unwrap() == 0.0 {
            self.coef.pop();
        }
        if self.coef.is_empty() {
            self.coef.push(0.0);
        }
    }

    pub fn degree(&self) -> usize {
        self.coef.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn deriv(&self) -> Poly {
        if self.coef.len() == 1 {
            return Poly::constant(0.0);
        }
        Poly::new(
            self.coef
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut c = vec![0.0; self.coef.len() + o.coef.len() - 1];
        for (i, &x) in self.coef.iter().enumerate() {
            for (j, &y) in o.coef.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        Poly::new(c)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let len = self.coef.len().max(o.coef.len());
        let c = (0..len)
            .map(|k| self.coef.get(k).copied().unwrap_or(0.0) + o.coef.get(k).copied().unwrap_or(0.0))
            .collect();
        Poly::new(c)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coef.iter().map(|c| c * s).collect())
    }

    /// All roots, assumed real, sorted in decreasing order.
    ///
    /// Degrees up to three use closed forms; higher degrees use the companion
    /// matrix. Every root is then polished by a few guarded Newton steps.
    /// `ComplexRoots` is returned when an imaginary part is clearly nonzero.
    pub fn real_roots(&self) -> Result<Vec<f64>> {
        let d = self.degree();
        let lead = self.coef[d];
        let m: Vec<f64> = self.coef.iter().map(|c| c / lead).collect();
        let mut roots = match d {
            0 => vec![],
            1 => vec![-m[0]],
            2 => quadratic(m[1], m[0])?,
            3 => cubic(m[2], m[1], m[0])?,
            _ => companion_roots(&m)?,
        };
        for r in roots.iter_mut() {
            *r = self.polish(*r);
        }
        roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(roots)
    }

    fn polish(&self, mut x: f64) -> f64 {
        let dp = self.deriv();
        for _ in 0..4 {
            let v = self.eval(x);
            let s = dp.eval(x);
            if s == 0.0 || !s.is_finite() {
                break;
            }
            let nx = x - v / s;
            if self.eval(nx).abs() < v.abs() {
                x = nx;
            } else {
                break;
            }
        }
        x
    }
}

const COMPLEX_TOL: f64 = 1e-7;

fn quadratic(b: f64, c: f64) -> Result<Vec<f64>> {
    let disc = b * b - 4.0 * c;
    let scale = b * b + 4.0 * c.abs() + f64::MIN_POSITIVE;
    if disc < -COMPLEX_TOL * scale {
        return Err(Error::ComplexRoots { imag: (-disc).sqrt() / 2.0 });
    }
    let sq = disc.max(0.0).sqrt();
    // Avoid cancellation: take the larger-magnitude root first.
    let q = -0.5 * (b + b.signum() * sq);
    if q == 0.0 {
        return Ok(vec![0.0, 0.0]);
    }
    Ok(vec![q, c / q])
}

fn cubic(a2: f64, a1: f64, a0: f64) -> Result<Vec<f64>> {
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    if p.abs() < 1e-300 {
        let t = -q.cbrt();
        return Ok(vec![t - shift; 3]);
    }
    if p > 0.0 {
        return Err(Error::ComplexRoots { imag: p.sqrt() });
    }
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = 3.0 * q / (p * m);
    if arg.abs() > 1.0 + COMPLEX_TOL {
        return Err(Error::ComplexRoots { imag: (arg.abs() - 1.0).sqrt() * m });
    }
    let theta = arg.clamp(-1.0, 1.0).acos() / 3.0;
    Ok((0..3)
        .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - shift)
        .collect())
}

fn companion_roots(monic: &[f64]) -> Result<Vec<f64>> {
    let d = monic.len() - 1;
    let mut c = DMatrix::<f64>::zeros(d, d);
    for i in 1..d {
        c[(i, i - 1)] = 1.0;
    }
    for i in 0..d {
        c[(i, d - 1)] = -monic[i];
    }
    let ev = c.complex_eigenvalues();
    let scale = monic.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
    let mut out = Vec::with_capacity(d);
    for z in ev.iter() {
        if z.im.abs() > 1e-5 * scale {
            return Err(Error::ComplexRoots { imag: z.im.abs() });
        }
        out.push(z.re);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_recover_construction() {
        for roots in [
            vec![2.5],
            vec![2.5, 1.25],
            vec![3.5, 2.25, 1.5],
            vec![4.5, 3.5, 2.5, 1.5],
            vec![5.0, 4.0, 3.0, 2.0, 1.5],
        ] {
            let p = Poly::from_roots(&roots).scale(-1.0);
            let got = p.real_roots().unwrap();
            for (a, b) in got.iter().zip(&roots) {
                assert!((a - b).abs() < 1e-10, "{got:?} vs {roots:?}");
            }
        }
    }

    #[test]
    fn double_root_is_tolerated() {
        let p = Poly::from_roots(&[2.0, 2.0, 1.0]);
        let r = p.real_roots().unwrap();
        assert!((r[0] - 2.0).abs() < 1e-6 && (r[1] - 2.0).abs() < 1e-6);
        assert!((r[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complex_pair_is_rejected() {
        let p = Poly::new(vec![1.0, 0.0, 1.0]);
        assert!(matches!(p.real_roots(), Err(Error::ComplexRoots { .. })));
    }
}
