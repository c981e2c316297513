//! Forward-mode dual numbers with a fixed number of tangent directions.
//!
//! The geodesic right-hand side is written once, generic over [`Scalar`], and
//! evaluated either on plain `f64` (the flow itself) or on [`Dual<N>`] (the flow
//! together with `N` variational directions).

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Minimal scalar interface used by the generic right-hand sides.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn re(self) -> f64;
    /// Apply a scalar function given its value and derivative at `self.re()`.
    fn lift(self, value: f64, deriv: f64) -> Self;

    fn sqrt(self) -> Self {
        let s = self.re().sqrt();
        self.lift(s, 0.5 / s)
    }
    fn sin(self) -> Self {
        let x = self.re();
        self.lift(x.sin(), x.cos())
    }
    fn cos(self) -> Self {
        let x = self.re();
        self.lift(x.cos(), -x.sin())
    }
    fn recip(self) -> Self {
        let x = self.re();
        self.lift(1.0 / x, -1.0 / (x * x))
    }
    fn abs(self) -> Self {
        if self.re() < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn lift(self, value: f64, _deriv: f64) -> Self {
        value
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn recip(self) -> Self {
        1.0 / self
    }
}

/// Value plus `N` first-order tangent components.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<const N: usize> {
    pub re: f64,
    pub eps: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub fn constant(re: f64) -> Self {
        Dual { re, eps: [0.0; N] }
    }

    /// Independent variable seeded along direction `k`.
    pub fn variable(re: f64, k: usize) -> Self {
        let mut eps = [0.0; N];
        eps[k] = 1.0;
        Dual { re, eps }
    }

    pub fn new(re: f64, eps: [f64; N]) -> Self {
        Dual { re, eps }
    }
}

impl<const N: usize> Scalar for Dual<N> {
    #[inline]
    fn cst(v: f64) -> Self {
        Dual::constant(v)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn lift(self, value: f64, deriv: f64) -> Self {
        let mut eps = self.eps;
        for e in eps.iter_mut() {
            *e *= deriv;
        }
        Dual { re: value, eps }
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, o: Self) -> Self {
        self.re += o.re;
        for k in 0..N {
            self.eps[k] += o.eps[k];
        }
        self
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, o: Self) -> Self {
        self.re -= o.re;
        for k in 0..N {
            self.eps[k] -= o.eps[k];
        }
        self
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut eps = [0.0; N];
        for k in 0..N {
            eps[k] = self.eps[k] * o.re + self.re * o.eps[k];
        }
        Dual { re: self.re * o.re, eps }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.re;
        let q = self.re * inv;
        let mut eps = [0.0; N];
        for k in 0..N {
            eps[k] = (self.eps[k] - q * o.eps[k]) * inv;
        }
        Dual { re: q, eps }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    #[inline]
    fn neg(mut self) -> Self {
        self.re = -self.re;
        for e in self.eps.iter_mut() {
            *e = -*e;
        }
        self
    }
}

impl<const N: usize> Add<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, o: f64) -> Self {
        self.re += o;
        self
    }
}

impl<const N: usize> Sub<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(mut self, o: f64) -> Self {
        self.re -= o;
        self
    }
}

impl<const N: usize> Mul<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(mut self, o: f64) -> Self {
        self.re *= o;
        for e in self.eps.iter_mut() {
            *e *= o;
        }
        self
    }
}

impl<const N: usize> Div<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, o: f64) -> Self {
        self * (1.0 / o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_mix<T: Scalar>(x: T) -> T {
        (x * x * 3.0 + x.sin()) / (x.sqrt() + 1.0) - x.cos().recip()
    }

    #[test]
    fn derivative_matches_central_difference() {
        let x0 = 0.7;
        let d = poly_mix(Dual::<1>::variable(x0, 0));
        let h = 1e-6;
        let fd = (poly_mix(x0 + h) - poly_mix(x0 - h)) / (2.0 * h);
        assert!((d.eps[0] - fd).abs() < 1e-8, "{} vs {}", d.eps[0], fd);
        assert!((d.re - poly_mix(x0)).abs() < 1e-15);
    }

    #[test]
    fn two_directions_are_independent() {
        let x = Dual::<2>::variable(1.5, 0);
        let y = Dual::<2>::variable(-0.5, 1);
        let z = x * y + x / y;
        // d/dx = y + 1/y, d/dy = x - x/y^2
        assert!((z.eps[0] - (-0.5 - 2.0)).abs() < 1e-14);
        assert!((z.eps[1] - (1.5 - 1.5 / 0.25)).abs() < 1e-14);
    }
}
