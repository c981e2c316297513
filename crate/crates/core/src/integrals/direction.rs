//! Charts of the unit cotangent sphere `U*_{p0}M`.
//!
//! The torus chart `u ∈ (ℝ/2πℤ)^{n−1}` sets `b_k = f_{k+1,0} cos²u_k + f_{k,0} sin²u_k`.
//! Written as `ξ_i = cos u_i · sin u_{i−1} · √D_i(u)` the covector is smooth in `u`,
//! with `D_i > 0` collecting the non-vanishing factors. Where two consecutive
//! roots coincide the pair `(u_{j−1}, u_j)` is replaced by `ν = (ν_1, ν_2)`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::dual::Scalar;

/// A direction at the base point, with its derived spectral data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionU {
    pub u: Vec<f64>,
    pub b: Vec<f64>,
    pub eps: Vec<i8>,
}

impl DirectionU {
    pub fn new(f0: &[f64], u: &[f64]) -> Self {
        DirectionU { u: u.to_vec(), b: b_of_u(f0, u), eps: eps_of_u(u) }
    }
}

/// `b_k(u_k)` for `k = 1..n−1`.
pub fn b_of_u(f0: &[f64], u: &[f64]) -> Vec<f64> {
    u.iter()
        .enumerate()
        .map(|(k, &uk)| {
            let (s, c) = uk.sin_cos();
            f0[k + 1] * c * c + f0[k] * s * s
        })
        .collect()
}

/// Signs `ε_i` of `cos u_i sin u_{i−1}` (with the end conventions); 0 where they vanish.
pub fn eps_of_u(u: &[f64]) -> Vec<i8> {
    let n = u.len() + 1;
    let sgn = |v: f64| -> i8 {
        if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        }
    };
    (1..=n)
        .map(|i| {
            let c = if i < n { u[i - 1].cos() } else { 1.0 };
            let s = if i > 1 { u[i - 2].sin() } else { 1.0 };
            sgn(c * s)
        })
        .collect()
}

/// Covector `ξ` at the base point with `f_{i,0} = f0[i−1]`, smooth in `u`.
pub fn covector_from_u<T: Scalar>(f0: &[f64], u: &[T]) -> Vec<T> {
    let n = f0.len();
    let b: Vec<T> = u
        .iter()
        .enumerate()
        .map(|(k, &uk)| {
            let s = uk.sin();
            let c = uk.cos();
            c * c * f0[k + 1] + s * s * f0[k]
        })
        .collect();
    (1..=n)
        .map(|i| {
            let fi = f0[i - 1];
            let mut d = T::cst(1.0);
            let mut trig = T::cst(1.0);
            if i > 1 {
                d = d * (f0[i - 2] - fi);
                trig = trig * u[i - 2].sin();
            }
            if i < n {
                d = d * (fi - f0[i]);
                trig = trig * u[i - 1].cos();
            }
            for (k, &bk) in b.iter().enumerate() {
                let k1 = k + 1;
                if k1 == i || k1 + 1 == i {
                    continue;
                }
                d = d * (bk - fi).abs();
            }
            trig * d.sqrt()
        })
        .collect()
}

/// `(ν_1, ν_2)` at spectral values `b_{j−1}, b_j` around `f_{j,0}`; `sign` is the sign of `ξ_j`.
pub fn nu_of_b(fj0: f64, b_jm1: f64, b_j: f64, sign: f64) -> (f64, f64) {
    let nu1 = 0.5 * (b_j + b_jm1) - fj0;
    let nu2 = sign * ((b_jm1 - fj0).max(0.0) * (fj0 - b_j).max(0.0)).sqrt();
    (nu1, nu2)
}

/// Covector in the `ν` chart around a point of `∂C_j^+ = ∂C_{j−1}^−`.
///
/// `corner` is a `u` on that boundary; it supplies `b_k` for `k ∉ {j−1, j}` and
/// the signs `ε_i` for `i ≠ j`.
pub fn covector_from_nu<T: Scalar>(f0: &[f64], j: usize, nu1: T, nu2: T, corner: &[f64]) -> Vec<T> {
    let n = f0.len();
    let b = b_of_u(f0, corner);
    let eps = corner_signs(corner, j);
    let fj = f0[j - 1];
    (1..=n)
        .map(|i| {
            let fi = f0[i - 1];
            // Π_{k≠j−1,j} |f_{i,0} − b_k|; the sign factor makes it positive.
            let mut p = 1.0;
            for (k, &bk) in b.iter().enumerate() {
                let k1 = k + 1;
                if k1 == j || k1 + 1 == j {
                    continue;
                }
                p *= (fi - bk).abs();
            }
            if i == j {
                nu2 * p.sqrt()
            } else {
                let d = fi - fj;
                let rad = nu1 * (-2.0 * d) - nu2 * nu2 + d * d;
                rad.sqrt() * (p.sqrt() * eps[i - 1] as f64)
            }
        })
        .collect()
}

/// Signs `ε_i` near a `∂C_j^+` corner, read off just inside the cell.
fn corner_signs(corner: &[f64], j: usize) -> Vec<i8> {
    // Nudge u_{j−1} off {0, π} and u_j off ±π/2 so that only ε_j is undetermined.
    let mut u = corner.to_vec();
    u[j - 2] += 1e-3;
    u[j - 1] += 1e-3;
    eps_of_u(&u)
}

/// A `u` (near `corner`) representing the covector with coordinates `ν`.
pub fn u_of_nu(f0: &[f64], j: usize, nu1: f64, nu2: f64, corner: &[f64]) -> Vec<f64> {
    let mut u = corner.to_vec();
    let r = (nu1 * nu1 + nu2 * nu2).sqrt();
    let p = nu1 + r;
    let q = -nu1 + r;
    let s2 = (p / (f0[j - 2] - f0[j - 1])).clamp(0.0, 1.0);
    let c2 = (q / (f0[j - 1] - f0[j])).clamp(0.0, 1.0);
    let d1 = s2.sqrt().asin();
    let d2 = c2.sqrt().asin();
    let c_jm1 = if corner[j - 2].cos() > 0.0 { 0.0 } else { PI };
    let c_j = if corner[j - 1].sin() > 0.0 { FRAC_PI_2 } else { -FRAC_PI_2 };
    u[j - 2] = c_jm1 + d1;
    // ξ_j has the sign of cos u_j sin u_{j−1}; pick the side of ±π/2 that matches ν_2.
    let sin_jm1 = (c_jm1 + d1).sin();
    let want = if nu2 >= 0.0 { 1.0 } else { -1.0 };
    let mut uj = c_j + d2;
    if (uj.cos() * sin_jm1) * want < 0.0 {
        uj = c_j - d2;
    }
    u[j - 1] = uj;
    u
}

/// Cell membership of a direction.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellLabel {
    /// `k` with `[u] ∈ C_k^−` (`u_k ∈ {0, π}`).
    pub minus: Vec<usize>,
    /// `k` with `[u] ∈ C_k^+` (`u_k = ±π/2`).
    pub plus: Vec<usize>,
    /// `k` with `[u] ∈ ∂C_k^+ = ∂C_{k−1}^−`.
    pub boundary: Vec<usize>,
}

impl CellLabel {
    pub fn interior(&self) -> bool {
        self.minus.is_empty() && self.plus.is_empty()
    }

    pub fn on_boundary(&self) -> bool {
        !self.boundary.is_empty()
    }
}

/// Classify `u` with angular tolerance `tol`.
pub fn classify_cell(u: &[f64], tol: f64) -> CellLabel {
    let near = |x: f64, target: f64| {
        let d = (x - target).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d) <= tol
    };
    let mut lab = CellLabel::default();
    for (k0, &uk) in u.iter().enumerate() {
        let k = k0 + 1;
        if near(uk, 0.0) || near(uk, PI) {
            lab.minus.push(k);
        }
        if near(uk, FRAC_PI_2) || near(uk, -FRAC_PI_2) {
            lab.plus.push(k);
        }
    }
    for &k in &lab.plus {
        if k >= 2 && lab.minus.contains(&(k - 1)) {
            lab.boundary.push(k);
        }
    }
    lab
}
