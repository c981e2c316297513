//! First integrals, the spectral parameters `b_i`, and charts of the unit
//! cotangent sphere at a base point.

mod direction;

use serde::{Deserialize, Serialize};

pub use direction::{
    b_of_u, classify_cell, covector_from_nu, covector_from_u, eps_of_u, nu_of_b, u_of_nu, CellLabel,
    DirectionU,
};

use crate::error::{Error, Result};
use crate::manifold::{metric_from_f, Manifold};
use crate::poly::Poly;

/// Tolerance (relative to `a_0 − a_n`) for `b_i = a_i` ties.
pub const TIE_TOL: f64 = 1e-9;

/// A cotangent vector in chart coordinates: `φ` and `η = h ξ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub phi: Vec<f64>,
    pub eta: Vec<f64>,
}

impl PhaseState {
    pub fn from_x_xi(m: &Manifold, x: &[f64], xi: &[f64]) -> Self {
        let phi: Vec<f64> = x.iter().zip(&m.charts).map(|(&v, c)| c.phi_of_x(v)).collect();
        let eta = phi.iter().zip(xi).zip(&m.charts).map(|((&p, &k), c)| k * c.h(p)).collect();
        PhaseState { phi, eta }
    }

    pub fn from_phi_xi(m: &Manifold, phi: &[f64], xi: &[f64]) -> Self {
        let eta = phi.iter().zip(xi).zip(&m.charts).map(|((&p, &k), c)| k * c.h(p)).collect();
        PhaseState { phi: phi.to_vec(), eta }
    }

    pub fn x(&self, m: &Manifold) -> Vec<f64> {
        self.phi.iter().zip(&m.charts).map(|(&p, c)| c.x_of_phi(p)).collect()
    }

    pub fn xi(&self, m: &Manifold) -> Vec<f64> {
        self.phi.iter().zip(&self.eta).zip(&m.charts).map(|((&p, &e), c)| e / c.h(p)).collect()
    }

    pub fn f(&self, m: &Manifold) -> Vec<f64> {
        self.phi.iter().zip(&m.charts).map(|(&p, c)| c.f(p)).collect()
    }
}

/// `(F_1, …, F_{n−1})` and `F_n = 2E`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Integrals {
    pub f: Vec<f64>,
    pub energy2: f64,
}

/// `2E = Σ ξ_i² / g_ii`.
pub fn energy2(f: &[f64], xi: &[f64]) -> Result<f64> {
    let g = metric_from_f(f)?;
    Ok(xi.iter().zip(&g).map(|(k, gi)| k * k / gi).sum())
}

/// First integrals from the explicit inverse of the `b_ij` system.
pub fn first_integrals(a: &[f64], f: &[f64], xi: &[f64]) -> Result<Integrals> {
    let n = f.len();
    let g = metric_from_f(f)?;
    let energy2 = xi.iter().zip(&g).map(|(k, gi)| k * k / gi).sum();
    let mut out = Vec::with_capacity(n - 1);
    for j in 1..n {
        let denom: f64 = (1..n).filter(|&k| k != j).map(|k| a[k] - a[j]).product();
        let mut s = 0.0;
        for i in 0..n {
            let num: f64 = (0..n).filter(|&l| l != i).map(|l| f[l] - a[j]).product();
            s += num / g[i] * xi[i] * xi[i];
        }
        out.push(s / denom);
    }
    Ok(Integrals { f: out, energy2 })
}

/// `b_ij(f_i)` of the defining linear system (1-based `i`, `j`).
pub fn b_matrix_entry(a: &[f64], i: usize, fi: f64, j: usize) -> f64 {
    let n = a.len() - 1;
    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
    if j < n {
        sign * (1..n).filter(|&k| k != j).map(|k| fi - a[k]).product::<f64>()
    } else {
        -sign * (1..n).map(|k| fi - a[k]).product::<f64>()
    }
}

/// First integrals by solving `Σ_j b_ij F_j = ξ_i²` directly (cross-check route).
pub fn first_integrals_by_solve(a: &[f64], f: &[f64], xi: &[f64]) -> Result<Integrals> {
    let n = f.len();
    let mat = nalgebra::DMatrix::from_fn(n, n, |r, c| b_matrix_entry(a, r + 1, f[r], c + 1));
    let rhs = nalgebra::DVector::from_iterator(n, xi.iter().map(|k| k * k));
    let sol = mat.lu().solve(&rhs).ok_or(Error::DegenerateMetric { i: 1, j: n })?;
    Ok(Integrals { f: sol.iter().take(n - 1).copied().collect(), energy2: sol[n - 1] })
}

/// Roots `b_i` of `Θ`, the constants `c_j`, and the oscillation ranges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// `a_i^+ = max(a_i, b_i)` for `i = 1..n` (with `b_n := −∞`).
    pub a_plus: Vec<f64>,
    /// `a_{i−1}^− = min(a_{i−1}, b_{i−1})` for `i = 1..n` (with `b_0 := +∞`).
    pub a_minus: Vec<f64>,
    /// `|b_i − a_i|` above the tie tolerance.
    pub off_a: Vec<bool>,
    /// `b_i ≠ b_{i+1}` within tolerance.
    pub distinct: Vec<bool>,
}

impl SpectralData {
    pub fn from_b(a: &[f64], b: &[f64]) -> Self {
        let n = a.len() - 1;
        let tol = TIE_TOL * (a[0] - a[n]);
        let c = c_from_b(a, b);
        let a_plus = (1..=n).map(|i| if i < n { a[i].max(b[i - 1]) } else { a[n] }).collect();
        let a_minus = (1..=n).map(|i| if i > 1 { a[i - 1].min(b[i - 2]) } else { a[0] }).collect();
        let off_a = (1..n).map(|i| (b[i - 1] - a[i]).abs() > tol).collect();
        let distinct = b.windows(2).map(|w| (w[0] - w[1]).abs() > tol).collect();
        SpectralData { b: b.to_vec(), c, a_plus, a_minus, off_a, distinct }
    }

    /// Oscillation range `[a_i^+, a_{i−1}^−]` of `f_i` (1-based).
    pub fn range(&self, i: usize) -> (f64, f64) {
        (self.a_plus[i - 1], self.a_minus[i - 1])
    }

    /// Every `b_i` away from `a_i` and from its neighbours.
    pub fn generic(&self) -> bool {
        self.off_a.iter().all(|&v| v) && self.distinct.iter().all(|&v| v)
    }
}

/// `c_j = −Π_i (a_j − b_i) / Π_{k≠j} (a_j − a_k)` (indices over `1..n−1`).
pub fn c_from_b(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len() - 1;
    (1..n)
        .map(|j| {
            let num: f64 = b.iter().map(|bi| a[j] - bi).product();
            let den: f64 = (1..n).filter(|&k| k != j).map(|k| a[j] - a[k]).product();
            -num / den
        })
        .collect()
}

/// `Θ(λ) = Σ_j Π_{k≠j}(λ − a_k) c_j − Π_k (λ − a_k)`.
pub fn theta_poly(a: &[f64], c: &[f64]) -> Poly {
    let n = a.len() - 1;
    let mut p = Poly::from_roots(&a[1..n]).scale(-1.0);
    for j in 1..n {
        let roots: Vec<f64> = (1..n).filter(|&k| k != j).map(|k| a[k]).collect();
        p = p.add(&Poly::from_roots(&roots).scale(c[j - 1]));
    }
    p
}

/// Roots of `Θ` for given integrals (scaled to the unit bundle).
pub fn b_from_f(a: &[f64], ints: &Integrals) -> Result<SpectralData> {
    let c: Vec<f64> = ints.f.iter().map(|v| v / ints.energy2).collect();
    let b = if c.is_empty() { vec![] } else { theta_poly(a, &c).real_roots()? };
    Ok(SpectralData::from_b(a, &b))
}
