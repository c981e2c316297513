//! Initial data on the unit cotangent sphere with variational directions.

use super::trace::InitialData;
use crate::dual::{Dual, Scalar};
use crate::error::{Error, Result};
use crate::integrals::{covector_from_nu, covector_from_u, PhaseState};
use crate::manifold::{metric_from_f, Manifold};

const W: usize = 6;

fn unit<T: Scalar>(xi: Vec<T>, g: &[f64]) -> Result<Vec<T>> {
    let mut e2 = T::cst(0.0);
    for (k, gk) in xi.iter().zip(g) {
        e2 = e2 + *k * *k / *gk;
    }
    if !(e2.re() > 0.0) {
        return Err(Error::FrameDegenerate);
    }
    let s = e2.sqrt();
    Ok(xi.into_iter().map(|k| k / s).collect())
}

fn assemble(m: &Manifold, phi0: &[f64], xi: Vec<Dual<W>>, nvar: usize, scale: f64, frames: bool) -> InitialData {
    let n = m.n();
    let h: Vec<f64> = (0..n).map(|k| m.charts[k].h(phi0[k])).collect();
    let eta = (0..n).map(|k| xi[k].re * h[k]).collect();
    let deta = (0..nvar).map(|d| (0..n).map(|k| scale * xi[k].eps[d] * h[k]).collect()).collect();
    InitialData { state: PhaseState { phi: phi0.to_vec(), eta }, deta, frames }
}

/// Unit covector at `φ0` in the `u` chart, with `δη_r = h ∂ξ/∂u_r` for `r = 1..n−1`.
pub fn from_u(m: &Manifold, phi0: &[f64], u: &[f64], frames: bool) -> Result<InitialData> {
    let n = m.n();
    if n > W || u.len() + 1 != n {
        return Err(Error::UnsupportedDimension(n));
    }
    let f0: Vec<f64> = (0..n).map(|k| m.charts[k].f(phi0[k])).collect();
    let g = metric_from_f(&f0)?;
    let ud: Vec<Dual<W>> = u.iter().enumerate().map(|(k, &v)| Dual::variable(v, k)).collect();
    let xi = unit(covector_from_u(&f0, &ud), &g)?;
    Ok(assemble(m, phi0, xi, n - 1, 1.0, frames))
}

/// Plain unit covector (no variations).
pub fn state_from_u(m: &Manifold, phi0: &[f64], u: &[f64]) -> Result<PhaseState> {
    let n = m.n();
    let f0: Vec<f64> = (0..n).map(|k| m.charts[k].f(phi0[k])).collect();
    let g = metric_from_f(&f0)?;
    let xi = unit(covector_from_u::<f64>(&f0, u), &g)?;
    Ok(PhaseState::from_phi_xi(m, phi0, &xi))
}

/// Unit covector in the `ν` chart at `∂C_j^+`, with `δη = h ½∂ξ/∂ν_a` for `a = 1, 2`.
pub fn from_nu(m: &Manifold, phi0: &[f64], j: usize, nu: (f64, f64), corner: &[f64], frames: bool) -> Result<InitialData> {
    let n = m.n();
    if n > W || !(2..=n - 1).contains(&j) {
        return Err(Error::NotApplicable(format!("no ν chart for j = {j}, n = {n}")));
    }
    let f0: Vec<f64> = (0..n).map(|k| m.charts[k].f(phi0[k])).collect();
    let g = metric_from_f(&f0)?;
    let xi = unit(covector_from_nu(&f0, j, Dual::<W>::variable(nu.0, 0), Dual::variable(nu.1, 1), corner), &g)?;
    Ok(assemble(m, phi0, xi, 2, 0.5, frames))
}
