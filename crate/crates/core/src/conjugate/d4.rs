//! Cone-edge signature of the two sheets `K̃_{j−1}, K̃_j` meeting over `∂C_j^+`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use super::field::{direction_of_u, sample_u, FieldOptions};
use super::pair::{degenerate_pair, DegeneratePair, PairOptions};
use crate::error::{Error, Result};
use crate::integrals::u_of_nu;
use crate::manifold::{BasePoint, Manifold};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct D4Options {
    /// Inner `ν` radius as a fraction of `f_{j−1,0} − f_{j+1,0}`.
    pub radius: f64,
    pub angles: usize,
    pub max_residual: f64,
    pub z_tol: f64,
    pub theta_tol: f64,
    pub pair: PairOptions,
    pub field: FieldOptions,
}

impl Default for D4Options {
    fn default() -> Self {
        D4Options {
            radius: 1e-3,
            angles: 16,
            max_residual: 0.05,
            z_tol: 1e-7,
            theta_tol: 1e-5,
            pair: PairOptions::default(),
            field: FieldOptions::default(),
        }
    }
}

/// Quadratic cone `Qᵀ S Q = 0` fitted to the sheet points around the apex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeFit {
    pub points: usize,
    pub eigenvalues: [f64; 3],
    /// Counts of positive and negative eigenvalues.
    pub signature: (usize, usize),
    /// Unit axis `w_3` (eigenvector of the lone-sign eigenvalue).
    pub axis: [f64; 3],
    pub residual: f64,
    /// Sheet `j` lies on `w_3 ≤ 0` and sheet `j−1` on `w_3 ≥ 0`.
    pub sheets_split: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct D4Report {
    pub pair: DegeneratePair,
    pub cone: ConeFit,
    pub double_zero: bool,
    pub cone_ok: bool,
    pub theta_ok: bool,
    pub pass: bool,
}

/// Fit a homogeneous quadric to points `q` (rows normalized by `|q|²`).
pub fn fit_cone(q: &[[f64; 3]], sheet: &[bool]) -> Result<ConeFit> {
    let rows: Vec<[f64; 6]> = q
        .iter()
        .map(|p| {
            let s = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            [p[0] * p[0], p[1] * p[1], p[2] * p[2], 2.0 * p[0] * p[1], 2.0 * p[0] * p[2], 2.0 * p[1] * p[2]].map(|v| v / s)
        })
        .collect();
    if rows.len() < 6 {
        return Err(Error::InconclusiveFit("too few cone points".into()));
    }
    let a = DMatrix::from_fn(rows.len(), 6, |r, c| rows[r][c]);
    let ata = a.transpose() * &a;
    let eig = SymmetricEigen::new(ata);
    let k = eig.eigenvalues.imin();
    let c = eig.eigenvectors.column(k);
    let s = Matrix3::new(c[0], c[3], c[4], c[3], c[1], c[5], c[4], c[5], c[2]);
    let se = SymmetricEigen::new(s);
    let ev = [se.eigenvalues[0], se.eigenvalues[1], se.eigenvalues[2]];
    let pos = ev.iter().filter(|&&v| v > 0.0).count();
    let neg = 3 - pos;
    let lone = if pos == 1 {
        ev.iter().position(|&v| v > 0.0).unwrap()
    } else {
        ev.iter().position(|&v| v <= 0.0).unwrap()
    };
    let mut axis: Vector3<f64> = se.eigenvectors.column(lone).into();
    let abs_s = se.eigenvectors * Matrix3::from_diagonal(&se.eigenvalues.map(f64::abs)) * se.eigenvectors.transpose();

    let (mut num, mut den) = (0.0, 0.0);
    for p in q {
        let v = Vector3::from(*p);
        num += (v.transpose() * s * v)[0].powi(2);
        den += (v.transpose() * abs_s * v)[0].powi(2);
    }
    let residual = (num / den).sqrt();

    // Orient w_3 so that sheet j (flag true) sits at w_3 ≤ 0.
    let lower: f64 = q.iter().zip(sheet).filter(|(_, &b)| b).map(|(p, _)| Vector3::from(*p).dot(&axis)).sum();
    if lower > 0.0 {
        axis = -axis;
    }
    let side = |p: &[f64; 3]| Vector3::from(*p).dot(&axis);
    let sheets_split = q.iter().zip(sheet).all(|(p, &b)| if b { side(p) <= 0.0 } else { side(p) >= 0.0 });
    Ok(ConeFit {
        points: q.len(),
        eigenvalues: ev,
        signature: (pos, neg),
        axis: [axis[0], axis[1], axis[2]],
        residual,
        sheets_split,
    })
}

/// Check the double degeneracy, `θ(τ_1, 0) = 2π`, and the cone-edge fit at a `∂C_j^+` corner.
pub fn d4_classify(m: &Manifold, p0: &BasePoint, j: usize, corner: &[f64], opts: &D4Options) -> Result<D4Report> {
    let n = m.n();
    if n != 3 {
        return Err(Error::NotApplicable(format!("cone fit needs a three-dimensional tangent space, n = {n}")));
    }
    if !(2..n).contains(&j) {
        return Err(Error::NotApplicable(format!("no ∂C_{j}^+ cells for n = {n}")));
    }
    let pair = degenerate_pair(m, p0, j, (0.0, 0.0), corner, &opts.pair)?;
    let v0 = direction_of_u(m, &p0.phi, corner)?;
    let f0 = &p0.f;
    let width = f0[j - 2] - f0[j];
    let mut pts = Vec::new();
    let mut sheet = Vec::new();
    for ring in [1.0, 2.0] {
        let rho = opts.radius * width * ring;
        for k in 0..opts.angles {
            let a = 2.0 * PI * (k as f64 + 0.5) / opts.angles as f64;
            let u = u_of_nu(f0, j, rho * a.cos(), rho * a.sin(), corner);
            let s = sample_u(m, p0, &u, &opts.field)?;
            for (idx, is_j) in [(j - 2, false), (j - 1, true)] {
                let r = s.r[idx];
                pts.push([0, 1, 2].map(|c| r * s.direction[c] - pair.tau1 * v0[c]));
                sheet.push(is_j);
            }
        }
    }
    let cone = fit_cone(&pts, &sheet)?;
    let double_zero = pair.z_at_tau.0 < opts.z_tol && pair.z_at_tau.1 < opts.z_tol;
    let cone_ok = cone.residual < opts.max_residual && cone.signature.0.min(cone.signature.1) == 1 && cone.sheets_split;
    let theta_ok = pair.theta_tau.is_some_and(|t| (t - 2.0 * PI).abs() <= opts.theta_tol)
        && pair.theta_rate_min.is_some_and(|r| r > 0.0);
    Ok(D4Report { pass: double_zero && cone_ok && theta_ok, pair, cone, double_zero, cone_ok, theta_ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_cone_fits_with_zero_residual() {
        let mut pts = Vec::new();
        let mut sheet = Vec::new();
        for k in 0..12 {
            let a = k as f64 * 0.5;
            for s in [-1.0, 1.0] {
                let z = 0.7 * s;
                pts.push([z * a.cos() * s, z * a.sin() * s, z]);
                sheet.push(s < 0.0);
            }
        }
        let fit = fit_cone(&pts, &sheet).unwrap();
        assert!(fit.residual < 1e-12);
        assert_eq!(fit.signature.0.min(fit.signature.1), 1);
        assert!(fit.sheets_split);
        assert!((fit.axis[2].abs() - 1.0).abs() < 1e-12);
    }
}
