//! Cuspidal edges along `C_i^±` and the cusp count of the two-dimensional locus.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::field::{grid_angle, sample_u, FieldOptions};
use crate::error::{Error, Result};
use crate::manifold::{embed, BasePoint, Manifold};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspOptions {
    /// Step along `u_i`; samples sit at `±{1..4}·step`.
    pub step: f64,
    pub eps_dr: f64,
    pub eps_d2r: f64,
    /// Allowed `|c_2| δ²` as a fraction of `|c_3| δ³` at the outermost sample.
    pub eps_quadratic: f64,
    pub eps_cubic: f64,
    /// Distance from the neighbouring special values of the other `u_k`.
    pub interior_tol: f64,
    pub field: FieldOptions,
}

impl Default for CuspOptions {
    fn default() -> Self {
        CuspOptions {
            step: 0.02,
            eps_dr: 1e-5,
            eps_d2r: 1e-4,
            eps_quadratic: 0.1,
            eps_cubic: 1e-6,
            interior_tol: 1e-3,
            field: FieldOptions::default(),
        }
    }
}

/// Which of `C_i^−` (`u_i ∈ {0, π}`) and `C_i^+` (`u_i = ±π/2`) holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellSide {
    Minus,
    Plus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspEvidence {
    pub i: usize,
    pub side: CellSide,
    /// Base coordinate index used for the cubic.
    pub coordinate: usize,
    pub r: f64,
    pub dr: f64,
    pub d2r: f64,
    /// Least-squares `c_1..c_4` of `x_k(r_i(u), u) − x_{k,0}` in powers of the offset.
    pub coeffs: [f64; 4],
    pub fit_residual: f64,
    pub pass: bool,
}

fn side_of(ui: f64, tol: f64) -> Option<CellSide> {
    let near = |t: f64| {
        let d = (ui - t).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d) <= tol
    };
    if near(0.0) || near(PI) {
        Some(CellSide::Minus)
    } else if near(FRAC_PI_2) || near(-FRAC_PI_2) {
        Some(CellSide::Plus)
    } else {
        None
    }
}

/// Fit the cusp model for `K_i` at `u ∈ C_i^±`.
pub fn cusp_classify(m: &Manifold, p0: &BasePoint, i: usize, u: &[f64], opts: &CuspOptions) -> Result<CuspEvidence> {
    let n = m.n();
    if !(1..n).contains(&i) || u.len() + 1 != n {
        return Err(Error::InvalidConfig(format!("index {i} out of range for n = {n}")));
    }
    let side = side_of(u[i - 1], 1e-12).ok_or_else(|| Error::NotApplicable(format!("u is not on C_{i}^±")))?;
    for (k, &uk) in u.iter().enumerate() {
        if k + 1 != i && side_of(uk, opts.interior_tol).is_some() {
            return Err(Error::NotApplicable("u is not interior to the cell".into()));
        }
    }
    let coordinate = match side {
        CellSide::Minus => i + 1,
        CellSide::Plus => i,
    };
    let at = |d: f64| -> Result<(f64, f64)> {
        let mut v = u.to_vec();
        v[i - 1] += d;
        let s = sample_u(m, p0, &v, &opts.field)?;
        Ok((s.r[i - 1], s.x[i - 1][coordinate - 1]))
    };
    let (r0, x0) = at(0.0)?;
    let h = opts.step;
    let mut pts = Vec::with_capacity(8);
    for k in 1..=4 {
        for sgn in [-1.0, 1.0] {
            let d = sgn * h * k as f64;
            let (r, x) = at(d)?;
            pts.push((d, r, x - x0));
        }
    }
    let r_at = |d: f64| pts.iter().find(|p| p.0 == d).unwrap().1;
    let d1 = (r_at(h) - r_at(-h)) / (2.0 * h);
    let d1b = (r_at(2.0 * h) - r_at(-2.0 * h)) / (4.0 * h);
    let dr = (4.0 * d1 - d1b) / 3.0;
    let s1 = (r_at(h) - 2.0 * r0 + r_at(-h)) / (h * h);
    let s2 = (r_at(2.0 * h) - 2.0 * r0 + r_at(-2.0 * h)) / (4.0 * h * h);
    let d2r = (4.0 * s1 - s2) / 3.0;

    let a = DMatrix::from_fn(pts.len(), 4, |row, c| pts[row].0.powi(c as i32 + 1));
    let b = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.2));
    let svd = a.clone().svd(true, true);
    let c = svd.solve(&b, 1e-14).map_err(|e| Error::InconclusiveFit(e.to_string()))?;
    let resid = (&a * &c - &b).norm() / (b.norm().max(1e-300));
    let coeffs = [c[0], c[1], c[2], c[3]];
    let df = 4.0 * h;
    let cubic = coeffs[2].abs() * df.powi(3);
    let pass = dr.abs() < opts.eps_dr
        && d2r.abs() > opts.eps_d2r
        && coeffs[1].abs() * df * df < opts.eps_quadratic * cubic
        && coeffs[0].abs() * df < opts.eps_quadratic * cubic
        && coeffs[2].abs() > opts.eps_cubic;
    Ok(CuspEvidence { i, side, coordinate, r: r0, dr, d2r, coeffs, fit_residual: resid, pass })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspCount {
    pub count: usize,
    pub samples: usize,
    /// Angles where `r(u)` has a critical point.
    pub critical_u: Vec<f64>,
    /// Direction reversals of the locus curve (ambient or base torus).
    pub reversals: usize,
    pub refined: bool,
}

fn count_once(m: &Manifold, p0: &BasePoint, samples: usize, opts: &FieldOptions) -> Result<(Vec<f64>, usize)> {
    let ss: Vec<_> = (0..samples)
        .map(|k| sample_u(m, p0, &[grid_angle(k, samples)], opts))
        .collect::<Result<_>>()?;
    let r: Vec<f64> = ss.iter().map(|s| s.r[0]).collect();
    let scale = r.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    let floor = 1e-12 * scale;
    let dr: Vec<f64> = (0..samples).map(|k| r[(k + 1) % samples] - r[k]).collect();
    let mut crit = Vec::new();
    for k in 0..samples {
        let (prev, cur) = (dr[(k + samples - 1) % samples], dr[k]);
        if prev.abs() > floor && cur.abs() > floor && prev * cur < 0.0 {
            crit.push(grid_angle(k, samples));
        } else if cur.abs() <= floor {
            // A flat step is one extremum when the slope flips across it.
            let next = dr[(k + 1) % samples];
            if prev * next < 0.0 {
                crit.push(grid_angle(k, samples));
            }
        }
    }
    // Locus curve: ambient points when embeddable, base coordinates otherwise.
    let pts: Vec<Vec<f64>> = ss
        .iter()
        .map(|s| embed(m, &s.phi[0]).unwrap_or_else(|_| s.x[0].clone()))
        .collect();
    let chord = |k: usize| -> Vec<f64> {
        let (a, b) = (&pts[k], &pts[(k + 1) % samples]);
        a.iter().zip(b).map(|(p, q)| q - p).collect()
    };
    let mut reversals = 0;
    for k in 0..samples {
        let (c0, c1) = (chord((k + samples - 1) % samples), chord(k));
        let dot: f64 = c0.iter().zip(&c1).map(|(p, q)| p * q).sum();
        if dot < 0.0 {
            reversals += 1;
        }
    }
    Ok((crit, reversals))
}

/// Count the cusps of the first conjugate locus of a two-dimensional manifold.
pub fn count_cusps_2d(m: &Manifold, p0: &BasePoint, samples: usize, opts: &FieldOptions) -> Result<CuspCount> {
    if m.n() != 2 {
        return Err(Error::UnsupportedDimension(m.n()));
    }
    if m.spec.profile.is_constant() {
        return Err(Error::NotApplicable("round sphere: the locus is a single point".into()));
    }
    let (crit, rev) = count_once(m, p0, samples, opts)?;
    if crit.len() == rev {
        return Ok(CuspCount { count: rev, samples, critical_u: crit, reversals: rev, refined: false });
    }
    let (crit2, rev2) = count_once(m, p0, 2 * samples, opts)?;
    if crit2.len() == rev2 {
        return Ok(CuspCount { count: rev2, samples: 2 * samples, critical_u: crit2, reversals: rev2, refined: true });
    }
    Err(Error::AmbiguousCount(crit2.len(), rev2))
}
