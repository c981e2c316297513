//! Liouville manifolds built from a spectrum `a_0 > … > a_n > 0` and a profile `A(λ)`.

mod chart;
mod embed;
mod profile;
mod spec;
mod spline;

use serde::{Deserialize, Serialize};

pub use chart::Chart;
pub use embed::{elliptic_coordinates, embed, embed_ellipsoid};
pub use profile::{AProfile, ProfileSpec};
pub use spec::{inspect_spec, validate_spec, ConditionReport, ManifoldConfig, ManifoldSpec, SignCheck};
pub use spline::CubicSpline;

use crate::error::{Error, Result};

/// Relative distance from `N_k` below which a point is not general.
pub const GENERAL_TOL: f64 = 1e-6;

/// Default table density per quarter period.
pub const NODES_PER_QUARTER: usize = 512;

/// A validated spec together with the angular chart of every coordinate.
#[derive(Clone, Debug)]
pub struct Manifold {
    pub spec: ManifoldSpec,
    pub charts: Vec<Chart>,
}

impl Manifold {
    pub fn new(spec: ManifoldSpec) -> Result<Self> {
        let n = spec.n();
        let charts = (1..=n)
            .map(|i| Chart::new(&spec.a, i, &spec.profile))
            .collect::<Result<Vec<_>>>()?;
        Ok(Manifold { spec, charts })
    }

    /// Validate and build in one go.
    pub fn from_parts(a: &[f64], profile: AProfile) -> Result<Self> {
        Manifold::new(validate_spec(a, profile)?)
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn a(&self) -> &[f64] {
        &self.spec.a
    }

    /// Chart of coordinate `i` (1-based).
    pub fn chart(&self, i: usize) -> &Chart {
        &self.charts[i - 1]
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.charts.iter().map(|c| c.alpha).collect()
    }

    pub fn point_from_phi(&self, phi: &[f64]) -> BasePoint {
        let x = phi.iter().zip(&self.charts).map(|(&p, c)| c.x_of_phi(p)).collect();
        self.assemble(x, phi.to_vec())
    }

    pub fn point_from_x(&self, x: &[f64]) -> BasePoint {
        let phi = x.iter().zip(&self.charts).map(|(&v, c)| c.phi_of_x(v)).collect();
        self.assemble(x.to_vec(), phi)
    }

    /// Point with `f_i = a_i + s_i (a_{i−1} − a_i)` and `0 ≤ x_i ≤ α_i/4`.
    pub fn point_from_fractions(&self, s: &[f64]) -> Result<BasePoint> {
        if s.len() != self.n() || s.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidConfig(format!("base point fractions must be {} values in [0,1]", self.n())));
        }
        let phi: Vec<f64> = s.iter().map(|v| 2.0 * v.sqrt().asin()).collect();
        Ok(self.point_from_phi(&phi))
    }

    fn assemble(&self, x: Vec<f64>, phi: Vec<f64>) -> BasePoint {
        let f: Vec<f64> = phi.iter().zip(&self.charts).map(|(&p, c)| c.f(p)).collect();
        let tol = GENERAL_TOL * self.spec.width();
        let general = self
            .charts
            .iter()
            .zip(&f)
            .all(|(c, &fi)| (fi - c.lo).abs() > tol && (c.hi - fi).abs() > tol);
        BasePoint { x, phi, f, general }
    }

    /// Diagonal metric coefficients `g_ii` in the `x` coordinates.
    pub fn metric_at(&self, p: &BasePoint) -> Result<Vec<f64>> {
        metric_from_f(&p.f)
    }

    /// Tabulate every coordinate over one full period.
    pub fn solve_profiles(&self, nodes_per_quarter: usize) -> Vec<CoordinateProfile> {
        self.charts.iter().map(|c| CoordinateProfile::tabulate(c, nodes_per_quarter)).collect()
    }
}

/// `g_ii = (−1)^{n−i} Π_{l≠i} (f_l − f_i)`.
pub fn metric_from_f(f: &[f64]) -> Result<Vec<f64>> {
    let n = f.len();
    let scale = f.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
    let mut g = vec![1.0; n];
    for i in 0..n {
        for l in 0..n {
            if l == i {
                continue;
            }
            let d = f[l] - f[i];
            if d.abs() <= 1e-14 * scale {
                return Err(Error::DegenerateMetric { i: i.min(l) + 1, j: i.max(l) + 1 });
            }
            g[i] *= d;
        }
        if (n - 1 - i) % 2 == 1 {
            g[i] = -g[i];
        }
    }
    Ok(g)
}

/// A point of the covering torus `R` with its cached chart data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasePoint {
    pub x: Vec<f64>,
    /// Angular chart coordinates.
    pub phi: Vec<f64>,
    /// `f_i(x_i)`.
    pub f: Vec<f64>,
    /// Off every `N_k` by more than the relative tolerance.
    pub general: bool,
}

/// `f_i` and `f_i'` tabulated over `[0, α_i]`, plus the quarter-period inverse.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordinateProfile {
    pub i: usize,
    pub alpha: f64,
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub fprime: Vec<f64>,
    /// Samples of the inverse `x_i(f)` on `[a_i, a_{i−1}]`.
    pub inverse_f: Vec<f64>,
    pub inverse_x: Vec<f64>,
}

impl CoordinateProfile {
    fn tabulate(c: &Chart, nq: usize) -> Self {
        let total = 4 * nq;
        let mut x = Vec::with_capacity(total + 1);
        let mut f = Vec::with_capacity(total + 1);
        let mut fprime = Vec::with_capacity(total + 1);
        for k in 0..=total {
            let xk = c.alpha * k as f64 / total as f64;
            let phi = c.phi_of_x(xk);
            x.push(xk);
            f.push(c.f(phi));
            fprime.push(c.fprime_x(phi));
        }
        // Quarter-period inverse on a φ-uniform grid, which clusters at the turning points.
        let (inverse_f, inverse_x) = (0..=nq)
            .map(|k| {
                let phi = std::f64::consts::PI * k as f64 / nq as f64;
                (c.f(phi), c.x_of_phi(phi))
            })
            .unzip();
        CoordinateProfile { i: c.i, alpha: c.alpha, x, f, fprime, inverse_f, inverse_x }
    }

    /// Largest `|(f')² − 4(−1)^i Π(f − a_j)/A(f)²|`, normalized by the largest right side.
    pub fn ode_residual(&self, a: &[f64], profile: &AProfile) -> f64 {
        let sign = if self.i % 2 == 0 { 1.0 } else { -1.0 };
        let rhs: Vec<f64> = self
            .f
            .iter()
            .map(|&v| {
                let prod: f64 = a.iter().map(|aj| v - aj).product();
                (4.0 * sign * prod / profile.value(v).powi(2)).max(0.0)
            })
            .collect();
        let scale = rhs.iter().fold(0.0_f64, |m, v| m.max(*v));
        self.fprime
            .iter()
            .zip(&rhs)
            .fold(0.0_f64, |m, (fp, r)| m.max((fp * fp - r).abs()))
            / scale
    }

    /// Largest violation of `f(x) = f(−x) = f(α/2 − x)` over the grid.
    pub fn symmetry_residual(&self) -> f64 {
        let total = self.f.len() - 1;
        let mut worst = 0.0_f64;
        for k in 0..=total {
            let neg = self.f[(total - k) % total];
            let refl = self.f[(total / 2 + total - k) % total];
            worst = worst.max((self.f[k] - neg).abs()).max((self.f[k] - refl).abs());
        }
        worst
    }

    /// Linear lookup in the inverse table (for diagnostics, not for dynamics).
    pub fn x_of_f(&self, fv: f64) -> f64 {
        let k = self.inverse_f.partition_point(|&v| v < fv).clamp(1, self.inverse_f.len() - 1);
        let (f0, f1) = (self.inverse_f[k - 1], self.inverse_f[k]);
        let t = if f1 > f0 { (fv - f0) / (f1 - f0) } else { 0.0 };
        self.inverse_x[k - 1] + t * (self.inverse_x[k] - self.inverse_x[k - 1])
    }
}

/// Write the profiles as CSV with columns `i, x, f, fprime`.
pub fn write_profiles_csv<W: std::io::Write>(profiles: &[CoordinateProfile], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["i", "x", "f", "fprime"])?;
    for p in profiles {
        for k in 0..p.x.len() {
            out.write_record(&[p.i.to_string(), p.x[k].to_string(), p.f[k].to_string(), p.fprime[k].to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}
