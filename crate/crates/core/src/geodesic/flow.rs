//! Right-hand side of the geodesic flow in the angular charts, with optional
//! variational directions (dual numbers) and parallel-transported vectors.
//!
//! In the chart `φ` the metric is `G_mm = g_mm h_m²` and the momentum is
//! `η_m = h_m ξ_m`; Hamilton's equations for `H = ½ Σ η_m²/G_mm` read
//! `φ_m' = η_m/G_mm`, `η_k' = ½ Σ_m (η_m²/G_mm) ∂_k log G_mm`.

use crate::dual::{Dual, Scalar};
use crate::manifold::Manifold;

/// Largest supported dimension.
pub const MAX_N: usize = 6;

/// Metric data at a point: `G_mm` and `D[k][m] = ∂_k log G_mm`.
#[derive(Clone, Copy, Debug)]
pub struct Geometry<T> {
    pub g: [T; MAX_N],
    pub dlog: [[T; MAX_N]; MAX_N],
}

/// State layout: `[φ, η, (δφ_d, δη_d) for each variation d, V_r for each frame vector r]`.
#[derive(Clone, Copy, Debug)]
pub struct Flow<'a> {
    pub m: &'a Manifold,
    pub n: usize,
    pub nvar: usize,
    pub nframe: usize,
}

impl<'a> Flow<'a> {
    pub fn new(m: &'a Manifold, nvar: usize, nframe: usize) -> Self {
        let n = m.n();
        assert!(n <= MAX_N && nvar <= 4, "dimension {n} or variation count {nvar} unsupported");
        Flow { m, n, nvar, nframe }
    }

    pub fn dim(&self) -> usize {
        2 * self.n * (1 + self.nvar) + self.n * self.nframe
    }

    /// Offset of `δφ_d`; `δη_d` follows after `n` entries.
    pub fn var_offset(&self, d: usize) -> usize {
        2 * self.n * (1 + d)
    }

    pub fn frame_offset(&self, r: usize) -> usize {
        2 * self.n * (1 + self.nvar) + self.n * r
    }

    /// Metric data at `φ`, generic over the scalar type.
    #[inline]
    pub fn geometry<T: Scalar>(&self, phi: &[T]) -> Geometry<T> {
        let n = self.n;
        let zero = T::cst(0.0);
        let mut f = [zero; MAX_N];
        let mut fp = [zero; MAX_N];
        let mut h = [zero; MAX_N];
        let mut dlh = [zero; MAX_N];
        for m in 0..n {
            let (a, b, c, d) = self.m.charts[m].local(phi[m]);
            f[m] = a;
            fp[m] = b;
            h[m] = c;
            dlh[m] = d;
        }
        let mut inv = [[zero; MAX_N]; MAX_N];
        for l in 0..n {
            for m in l + 1..n {
                let v = (f[l] - f[m]).recip();
                inv[l][m] = v;
                inv[m][l] = -v;
            }
        }
        let mut geo = Geometry { g: [zero; MAX_N], dlog: [[zero; MAX_N]; MAX_N] };
        for m in 0..n {
            // g_mm = Π_{l<m} (f_l − f_m) Π_{l>m} (f_m − f_l)
            let mut g = T::cst(1.0);
            let mut s = zero;
            for l in 0..n {
                if l == m {
                    continue;
                }
                g = if l < m { g * (f[l] - f[m]) } else { g * (f[m] - f[l]) };
                s = s + inv[m][l];
                geo.dlog[l][m] = fp[l] * inv[l][m];
            }
            geo.g[m] = g * h[m] * h[m];
            geo.dlog[m][m] = fp[m] * s + dlh[m] * 2.0;
        }
        geo
    }

    /// `dy/dt`.
    pub fn rhs(&self, y: &[f64], dy: &mut [f64]) {
        match self.nvar {
            0 => self.rhs_k::<0>(y, dy),
            1 => self.rhs_k::<1>(y, dy),
            2 => self.rhs_k::<2>(y, dy),
            3 => self.rhs_k::<3>(y, dy),
            4 => self.rhs_k::<4>(y, dy),
            _ => unreachable!(),
        }
    }

    fn rhs_k<const K: usize>(&self, y: &[f64], dy: &mut [f64]) {
        let n = self.n;
        let mut phi = [Dual::<K>::constant(0.0); MAX_N];
        let mut eta = [Dual::<K>::constant(0.0); MAX_N];
        for m in 0..n {
            phi[m].re = y[m];
            eta[m].re = y[n + m];
            for d in 0..K {
                let o = self.var_offset(d);
                phi[m].eps[d] = y[o + m];
                eta[m].eps[d] = y[o + n + m];
            }
        }
        let geo = self.geometry(&phi[..n]);
        let mut vel = [Dual::<K>::constant(0.0); MAX_N];
        let mut w = [Dual::<K>::constant(0.0); MAX_N];
        for m in 0..n {
            vel[m] = eta[m] / geo.g[m];
            w[m] = eta[m] * vel[m];
        }
        for k in 0..n {
            let mut acc = Dual::<K>::constant(0.0);
            for m in 0..n {
                acc = acc + w[m] * geo.dlog[k][m];
            }
            let deta = acc * 0.5;
            dy[k] = vel[k].re;
            dy[n + k] = deta.re;
            for d in 0..K {
                let o = self.var_offset(d);
                dy[o + k] = vel[k].eps[d];
                dy[o + n + k] = deta.eps[d];
            }
        }
        if self.nframe > 0 {
            let mut g = [0.0; MAX_N];
            let mut dl = [[0.0; MAX_N]; MAX_N];
            let mut v = [0.0; MAX_N];
            for a in 0..n {
                g[a] = geo.g[a].re;
                v[a] = vel[a].re;
                for b in 0..n {
                    dl[a][b] = geo.dlog[a][b].re;
                }
            }
            for r in 0..self.nframe {
                let o = self.frame_offset(r);
                transport_rhs(n, &g, &dl, &v, &y[o..o + n], &mut dy[o..o + n]);
            }
        }
    }
}

/// Parallel transport `∇_{γ'} V = 0` for a diagonal metric.
#[inline]
pub fn transport_rhs(
    n: usize,
    g: &[f64; MAX_N],
    dl: &[[f64; MAX_N]; MAX_N],
    vel: &[f64; MAX_N],
    v: &[f64],
    dv: &mut [f64],
) {
    for k in 0..n {
        let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
        for a in 0..n {
            s1 += dl[a][k] * vel[a];
            s2 += dl[a][k] * v[a];
            s3 += g[a] / g[k] * dl[k][a] * vel[a] * v[a];
        }
        dv[k] = -0.5 * (v[k] * s1 + vel[k] * s2 - s3);
    }
}

/// `⟨X, Y⟩` for the chart metric.
#[inline]
pub fn inner(g: &[f64], x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).zip(g).map(|((a, b), gi)| a * b * gi).sum()
}
