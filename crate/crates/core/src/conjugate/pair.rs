//! The degenerate Jacobi pair `Z_{j−1}, Z_j` on `∂C_j^+` and the angle `θ(t, 0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::dop853::Segment;
use crate::geodesic::flow::{inner, Flow};
use crate::geodesic::initial::from_nu;
use crate::geodesic::{integrate_geodesic, GeodesicTrace, TraceOptions};
use crate::manifold::{BasePoint, Manifold};
use crate::quadrature::gauss_legendre8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairOptions {
    pub horizon: f64,
    pub rtol: f64,
    pub atol: f64,
    /// A local minimum of `|Z_j|` counts as a zero below this fraction of `max |Z_j|`.
    pub zero_fraction: f64,
    pub gram_samples: usize,
}

impl Default for PairOptions {
    fn default() -> Self {
        PairOptions { horizon: 60.0, rtol: 1e-12, atol: 1e-13, zero_fraction: 1e-4, gram_samples: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneratePair {
    pub j: usize,
    pub nu: (f64, f64),
    pub tau1: f64,
    /// `|Z_{j−1}(τ_1)|` and `|Z_j(τ_1)|`.
    pub z_at_tau: (f64, f64),
    /// Largest `|Z_j|` on `[0, τ_1]`.
    pub z_scale: f64,
    /// Smallest normalized Gram determinant on `[0.1 τ_1, 0.9 τ_1]`.
    pub gram_min: f64,
    /// `θ(τ_1, 0)`; only at `ν = 0`.
    pub theta_tau: Option<f64>,
    /// Smallest sampled `∂θ/∂t` on `[0, τ_1]`.
    pub theta_rate_min: Option<f64>,
    pub phi_at_tau: Vec<f64>,
    pub x_at_tau: Vec<f64>,
}

fn z_norm2(flow: &Flow, y: &[f64], d: usize) -> f64 {
    let n = flow.n;
    let g = flow.geometry::<f64>(&y[..n]).g;
    let o = flow.var_offset(d);
    inner(&g[..n], &y[o..o + n], &y[o..o + n])
}

fn seg_at(segs: &[Segment], t: f64) -> &Segment {
    let k = segs.partition_point(|s| s.t1() < t).min(segs.len() - 1);
    &segs[k]
}

fn state(segs: &[Segment], t: f64) -> Vec<f64> {
    seg_at(segs, t).eval(t)
}

/// First common zero of the pair on the geodesic through the corner direction.
pub fn degenerate_pair(
    m: &Manifold,
    p0: &BasePoint,
    j: usize,
    nu: (f64, f64),
    corner: &[f64],
    opts: &PairOptions,
) -> Result<DegeneratePair> {
    let n = m.n();
    let init = from_nu(m, &p0.phi, j, nu, corner, false)?;
    let topts = TraceOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        horizon: opts.horizon,
        keep_segments: true,
        ..Default::default()
    };
    let tr = integrate_geodesic(m, &init, &topts)?;
    let flow = Flow::new(m, 2, 0);
    let segs = &tr.segments;
    let fz = |t: f64| z_norm2(&flow, &state(segs, t), 1);

    // Scan for local minima of |Z_j|² on a sub-sampled grid.
    let mut samples = Vec::new();
    for s in segs {
        for k in 0..16 {
            let t = s.t0 + s.h * k as f64 / 16.0;
            samples.push((t, z_norm2(&flow, &s.eval(t), 1)));
        }
    }
    let mut scale: f64 = 0.0;
    let mut best = f64::INFINITY;
    let mut tau = None;
    for w in 1..samples.len().saturating_sub(1) {
        scale = scale.max(samples[w - 1].1);
        let (a, b, c) = (samples[w - 1].1, samples[w].1, samples[w + 1].1);
        if !(b <= a && b <= c) {
            continue;
        }
        let t = refine_minimum(&fz, samples[w - 1].0, samples[w + 1].0);
        let v = fz(t);
        best = best.min(v.sqrt() / scale.sqrt().max(1e-300));
        if v.sqrt() <= opts.zero_fraction * scale.sqrt() {
            tau = Some(t);
            break;
        }
    }
    let tau1 = tau.ok_or(Error::NoCommonZero { min_norm: best })?;
    let y = state(segs, tau1);
    let z_at_tau = (z_norm2(&flow, &y, 0).sqrt(), z_norm2(&flow, &y, 1).sqrt());

    let mut gram_min = f64::INFINITY;
    for k in 0..=opts.gram_samples {
        let t = tau1 * (0.1 + 0.8 * k as f64 / opts.gram_samples as f64);
        let y = state(segs, t);
        let g = flow.geometry::<f64>(&y[..n]).g;
        let (o0, o1) = (flow.var_offset(0), flow.var_offset(1));
        let (a, b) = (&y[o0..o0 + n], &y[o1..o1 + n]);
        let (aa, bb, ab) = (inner(&g[..n], a, a), inner(&g[..n], b, b), inner(&g[..n], a, b));
        gram_min = gram_min.min((aa * bb - ab * ab) / (aa * bb));
    }

    let (theta_tau, theta_rate_min) = if nu == (0.0, 0.0) {
        let (th, rate) = theta_at_zero_nu(m, p0, j, &tr, tau1)?;
        (Some(th), Some(rate))
    } else {
        (None, None)
    };

    let phi_at_tau = y[..n].to_vec();
    let x_at_tau = (0..n).map(|k| m.charts[k].x_of_phi(phi_at_tau[k])).collect();
    Ok(DegeneratePair {
        j,
        nu,
        tau1,
        z_at_tau,
        z_scale: scale.sqrt(),
        gram_min,
        theta_tau,
        theta_rate_min,
        phi_at_tau,
        x_at_tau,
    })
}

/// Minimize a smooth bracketed function by bisection on its centered difference.
fn refine_minimum(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        let dt = 1e-4 * (b - a).max(1e-9);
        if f(mid + dt) > f(mid - dt) {
            b = mid;
        } else {
            a = mid;
        }
        if b - a < 1e-14 * (1.0 + mid.abs()) {
            break;
        }
    }
    0.5 * (a + b)
}

/// `θ(τ, 0)` together with the smallest sampled rate `∂θ/∂t`.
///
/// The rate is `(1/A_1(f_{j,0})) Σ_{i≠j} √((−1)^{i−1} P_i) |ẋ_i| / |f_i − f_{j,0}|` with
/// `P_i = Π_{k≠j−1,j} (f_i − b_k)`, integrated piecewise between turning points.
pub fn theta_at_zero_nu(m: &Manifold, p0: &BasePoint, j: usize, tr: &GeodesicTrace, tau: f64) -> Result<(f64, f64)> {
    let n = m.n();
    let a = m.a();
    let fj0 = p0.f[j - 1];
    let b = &tr.spectral.b;
    let others: Vec<f64> = (1..n).filter(|&k| k != j && k + 1 != j).map(|k| b[k - 1]).collect();
    let lam = fj0;
    let num: f64 = others.iter().map(|bk| lam - bk).product::<f64>().abs().sqrt();
    let den: f64 = a.iter().map(|al| lam - al).product::<f64>().abs().sqrt();
    let a1 = num * m.spec.profile.value(lam) / (2.0 * den);
    if !(a1 > 0.0) {
        return Err(Error::NotApplicable("A_1 vanishes at f_{j,0}".into()));
    }

    let flow = Flow::new(m, 0, 0);
    let rate = |t: f64| -> f64 {
        let y = state(&tr.segments, t);
        let big_g = flow.geometry::<f64>(&y[..n]).g;
        let mut s = 0.0;
        for i in (0..n).filter(|&i| i + 1 != j) {
            let (f, _, h, _) = m.charts[i].local(y[i]);
            let p: f64 = others.iter().map(|bk| f - bk).product::<f64>().abs();
            // ẋ = h η / G.
            let xdot = h * y[n + i] / big_g[i];
            s += p.sqrt() * xdot.abs() / (f - fj0).abs();
        }
        s / a1
    };

    // Break points: segment ends and turning points of every coordinate.
    let mut cuts: Vec<f64> = tr.segments.iter().map(|s| s.t0).filter(|&t| t < tau).collect();
    for turns in &tr.events.turning {
        cuts.extend(turns.iter().map(|e| e.t).filter(|&t| t > 0.0 && t < tau));
    }
    cuts.push(tau);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut theta = 0.0;
    let mut rmin = f64::INFINITY;
    for w in cuts.windows(2) {
        theta += gauss_legendre8(rate, w[0], w[1]);
        rmin = rmin.min(rate(0.5 * (w[0] + w[1])));
    }
    Ok((theta, rmin))
}
