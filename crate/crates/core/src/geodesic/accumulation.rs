//! Distances between the zeros `r_i^k` of `y_i` and the turning times `s_i^k`.

use serde::{Deserialize, Serialize};

use super::initial::from_u;
use super::trace::{integrate_geodesic, StopRule, TraceOptions};
use crate::error::{Error, Result};
use crate::manifold::Manifold;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccumulationReport {
    pub i: usize,
    /// Base coordinate compared (`i` when `S_i` comes from `f_i`, else `i + 1`).
    pub coordinate: usize,
    /// `S_i` from the lower end of `f_i` (`b_i = a_i^+`) or the upper end of `f_{i+1}`.
    pub upper_side: bool,
    pub r: Vec<f64>,
    /// Turning times paired with `r`: `s_i^k` when `b_i = a_i^+`, `s_i^{k+1}` otherwise.
    pub s: Vec<f64>,
    /// `|x(r_i^k) − x(s_i^k)|` for `k = 1..K`.
    pub gaps: Vec<f64>,
    pub strictly_decreasing: bool,
}

/// Follow `y_i` through `k_max` zeros along the geodesic from `φ0` in direction `u`.
pub fn asymptotic_accumulation(
    m: &Manifold,
    phi0: &[f64],
    u: &[f64],
    i: usize,
    k_max: usize,
    opts: &TraceOptions,
) -> Result<AccumulationReport> {
    let n = m.n();
    if !(1..n).contains(&i) {
        return Err(Error::InvalidConfig(format!("index {i} out of range for n = {n}")));
    }
    let init = from_u(m, phi0, u, true)?;
    let mut zeros = vec![0; n - 1];
    zeros[i - 1] = k_max;
    let o = TraceOptions { stop: StopRule { zeros, s_needed: vec![(i, k_max + 1)], ..Default::default() }, ..opts.clone() };
    let tr = integrate_geodesic(m, &init, &o)?;
    if !tr.spectral.generic() {
        return Err(Error::NotApplicable("spectral values are not generic".into()));
    }
    if !tr.complete {
        return Err(Error::NotReached { what: format!("{k_max} zeros of y_{i}"), horizon: opts.horizon });
    }
    let jb = tr.jacobi.as_ref().ok_or(Error::FrameDegenerate)?;
    let own = tr.events.s_on_own[i - 1];
    let coordinate = if own { i } else { i + 1 };
    let turns = &tr.events.turning[coordinate - 1];
    let zs = &jb.zeros[i - 1][..k_max];
    // r_i^k lies in (s_i^k, s_i^{k+1}); it closes in on the left end when b_i = a_i^+
    // and on the right end when b_i = a_i^−.
    let shift = usize::from(!own);
    let ss = &tr.events.s[i - 1][shift..k_max + shift];
    let mut gaps = Vec::with_capacity(k_max);
    for (z, &s) in zs.iter().zip(ss) {
        let turn = turns
            .iter()
            .min_by(|a, b| (a.t - s).abs().total_cmp(&(b.t - s).abs()))
            .ok_or_else(|| Error::NotReached { what: "turning point".into(), horizon: opts.horizon })?;
        gaps.push((z.x[coordinate - 1] - turn.x).abs());
    }
    let strictly_decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
    Ok(AccumulationReport {
        i,
        coordinate,
        upper_side: own,
        r: zs.iter().map(|z| z.t).collect(),
        s: ss.to_vec(),
        gaps,
        strictly_decreasing,
    })
}
