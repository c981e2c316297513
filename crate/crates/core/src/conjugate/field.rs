//! The fields `r_i(u)` over a grid on the `u` torus.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pair::{degenerate_pair, PairOptions};
use crate::error::{Error, Result};
use crate::geodesic::initial::from_u;
use crate::geodesic::trace::SLOPE_TOL;
use crate::geodesic::{integrate_geodesic, GeodesicTrace, StopRule, TraceOptions};
use crate::integrals::{classify_cell, CellLabel};
use crate::manifold::{metric_from_f, BasePoint, Manifold};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldOptions {
    /// Samples per `u` circle.
    pub per_axis: usize,
    pub horizon: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Angular tolerance for cell labels.
    pub label_tol: f64,
    /// `|r_i − r_{i−1}|` below this counts as equality.
    pub eq_tol: f64,
    /// Also record the second zero of `y_{n−1}`.
    pub second_zero: bool,
}

impl Default for FieldOptions {
    fn default() -> Self {
        FieldOptions {
            per_axis: 96,
            horizon: 60.0,
            rtol: 1e-11,
            atol: 1e-12,
            label_tol: 1e-9,
            eq_tol: 1e-8,
            second_zero: false,
        }
    }
}

impl FieldOptions {
    pub fn trace_options(&self, stop: StopRule) -> TraceOptions {
        TraceOptions { rtol: self.rtol, atol: self.atol, horizon: self.horizon, stop, ..Default::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleSource {
    /// Scalarized Jacobi fields in the `u` chart.
    UChart,
    /// Common zero of the degenerate pair at a `∂C` corner.
    DegeneratePair,
}

/// Conjugate data along the geodesic with initial direction `u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub u: Vec<f64>,
    pub label: CellLabel,
    /// `r_i(u)` for `i = 1..n−1`.
    pub r: Vec<f64>,
    /// Second zero of `y_{n−1}` when requested.
    pub r2_last: Option<f64>,
    /// Base coordinates `x(r_i(u))`, unwrapped on the covering torus.
    pub x: Vec<Vec<f64>>,
    /// Angles `φ(r_i(u))`.
    pub phi: Vec<Vec<f64>>,
    /// Unit initial direction in orthonormal coordinates `v_k = ξ_k / √g_kk`.
    pub direction: Vec<f64>,
    pub source: SampleSource,
    /// Traced at `u + 1e−5` after the geodesic at `u` met an umbilic point.
    pub perturbed: bool,
    /// On `∂C` samples: `max |r_i(u + δ) − τ_1|` for `i ∈ {j−1, j}` from the `u` chart at a small offset.
    pub pair_cross_check: Option<f64>,
}

impl FieldSample {
    /// Point `r_i(u) v` of the tangential locus.
    pub fn tangential(&self, i: usize) -> Vec<f64> {
        self.direction.iter().map(|v| v * self.r[i - 1]).collect()
    }
}

/// Unit direction at `φ0` for the covector of `u`.
pub fn direction_of_u(m: &Manifold, phi0: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let st = crate::geodesic::initial::state_from_u(m, phi0, u)?;
    let f = st.f(m);
    let g = metric_from_f(&f)?;
    Ok(st.xi(m).iter().zip(&g).map(|(x, gk)| x / gk.sqrt()).collect())
}

/// Trace from `u` with scalarized Jacobi fields until each `y_r` has the requested number of zeros.
pub fn trace_u(m: &Manifold, phi0: &[f64], u: &[f64], zeros: Vec<usize>, opts: &TraceOptions) -> Result<GeodesicTrace> {
    let init = from_u(m, phi0, u, true)?;
    let mut o = opts.clone();
    o.stop.zeros = zeros;
    integrate_geodesic(m, &init, &o)
}

/// Offset applied to every `u_k` when the exact geodesic runs into an umbilic point.
pub const UMBILIC_NUDGE: f64 = 1e-5;

/// Conjugate sample at `u` through the `u` chart.
///
/// Geodesics with `b_i = a_i` pass through umbilic points where the angular chart is
/// singular; those are retraced once at a nearby `u`, which moves `r_i` by `O(1e−5)`.
pub fn sample_u(m: &Manifold, p0: &BasePoint, u: &[f64], opts: &FieldOptions) -> Result<FieldSample> {
    match sample_u_exact(m, p0, u, opts) {
        Err(Error::StepUnderflow { .. }) => {
            let v: Vec<f64> = u.iter().map(|x| x + UMBILIC_NUDGE).collect();
            let mut s = sample_u_exact(m, p0, &v, opts)?;
            s.u = u.to_vec();
            s.label = classify_cell(u, opts.label_tol);
            s.perturbed = true;
            Ok(s)
        }
        other => other,
    }
}

fn sample_u_exact(m: &Manifold, p0: &BasePoint, u: &[f64], opts: &FieldOptions) -> Result<FieldSample> {
    let n = m.n();
    let mut zeros = vec![1; n - 1];
    if opts.second_zero {
        zeros[n - 2] = 2;
    }
    let tr = trace_u(m, &p0.phi, u, zeros.clone(), &opts.trace_options(StopRule::default()))?;
    let jb = tr.jacobi.as_ref().ok_or(Error::FrameDegenerate)?;
    if !tr.complete {
        return Err(Error::NotReached { what: "first zeros".into(), horizon: opts.horizon });
    }
    if jb.double_zero_suspected {
        for (r, zs) in jb.zeros.iter().enumerate() {
            if let Some(e) = zs.iter().find(|e| e.slope.abs() < SLOPE_TOL) {
                return Err(Error::DoubleZeroSuspected { i: r + 1, t: e.t, slope: e.slope });
            }
        }
    }
    let r = (0..n - 1).map(|k| jb.zeros[k][0].t).collect();
    let x = (0..n - 1).map(|k| jb.zeros[k][0].x.clone()).collect();
    let phi = (0..n - 1).map(|k| jb.zeros[k][0].phi.clone()).collect();
    let r2_last = if opts.second_zero { jb.zeros[n - 2].get(1).map(|e| e.t) } else { None };
    Ok(FieldSample {
        u: u.to_vec(),
        label: classify_cell(u, opts.label_tol),
        r,
        r2_last,
        x,
        phi,
        direction: direction_of_u(m, &p0.phi, u)?,
        source: SampleSource::UChart,
        perturbed: false,
        pair_cross_check: None,
    })
}

/// Offset of the `u`-chart cross-check next to a `∂C` corner.
pub const PAIR_OFFSET: f64 = 1e-4;

/// Conjugate sample at `u`, switching to the degenerate pair on `∂C` corners.
pub fn sample(m: &Manifold, p0: &BasePoint, u: &[f64], opts: &FieldOptions) -> Result<FieldSample> {
    let label = classify_cell(u, opts.label_tol);
    if label.boundary.is_empty() {
        return sample_u(m, p0, u, opts);
    }
    let n = m.n();
    let j = label.boundary[0];
    let pair = degenerate_pair(m, p0, j, (0.0, 0.0), u, &PairOptions { horizon: opts.horizon, ..Default::default() })?;
    // r_{j−1} = r_j = τ_1; the other indices come from the u chart slightly off the corner.
    let mut r = vec![0.0; n - 1];
    let mut x = vec![Vec::new(); n - 1];
    let mut phi = vec![Vec::new(); n - 1];
    let others: Vec<usize> = (1..n).filter(|&i| i != j && i != j - 1).collect();
    // The u chart just off the corner supplies the other indices and an independent
    // estimate of τ_1 (r moves by O(|ν|) = O(δ²) there).
    let mut nudged = u.to_vec();
    nudged[j - 2] += PAIR_OFFSET;
    nudged[j - 1] += PAIR_OFFSET;
    let off = sample_u(m, p0, &nudged, opts)?;
    for &i in &others {
        r[i - 1] = off.r[i - 1];
        x[i - 1] = off.x[i - 1].clone();
        phi[i - 1] = off.phi[i - 1].clone();
    }
    let r2_last = off.r2_last;
    let cross = (off.r[j - 2] - pair.tau1).abs().max((off.r[j - 1] - pair.tau1).abs());
    for i in [j - 1, j] {
        r[i - 1] = pair.tau1;
        x[i - 1] = pair.x_at_tau.clone();
        phi[i - 1] = pair.phi_at_tau.clone();
    }
    Ok(FieldSample {
        u: u.to_vec(),
        label,
        r,
        r2_last,
        x,
        phi,
        direction: direction_of_u(m, &p0.phi, u)?,
        source: SampleSource::DegeneratePair,
        perturbed: false,
        pair_cross_check: Some(cross),
    })
}

/// `r_i(u)` for every `i` over the full grid `u_k ∈ 2π·(0..N)/N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugateField {
    pub base: BasePoint,
    pub n: usize,
    pub per_axis: usize,
    pub samples: Vec<Option<FieldSample>>,
    /// Error text per hole, same indexing as `samples`.
    pub failures: Vec<Option<String>>,
}

/// Grid angle `k`.
pub fn grid_angle(k: usize, per_axis: usize) -> f64 {
    2.0 * PI * k as f64 / per_axis as f64
}

impl ConjugateField {
    pub fn compute(m: &Manifold, p0: &BasePoint, opts: &FieldOptions) -> Result<Self> {
        let n = m.n();
        if n < 2 {
            return Err(Error::UnsupportedDimension(n));
        }
        let dims = n - 1;
        let total = opts.per_axis.pow(dims as u32);
        let results: Vec<Result<FieldSample>> = (0..total)
            .into_par_iter()
            .map(|idx| {
                let u = grid_u(idx, dims, opts.per_axis);
                sample(m, p0, &u, opts)
            })
            .collect();
        let mut samples = Vec::with_capacity(total);
        let mut failures = Vec::with_capacity(total);
        for r in results {
            match r {
                Ok(s) => {
                    samples.push(Some(s));
                    failures.push(None);
                }
                Err(e) => {
                    samples.push(None);
                    failures.push(Some(e.to_string()));
                }
            }
        }
        Ok(ConjugateField { base: p0.clone(), n, per_axis: opts.per_axis, samples, failures })
    }

    pub fn hole_rate(&self) -> f64 {
        self.samples.iter().filter(|s| s.is_none()).count() as f64 / self.samples.len().max(1) as f64
    }

    pub fn r(&self, i: usize) -> Vec<Option<f64>> {
        self.samples.iter().map(|s| s.as_ref().map(|s| s.r[i - 1])).collect()
    }

    /// Linear index of the neighbour of `idx` shifted by `step` along axis `k` (periodic).
    pub fn shift(&self, idx: usize, k: usize, step: isize) -> usize {
        let n = self.per_axis as isize;
        let stride = self.per_axis.pow(k as u32);
        let coord = (idx / stride) as isize % n;
        let new = (coord + step).rem_euclid(n);
        (idx as isize + (new - coord) * stride as isize) as usize
    }

    /// `∂r_i/∂u_k` by central differences with one Richardson level; `None` near holes.
    pub fn gradient(&self, i: usize, k: usize, idx: usize) -> Option<f64> {
        let h = 2.0 * PI / self.per_axis as f64;
        let at = |step: isize| self.samples[self.shift(idx, k - 1, step)].as_ref().map(|s| s.r[i - 1]);
        let d1 = (at(1)? - at(-1)?) / (2.0 * h);
        let d2 = (at(2)? - at(-2)?) / (4.0 * h);
        Some((4.0 * d1 - d2) / 3.0)
    }
}

/// `u` of linear grid index `idx` (first axis fastest).
pub fn grid_u(idx: usize, dims: usize, per_axis: usize) -> Vec<f64> {
    let mut rest = idx;
    (0..dims)
        .map(|_| {
            let k = rest % per_axis;
            rest /= per_axis;
            grid_angle(k, per_axis)
        })
        .collect()
}

/// Ordering `r_i ≤ r_{i−1}` across the grid.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub checked: usize,
    pub holes: usize,
    pub hole_rate: f64,
    /// Samples with `r_i > r_{i−1} + eq_tol`.
    pub violations: Vec<OrderingIssue>,
    /// Samples with `|r_i − r_{i−1}| ≤ eq_tol` off the `∂` cells.
    pub equal_off_boundary: Vec<OrderingIssue>,
    /// Samples on `∂` cells, with their gaps.
    pub boundary_samples: Vec<OrderingIssue>,
    pub min_gap_off_boundary: f64,
    /// Largest `|r_i(∂) − r_i(nb)| / |r_i(nb) − r_i(nb₂)|` over `∂` samples and grid directions.
    pub boundary_jump_ratio: f64,
    /// Largest gap between `τ_1` and the `u`-chart values next to the corner.
    pub pair_cross_check: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderingIssue {
    pub u: Vec<f64>,
    pub i: usize,
    pub gap: f64,
}

/// Check the ordering and the equality pattern; `max_hole_rate` bounds the holes.
pub fn check_ordering(field: &ConjugateField, eq_tol: f64, max_hole_rate: f64) -> OrderingReport {
    let mut rep = OrderingReport { min_gap_off_boundary: f64::INFINITY, ..Default::default() };
    for s in &field.samples {
        let Some(s) = s else {
            rep.holes += 1;
            continue;
        };
        rep.checked += 1;
        for i in 2..field.n {
            let gap = s.r[i - 2] - s.r[i - 1];
            let on_boundary = s.label.boundary.contains(&i);
            let issue = OrderingIssue { u: s.u.clone(), i, gap };
            if gap < -eq_tol {
                rep.violations.push(issue.clone());
            }
            if on_boundary {
                rep.boundary_samples.push(issue);
            } else {
                rep.min_gap_off_boundary = rep.min_gap_off_boundary.min(gap);
                if gap.abs() <= eq_tol {
                    rep.equal_off_boundary.push(issue);
                }
            }
        }
    }
    rep.hole_rate = rep.holes as f64 / field.samples.len().max(1) as f64;
    let boundary_equal = rep.boundary_samples.iter().all(|b| b.gap.abs() <= eq_tol);
    rep.boundary_jump_ratio = boundary_jumps(field);
    rep.pair_cross_check = field.samples.iter().flatten().filter_map(|s| s.pair_cross_check).fold(0.0, f64::max);
    rep.pass = rep.violations.is_empty()
        && rep.equal_off_boundary.is_empty()
        && boundary_equal
        && rep.boundary_jump_ratio < MAX_JUMP_RATIO
        && rep.hole_rate <= max_hole_rate;
    rep
}

/// Allowed jump at a `∂` sample relative to the neighbouring grid difference.
pub const MAX_JUMP_RATIO: f64 = 10.0;

fn boundary_jumps(field: &ConjugateField) -> f64 {
    let dims = field.n - 1;
    let mut worst: f64 = 0.0;
    for (idx, s) in field.samples.iter().enumerate() {
        let Some(s) = s else { continue };
        let Some(&j) = s.label.boundary.first() else { continue };
        for k in 0..dims {
            for dir in [-1isize, 1] {
                let (a, b) = (field.shift(idx, k, dir), field.shift(idx, k, 2 * dir));
                let (Some(sa), Some(sb)) = (&field.samples[a], &field.samples[b]) else { continue };
                for i in [j - 1, j] {
                    let jump = (s.r[i - 1] - sa.r[i - 1]).abs();
                    let local = (sa.r[i - 1] - sb.r[i - 1]).abs().max(1e-12);
                    worst = worst.max(jump / local);
                }
            }
        }
    }
    worst
}

/// Whether the second zero of `y_{n−1}` exceeds every first zero `r_1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KthReport {
    pub min_second_zero: f64,
    pub max_r1: f64,
    pub holds: bool,
    /// `K_{n−i}` certified as the `i`-th conjugate locus.
    pub certified: bool,
}

pub fn kth_conjugate_check(field: &ConjugateField) -> Result<KthReport> {
    let mut min2 = f64::INFINITY;
    let mut max1: f64 = 0.0;
    for s in field.samples.iter().flatten() {
        let r2 = s.r2_last.ok_or_else(|| Error::InvalidConfig("field lacks second zeros".into()))?;
        min2 = min2.min(r2);
        max1 = max1.max(s.r[0]);
    }
    let holds = min2 > max1;
    Ok(KthReport { min_second_zero: min2, max_r1: max1, holds, certified: holds })
}
