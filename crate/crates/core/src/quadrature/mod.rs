//! Hyperelliptic quadrature: the vanishing sums, the sign inequalities, and the
//! quadrature form of the orbit equations along a traced geodesic.

mod gk;
mod hyperelliptic;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use gk::{gauss_legendre8, gk15, integrate, Estimate, GkOptions};
pub use hyperelliptic::{interval, interval_sum, singular_integral, HyperellipticIntegrand, Numerator, Weight};

use crate::error::{Error, Result};
use crate::geodesic::GeodesicTrace;
use crate::manifold::{AProfile, Manifold};
use crate::poly::Poly;

/// Relative FD step for derivatives in `b_i`.
pub const FD_STEP: f64 = 1e-5;

/// `b` strictly ordered inside `(a_{i+1}, a_{i−1})`, separated by `min_gap` from every `a_k` and each other.
pub fn admissible(a: &[f64], b: &[f64], min_gap: f64) -> bool {
    let n = a.len() - 1;
    if b.len() + 1 != n {
        return false;
    }
    for i in 1..n {
        let bi = b[i - 1];
        if !(bi > a[i + 1] && bi < a[i - 1]) {
            return false;
        }
        if i > 1 && !(bi < b[i - 2]) {
            return false;
        }
        if a.iter().chain(b.iter().filter(|&&x| x != bi)).any(|&x| (x - bi).abs() < min_gap) {
            return false;
        }
    }
    true
}

/// Uniform admissible `b` by rejection.
pub fn random_admissible_b<R: Rng>(a: &[f64], rng: &mut R, min_gap: f64) -> Vec<f64> {
    let n = a.len() - 1;
    loop {
        let mut b: Vec<f64> = (1..n).map(|i| rng.random_range(a[i + 1]..a[i - 1])).collect();
        // Consecutive ranges overlap; sorting keeps each b_i in its own range.
        b.sort_by(|x, y| y.total_cmp(x));
        if admissible(a, &b, min_gap) {
            return b;
        }
    }
}

/// `Σ_l (−1)^l ∫ λ^m dλ / √(…)` for `m = 0..n−2`.
pub fn abel_residuals(a: &[f64], b: &[f64], opts: &GkOptions) -> Result<Vec<Estimate>> {
    let n = a.len() - 1;
    (0..n.saturating_sub(1))
        .map(|m| interval_sum(a, b, &Numerator::monomial(m), &Weight::One, alt, opts))
        .collect()
}

fn alt(l: usize) -> f64 {
    if l % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The sign statements, with 1-based indices into `b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum SignCase {
    /// Weighted sum with `G = Π_{j∈I}(λ − b_j)`, `#I ≤ n − 3`; positive.
    P1 { subset: Vec<usize> },
    /// `∂/∂b_i` with `G = Π_{k≠i}(λ − b_k)`; negative.
    P2Full { i: usize },
    /// `∂/∂b_i` with `G = Π_{k≠i,j}(λ − b_k)`; positive.
    P2Pair { i: usize, j: usize },
    /// `∂²/∂b_i²` with `G = Π_{k≠i}(λ − b_k)`; positive.
    P3 { i: usize },
}

impl SignCase {
    pub fn expected_positive(&self) -> bool {
        !matches!(self, SignCase::P2Full { .. })
    }

    pub fn id(&self) -> String {
        match self {
            SignCase::P1 { subset } => format!("P1{subset:?}"),
            SignCase::P2Full { i } => format!("P2[{i}]"),
            SignCase::P2Pair { i, j } => format!("P2[{i},{j}]"),
            SignCase::P3 { i } => format!("P3[{i}]"),
        }
    }

    /// Every case for dimension `n` (P1 over all subsets with `#I ≤ n − 3`; none at `n = 2`).
    pub fn all(n: usize) -> Vec<SignCase> {
        let m = n - 1;
        let mut out = Vec::new();
        if n >= 3 {
            for mask in 0u32..(1 << m) {
                if mask.count_ones() as usize <= n - 3 {
                    let subset = (1..=m).filter(|k| mask & (1 << (k - 1)) != 0).collect();
                    out.push(SignCase::P1 { subset });
                }
            }
        }
        for i in 1..=m {
            out.push(SignCase::P2Full { i });
            for j in (1..=m).filter(|&j| j != i) {
                out.push(SignCase::P2Pair { i, j });
            }
            out.push(SignCase::P3 { i });
        }
        out
    }
}

/// One evaluated sign statement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignReport {
    #[serde(rename = "caseId")]
    pub case_id: String,
    pub case: SignCase,
    pub b: Vec<f64>,
    pub value: f64,
    #[serde(rename = "errorEstimate")]
    pub error_estimate: f64,
    pub pass: bool,
}

fn roots_except(b: &[f64], skip: &[usize]) -> Numerator {
    let roots = b.iter().enumerate().filter(|(k, _)| !skip.contains(&(k + 1))).map(|(_, &v)| v).collect();
    Numerator::Roots { scale: 1.0, roots }
}

/// Value of one sign statement; derivatives by Richardson-extrapolated central differences.
pub fn inequality_sign(a: &[f64], profile: &AProfile, b: &[f64], case: &SignCase, opts: &GkOptions) -> Result<SignReport> {
    let n = a.len() - 1;
    let weight = Weight::ATilde(profile.clone());
    let (value, error) = match case {
        SignCase::P1 { subset } => {
            if n < 3 || subset.len() > n - 3 {
                return Err(Error::NotApplicable(format!("P1 needs #I ≤ n − 3 (n = {n})")));
            }
            let roots = subset.iter().map(|&j| b[j - 1]).collect();
            let s = subset.len();
            let e = interval_sum(
                a,
                b,
                &Numerator::Roots { scale: 1.0, roots },
                &weight,
                |l| if (n - l + s) % 2 == 0 { 1.0 } else { -1.0 },
                opts,
            )?;
            (e.value, e.error)
        }
        SignCase::P2Full { i } | SignCase::P3 { i } => {
            let g = roots_except(b, &[*i]);
            let order = if matches!(case, SignCase::P3 { .. }) { 2 } else { 1 };
            fd_in_b(a, b, *i, order, |bb| interval_sum(a, bb, &g, &weight, alt, opts).map(|e| e.value))?
        }
        SignCase::P2Pair { i, j } => {
            let g = roots_except(b, &[*i, *j]);
            fd_in_b(a, b, *i, 1, |bb| interval_sum(a, bb, &g, &weight, alt, opts).map(|e| e.value))?
        }
    };
    let pass = if case.expected_positive() { value > 0.0 } else { value < 0.0 };
    Ok(SignReport { case_id: case.id(), case: case.clone(), b: b.to_vec(), value, error_estimate: error, pass })
}

/// Step `h = FD_STEP (a_0 − a_n)`, shrunk to a quarter of the distance from `b_i` to its neighbours.
pub fn fd_step(a: &[f64], b: &[f64], i: usize) -> f64 {
    let width = a[0] - a[a.len() - 1];
    let bi = b[i - 1];
    let gap = a
        .iter()
        .chain(b.iter().enumerate().filter(|(k, _)| k + 1 != i).map(|(_, v)| v))
        .map(|x| (x - bi).abs())
        .fold(f64::INFINITY, f64::min);
    (FD_STEP * width).min(0.25 * gap)
}

fn fd_in_b<F: FnMut(&[f64]) -> Result<f64>>(a: &[f64], b: &[f64], i: usize, order: usize, mut s: F) -> Result<(f64, f64)> {
    let h = fd_step(a, b, i);
    let mut at = |d: f64| -> Result<f64> {
        let mut bb = b.to_vec();
        bb[i - 1] += d;
        s(&bb)
    };
    let center = if order == 2 { at(0.0)? } else { 0.0 };
    let mut diff = |h: f64| -> Result<f64> {
        let p = at(h)?;
        let m = at(-h)?;
        Ok(if order == 1 { (p - m) / (2.0 * h) } else { (p - 2.0 * center + m) / (h * h) })
    };
    let d1 = diff(h)?;
    let d2 = diff(0.5 * h)?;
    let value = (4.0 * d2 - d1) / 3.0;
    let err = (d2 - d1).abs();
    if !value.is_finite() || err > value.abs() / 10.0 {
        return Err(Error::FdUnstable { value, err });
    }
    Ok((value, err))
}

/// How a limit sequence approaches its limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitKind {
    /// `b_i ↓ a_i`.
    AboveA { i: usize },
    /// `b_i ↑ a_i`.
    BelowA { i: usize },
    /// `b_i ↑ b_{i−1}` inside `(a_i, a_{i−1})`.
    MergeUp { i: usize },
}

/// A sequence `b^k → b^∞` with fixed ordering relative to the `a_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitSequence {
    pub kind: LimitKind,
    pub limit: Vec<f64>,
    pub terms: Vec<Vec<f64>>,
}

/// Relative offsets of the sequence terms from the limit.
pub const LIMIT_OFFSETS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];

/// `count` limit sequences cycling through the approach kinds.
pub fn limit_sequences<R: Rng>(a: &[f64], count: usize, rng: &mut R) -> Vec<LimitSequence> {
    let n = a.len() - 1;
    let width = a[0] - a[n];
    let mut kinds = Vec::new();
    for i in 1..n {
        kinds.push(LimitKind::AboveA { i });
        kinds.push(LimitKind::BelowA { i });
        if i > 1 {
            kinds.push(LimitKind::MergeUp { i });
        }
    }
    let mut out = Vec::with_capacity(count);
    let mut k = 0;
    while out.len() < count {
        let kind = kinds[k % kinds.len()];
        k += 1;
        // Keep the other b well away from the limit point so every term stays admissible.
        let sep = 0.15 * width;
        let base = random_admissible_b(a, rng, 0.02 * width);
        let mut limit = base.clone();
        let (i, target, dir) = match kind {
            LimitKind::AboveA { i } => (i, a[i], 1.0),
            LimitKind::BelowA { i } => (i, a[i], -1.0),
            LimitKind::MergeUp { i } => {
                let lo = a[i];
                let hi = a[i - 1];
                let t = rng.random_range(lo + 0.3 * (hi - lo)..hi - 0.3 * (hi - lo));
                limit[i - 2] = t;
                (i, t, -1.0)
            }
        };
        limit[i - 1] = target;
        let terms: Vec<Vec<f64>> = LIMIT_OFFSETS
            .iter()
            .map(|&d| {
                let mut bb = limit.clone();
                bb[i - 1] = target + dir * d * sep;
                bb
            })
            .collect();
        if terms.iter().all(|t| admissible(a, t, 0.0) && ordering_preserved(a, &terms[0], t)) {
            out.push(LimitSequence { kind, limit, terms });
        }
    }
    out
}

fn ordering_preserved(a: &[f64], x: &[f64], y: &[f64]) -> bool {
    x.iter().zip(y).all(|(&bx, &by)| a.iter().all(|&ak| (bx > ak) == (by > ak)))
}

/// `Σ_i ∫_s^t (−1)^i G(f_i) |x_i'| / √((−1)^{i−1} Π_k (f_i − b_k)) dt` along a trace with kept segments,
/// minus `t − s` when `G` is monic of degree `n − 1` (the arclength form, taken with signs `(−1)^{i+1}`).
pub fn orbit_quadrature_check(m: &Manifold, trace: &GeodesicTrace, s: f64, t: f64, g: &Poly) -> Result<f64> {
    let n = m.n();
    let monic = g.degree() == n - 1;
    if g.degree() > n - 1 {
        return Err(Error::InvalidConfig("G must have degree ≤ n − 1".into()));
    }
    let sum = path_integrals(m, trace, s, t, g)?;
    let total: f64 = sum.iter().sum();
    Ok(if monic { -total - (t - s) } else { total })
}

/// The individual summands `∫_s^t (−1)^i G(f_i) |x_i'| / √(…) dt`.
pub fn path_integrals(m: &Manifold, trace: &GeodesicTrace, s: f64, t: f64, g: &Poly) -> Result<Vec<f64>> {
    let n = m.n();
    if trace.segments.is_empty() {
        return Err(Error::InvalidConfig("trace has no dense output".into()));
    }
    if !(t <= trace.t_end + 1e-12 && s >= 0.0 && s <= t) {
        return Err(Error::InvalidConfig(format!("window [{s}, {t}] outside [0, {}]", trace.t_end)));
    }
    let b = &trace.spectral.b;
    let mut out = vec![0.0; n];
    let mut state = vec![0.0; trace.segments[0].dim()];
    for seg in &trace.segments {
        let (lo, hi) = (seg.t0.max(s), seg.t1().min(t));
        if hi <= lo {
            continue;
        }
        for (i, acc) in out.iter_mut().enumerate() {
            let sign = if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
            let chart = &m.charts[i];
            let mut bad = false;
            let v = gauss_legendre8(
                |tt| {
                    seg.eval_into(tt, &mut state);
                    let phi = state[i];
                    let (f, _, h, _) = chart.local(phi);
                    let gm = crate::manifold::metric_from_f(
                        &(0..n).map(|k| m.charts[k].f(state[k])).collect::<Vec<_>>(),
                    );
                    let Ok(gm) = gm else {
                        bad = true;
                        return 0.0;
                    };
                    // dx/dt = ξ / g = η / (h g).
                    let xdot = (state[n + i] / (h * gm[i])).abs();
                    let rad_sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    let rad: f64 = rad_sign * b.iter().map(|bk| f - bk).product::<f64>();
                    if !(rad > 0.0) {
                        bad = xdot > 1e-9;
                        return 0.0;
                    }
                    sign * g.eval(f) * xdot / rad.sqrt()
                },
                lo,
                hi,
            );
            if bad || !v.is_finite() {
                return Err(Error::NearTurningPoint);
            }
            *acc += v;
        }
    }
    Ok(out)
}

/// Half-period identity: the `i`-th path summand over `[0, t_i]` against the interval integral.
pub fn half_period_check(m: &Manifold, trace: &GeodesicTrace, i: usize, g: &Poly, opts: &GkOptions) -> Result<(f64, f64)> {
    let ti = trace.t(i).ok_or(Error::NotReached { what: format!("t_{i}"), horizon: trace.t_end })?;
    let path = path_integrals(m, trace, 0.0, ti, g)?[i - 1];
    let ig = HyperellipticIntegrand {
        numerator: Numerator::Poly(g.clone()),
        weight: Weight::A(m.spec.profile.clone()),
        a: m.a().to_vec(),
        b: trace.spectral.b.clone(),
        l: i,
        signed: true,
    };
    Ok((path, singular_integral(&ig, opts)?.value))
}
