//! Integration driver with on-line event detection.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use super::dop853::{Dop853, Segment, Stats};
use super::flow::{inner, Flow, MAX_N};
use crate::error::{Error, Result};
use crate::integrals::{first_integrals, Integrals, PhaseState, SpectralData};
use crate::manifold::Manifold;

/// Initial data: a phase point and optional variational directions `δη_d(0)` (with `δφ_d(0) = 0`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub state: PhaseState,
    pub deta: Vec<Vec<f64>>,
    /// Transport one frame vector per variation, `V_d(0) = Y_d'(0)/|Y_d'(0)|`.
    pub frames: bool,
}

/// When to stop before the horizon.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    /// Required number of zeros of each scalarized `y_r` (index = variation).
    pub zeros: Vec<usize>,
    /// Coordinates `i` (1-based) whose `t_i` must be found.
    pub t_needed: Vec<usize>,
    /// `(i, k)`: at least `k` positive elements of `S_i` (1-based `i`).
    pub s_needed: Vec<(usize, usize)>,
}

impl StopRule {
    pub fn is_empty(&self) -> bool {
        self.zeros.iter().all(|&z| z == 0) && self.t_needed.is_empty() && self.s_needed.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    pub rtol: f64,
    pub atol: f64,
    pub horizon: f64,
    /// Sub-samples per accepted step for sign-change detection.
    pub sub_samples: usize,
    pub keep_segments: bool,
    /// Also run the dual-form and Hamiltonian-frame cross-checks (slower).
    pub cross_checks: bool,
    pub stop: StopRule,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            rtol: 1e-11,
            atol: 1e-12,
            horizon: 20.0,
            sub_samples: 8,
            keep_segments: false,
            cross_checks: false,
            stop: StopRule::default(),
        }
    }
}

/// Largest deviations of the first integrals from their initial values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationLedger {
    pub initial: Integrals,
    pub max_drift_f: Vec<f64>,
    pub max_drift_energy: f64,
}

impl ConservationLedger {
    pub fn max_f_drift(&self) -> f64 {
        self.max_drift_f.iter().fold(0.0, |m, v| m.max(*v))
    }

    /// `ConservationBreach` if either tolerance is exceeded.
    pub fn check(&self, tol_f: f64, tol_e: f64) -> Result<()> {
        if self.max_f_drift() >= tol_f {
            return Err(Error::ConservationBreach { what: "F_j".into(), drift: self.max_f_drift() });
        }
        if self.max_drift_energy >= tol_e {
            return Err(Error::ConservationBreach { what: "2E".into(), drift: self.max_drift_energy });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TurnKind {
    /// `f_i` at the lower end `a_i^+`.
    Low,
    /// `f_i` at the upper end `a_{i−1}^−`.
    High,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TurnEvent {
    pub t: f64,
    pub kind: TurnKind,
    pub f: f64,
    pub x: f64,
    /// `σ_i` at this turning point.
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroEvent {
    pub t: f64,
    /// `dy/dt` at the zero.
    pub slope: f64,
    pub phi: Vec<f64>,
    pub x: Vec<f64>,
}

/// Event lists for `f_1, …, f_n` (index `i − 1`).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EventLedger {
    pub turning: Vec<Vec<TurnEvent>>,
    /// `2(a_{i−1}^− − a_i^+)`.
    pub sigma_target: Vec<f64>,
    pub t: Vec<Option<f64>>,
    /// Positive elements `s_i^k` of `S_i` for `i = 1..n−1`.
    pub s: Vec<Vec<f64>>,
    /// Whether `0 ∈ S_i`.
    pub zero_in_s: Vec<bool>,
    /// Whether `S_i` is read from `f_i = b_i` (true) or `f_{i+1} = b_i` (false).
    pub s_on_own: Vec<bool>,
}

/// Scalarized Jacobi fields `Y_r = y_r V_r` and the frame diagnostics.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JacobiBundle {
    /// `|Y_r'(0)|`.
    pub norms0: Vec<f64>,
    pub zeros: Vec<Vec<ZeroEvent>>,
    /// Largest `|Gram(γ', V_1, …) − I|`.
    pub frame_error: f64,
    /// Largest `|Y_r − y_r V_r| / max|Y_r|`.
    pub orth_residual: f64,
    /// Largest `|⟨Y_r, γ'⟩| / max|Y_r|`.
    pub tangent_residual: f64,
    /// Largest normalized `|ω̃_i(V_k)|`, `|ω̃_i(γ')|` (cross-check runs only).
    pub dual_form_residual: f64,
    /// Largest `1 − |⟨V_r, W_r⟩|` against the normalized `π_* X_{H_r}` (cross-check runs only).
    pub hamiltonian_frame_deviation: f64,
    pub provenance: String,
    pub double_zero_suspected: bool,
}

impl JacobiBundle {
    pub fn first_zero(&self, r: usize) -> Option<f64> {
        self.zeros.get(r).and_then(|z| z.first()).map(|e| e.t)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeodesicTrace {
    pub n: usize,
    pub initial: PhaseState,
    pub spectral: SpectralData,
    pub t_end: f64,
    pub final_state: Vec<f64>,
    pub ledger: ConservationLedger,
    pub events: EventLedger,
    pub jacobi: Option<JacobiBundle>,
    /// Stop rule satisfied before the horizon.
    pub complete: bool,
    #[serde(skip)]
    pub segments: Vec<Segment>,
    #[serde(skip)]
    pub stats: Stats,
    pub nvar: usize,
    pub nframe: usize,
}

impl GeodesicTrace {
    /// Dense state at `t` (requires kept segments).
    pub fn state_at(&self, t: f64) -> Option<Vec<f64>> {
        let k = self.segments.partition_point(|s| s.t1() < t);
        self.segments.get(k).map(|s| s.eval(t))
    }

    pub fn t(&self, i: usize) -> Option<f64> {
        self.events.t[i - 1]
    }

    /// Scalarized `y_r(t)` from the dense output (requires kept segments and frames).
    pub fn y_at(&self, m: &Manifold, t: f64, r: usize) -> Option<f64> {
        let jac = self.jacobi.as_ref()?;
        if r >= self.nframe {
            return None;
        }
        let st = self.state_at(t)?;
        let flow = Flow::new(m, self.nvar, self.nframe);
        let g = flow.geometry::<f64>(&st[..self.n]).g;
        let (o, fo) = (flow.var_offset(r), flow.frame_offset(r));
        Some(inner(&g[..self.n], &st[o..o + self.n], &st[fo..fo + self.n]) / jac.norms0[r])
    }
}

pub const SLOPE_TOL: f64 = 1e-6;

/// Shortfall of `σ_i` at a turning point, relative to the width of the chart, that still counts as reaching `t_i`.
const SIGMA_SNAP: f64 = 1e-9;

/// Integrate with event detection.
pub fn integrate_geodesic(m: &Manifold, init: &InitialData, opts: &TraceOptions) -> Result<GeodesicTrace> {
    let n = m.n();
    let nvar = init.deta.len();
    let nframe = if init.frames { nvar } else { 0 };
    let flow = Flow::new(m, nvar, nframe);
    let mut y0 = vec![0.0; flow.dim()];
    y0[..n].copy_from_slice(&init.state.phi);
    y0[n..2 * n].copy_from_slice(&init.state.eta);
    let g0 = flow.geometry::<f64>(&init.state.phi).g;
    let mut norms0 = Vec::with_capacity(nvar);
    for (d, de) in init.deta.iter().enumerate() {
        let o = flow.var_offset(d);
        y0[o + n..o + 2 * n].copy_from_slice(de);
        // Y'(0) = δη/G since δφ(0) = 0.
        let yp: Vec<f64> = (0..n).map(|k| de[k] / g0[k]).collect();
        let norm = inner(&g0[..n], &yp, &yp).sqrt();
        if init.frames && !(norm > 1e-14) {
            return Err(Error::FrameDegenerate);
        }
        norms0.push(norm);
        if init.frames {
            let fo = flow.frame_offset(d);
            for k in 0..n {
                y0[fo + k] = yp[k] / norm;
            }
        }
    }

    let f0 = init.state.f(m);
    let xi0 = init.state.xi(m);
    let ints0 = first_integrals(m.a(), &f0, &xi0)?;
    let spectral = crate::integrals::b_from_f(m.a(), &ints0)?;

    let mut tr = Tracker::new(m, flow, opts, spectral.clone(), ints0.clone(), norms0, &y0);
    let solver = Dop853 { rtol: opts.rtol, atol: opts.atol, ..Default::default() };
    let stats = solver.integrate(|_t, y, dy| flow.rhs(y, dy), 0.0, &y0, opts.horizon, |seg| tr.process(seg))?;

    let complete = tr.done();
    let jacobi = if nframe > 0 {
        let mut jb = tr.jacobi;
        jb.orth_residual = tr.max_orth / tr.max_y.iter().fold(1e-300_f64, |a, b| a.max(*b));
        jb.tangent_residual = tr.max_tan / tr.max_y.iter().fold(1e-300_f64, |a, b| a.max(*b));
        Some(jb)
    } else {
        None
    };
    Ok(GeodesicTrace {
        n,
        initial: init.state.clone(),
        spectral,
        t_end: tr.t_last,
        final_state: tr.prev_state.clone(),
        ledger: tr.ledger,
        events: tr.events,
        jacobi,
        complete,
        segments: tr.segments,
        stats,
        nvar,
        nframe,
    })
}

struct CoordTrack {
    sign: f64,
    sigma_last: f64,
    f_last: f64,
}

struct Tracker<'a> {
    m: &'a Manifold,
    flow: Flow<'a>,
    opts: &'a TraceOptions,
    spectral: SpectralData,
    ledger: ConservationLedger,
    events: EventLedger,
    jacobi: JacobiBundle,
    coords: Vec<CoordTrack>,
    ysign: Vec<f64>,
    max_y: Vec<f64>,
    max_orth: f64,
    max_tan: f64,
    prev_t: f64,
    prev_state: Vec<f64>,
    buf: Vec<f64>,
    t_last: f64,
    segments: Vec<Segment>,
}

impl<'a> Tracker<'a> {
    fn new(
        m: &'a Manifold,
        flow: Flow<'a>,
        opts: &'a TraceOptions,
        spectral: SpectralData,
        ints0: Integrals,
        norms0: Vec<f64>,
        y0: &[f64],
    ) -> Self {
        let n = flow.n;
        let tol = 1e-12;
        let mut events = EventLedger {
            turning: vec![Vec::new(); n],
            sigma_target: (1..=n)
                .map(|i| {
                    let (lo, hi) = spectral.range(i);
                    2.0 * (hi - lo).max(0.0)
                })
                .collect(),
            t: vec![None; n],
            s: vec![Vec::new(); n.saturating_sub(1)],
            zero_in_s: vec![false; n.saturating_sub(1)],
            s_on_own: (1..n).map(|i| spectral.b[i - 1] >= m.a()[i]).collect(),
        };
        let mut coords = Vec::with_capacity(n);
        for i in 0..n {
            let p = y0[i].sin() * y0[n + i];
            let f = m.charts[i].f(y0[i]);
            // Starting at a turning point: the direction is read off the first sample.
            let start_turn = p.abs() <= tol;
            if start_turn {
                push_turn(m, &spectral, &mut events, i, 0.0, y0[i], 0.0);
            }
            let sign = if start_turn { 0.0 } else { sgn(p) };
            let f_last = if start_turn { band_end(&spectral, i, f) } else { f };
            coords.push(CoordTrack { sign, sigma_last: 0.0, f_last });
        }
        let nvar = flow.nvar;
        Tracker {
            m,
            flow,
            opts,
            spectral,
            ledger: ConservationLedger {
                max_drift_f: vec![0.0; ints0.f.len()],
                initial: ints0,
                max_drift_energy: 0.0,
            },
            events,
            jacobi: JacobiBundle {
                norms0,
                zeros: vec![Vec::new(); nvar],
                provenance: "parallel-transport".into(),
                ..Default::default()
            },
            coords,
            ysign: vec![1.0; nvar],
            max_y: vec![0.0; nvar],
            max_orth: 0.0,
            max_tan: 0.0,
            prev_t: 0.0,
            prev_state: y0.to_vec(),
            buf: vec![0.0; y0.len()],
            t_last: 0.0,
            segments: Vec::new(),
        }
    }

    fn done(&self) -> bool {
        let rule = &self.opts.stop;
        if rule.is_empty() {
            return false;
        }
        let zeros_ok = rule.zeros.iter().enumerate().all(|(r, &k)| self.jacobi.zeros.get(r).map_or(k == 0, |z| z.len() >= k));
        let t_ok = rule.t_needed.iter().all(|&i| self.events.t[i - 1].is_some());
        let s_ok = rule.s_needed.iter().all(|&(i, k)| self.events.s[i - 1].len() >= k);
        zeros_ok && t_ok && s_ok
    }

    fn process(&mut self, seg: &Segment) -> ControlFlow<()> {
        let n = self.flow.n;
        let ns = self.opts.sub_samples.max(2);
        for j in 1..=ns {
            let t = if j == ns { seg.t1() } else { seg.t0 + seg.h * j as f64 / ns as f64 };
            let mut cur = std::mem::take(&mut self.buf);
            seg.eval_into(t, &mut cur);
            let ta = self.prev_t;
            for i in 0..n {
                let p = cur[i].sin() * cur[n + i];
                let s = sgn(p);
                let track_sign = self.coords[i].sign;
                if track_sign == 0.0 {
                    self.coords[i].sign = s;
                    self.sigma_piece(seg, i, ta, t, self.m.charts[i].f(cur[i]));
                } else if s != 0.0 && s != track_sign {
                    let root = bisect(|tt| {
                        let ph = seg.eval_component(tt, i);
                        ph.sin() * seg.eval_component(tt, n + i)
                    }, ta, t);
                    let phr = seg.eval_component(root, i);
                    // σ_i is exact at turning points: f_i sits at an end of its band.
                    let fr = band_end(&self.spectral, i, self.m.charts[i].f(phr));
                    self.sigma_turn(i, root, fr);
                    self.sigma_piece(seg, i, ta, root, fr);
                    let c = &mut self.coords[i];
                    c.sigma_last += (fr - c.f_last).abs();
                    c.f_last = fr;
                    let sigma = c.sigma_last;
                    push_turn(self.m, &self.spectral, &mut self.events, i, root, phr, sigma);
                    self.coords[i].sign = s;
                    self.sigma_piece(seg, i, root, t, self.m.charts[i].f(cur[i]));
                } else {
                    self.sigma_piece(seg, i, ta, t, self.m.charts[i].f(cur[i]));
                }
            }
            if self.flow.nframe > 0 {
                for r in 0..self.flow.nvar {
                    let v = self.y_scalar(&cur, r);
                    let s = sgn(v);
                    if s != 0.0 && s != self.ysign[r] {
                        let root = bisect(|tt| self.y_at(seg, tt, r), ta, t);
                        let dt = 1e-6 * seg.h.abs();
                        let slope = (self.y_at(seg, root + dt, r) - self.y_at(seg, root - dt, r)) / (2.0 * dt);
                        if slope.abs() < SLOPE_TOL {
                            self.jacobi.double_zero_suspected = true;
                        }
                        let st = seg.eval(root);
                        let phi = st[..n].to_vec();
                        let x = phi.iter().zip(&self.m.charts).map(|(&p, c)| c.x_of_phi(p)).collect();
                        self.jacobi.zeros[r].push(ZeroEvent { t: root, slope, phi, x });
                        self.ysign[r] = s;
                    }
                }
            }
            self.diagnostics(&cur, j == ns);
            self.prev_t = t;
            self.buf = std::mem::replace(&mut self.prev_state, cur);
        }
        self.t_last = seg.t1();
        if self.opts.keep_segments {
            self.segments.push(seg.clone());
        }
        if self.done() {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    }

    /// `t_i` at a turning point when `σ_i` reaches its target there. Bisection on the
    /// quadratic `|f − f_last|` would only resolve such a time to `√ε`.
    fn sigma_turn(&mut self, i: usize, root: f64, fr: f64) {
        if self.events.t[i].is_some() {
            return;
        }
        let target = self.events.sigma_target[i];
        let c = &self.coords[i];
        let reached = c.sigma_last + (fr - c.f_last).abs();
        if target > 0.0 && (reached - target).abs() <= self.sigma_tol(i) {
            self.events.t[i] = Some(root);
        }
    }

    fn sigma_tol(&self, i: usize) -> f64 {
        let a = self.m.a();
        SIGMA_SNAP * (a[i] - a[i + 1])
    }

    /// Monotone piece of `f_i` on `[ta, tb]` ending at `fb`; locate `t_i` if `σ_i` reaches its target here.
    fn sigma_piece(&mut self, seg: &Segment, i: usize, ta: f64, tb: f64, fb: f64) {
        if self.events.t[i].is_some() || tb <= ta {
            return;
        }
        let target = self.events.sigma_target[i];
        if target <= 0.0 {
            return;
        }
        // Within the snap tolerance the turning point decides.
        let c = &self.coords[i];
        if c.sigma_last + (fb - c.f_last).abs() < target + self.sigma_tol(i) {
            return;
        }
        let need = target - c.sigma_last;
        let f_last = c.f_last;
        let chart = &self.m.charts[i];
        let q = |tt: f64| (chart.f(seg.eval_component(tt, i)) - f_last).abs() - need;
        let root = if need <= 0.0 || q(ta) >= 0.0 {
            ta
        } else {
            bisect(q, ta, tb)
        };
        self.events.t[i] = Some(root);
    }

    fn y_scalar(&self, st: &[f64], r: usize) -> f64 {
        let n = self.flow.n;
        let g = self.flow.geometry::<f64>(&st[..n]).g;
        let o = self.flow.var_offset(r);
        let fo = self.flow.frame_offset(r);
        inner(&g[..n], &st[o..o + n], &st[fo..fo + n]) / self.jacobi.norms0[r]
    }

    fn y_at(&self, seg: &Segment, t: f64, r: usize) -> f64 {
        let st = seg.eval(t);
        self.y_scalar(&st, r)
    }

    fn diagnostics(&mut self, st: &[f64], endpoint: bool) {
        let n = self.flow.n;
        let m = self.m;
        let phi = &st[..n];
        let eta = &st[n..2 * n];
        let mut f = [0.0; MAX_N];
        let mut xi = [0.0; MAX_N];
        for k in 0..n {
            let (fk, _, hk, _) = m.charts[k].local(phi[k]);
            f[k] = fk;
            xi[k] = eta[k] / hk;
        }
        if let Ok(ints) = first_integrals(m.a(), &f[..n], &xi[..n]) {
            for (d, (a, b)) in self.ledger.max_drift_f.iter_mut().zip(ints.f.iter().zip(&self.ledger.initial.f)) {
                *d = d.max((a - b).abs());
            }
            self.ledger.max_drift_energy =
                self.ledger.max_drift_energy.max((ints.energy2 - self.ledger.initial.energy2).abs());
        }
        if self.flow.nframe == 0 {
            return;
        }
        let g = self.flow.geometry::<f64>(phi).g;
        let vel: Vec<f64> = (0..n).map(|k| eta[k] / g[k]).collect();
        let frames: Vec<&[f64]> = (0..self.flow.nframe)
            .map(|r| {
                let o = self.flow.frame_offset(r);
                &st[o..o + n]
            })
            .collect();
        let mut vecs: Vec<&[f64]> = vec![&vel];
        vecs.extend(frames.iter().copied());
        for a in 0..vecs.len() {
            for b in a..vecs.len() {
                let want = if a == b { 1.0 } else { 0.0 };
                let dev = (inner(&g[..n], vecs[a], vecs[b]) - want).abs();
                self.jacobi.frame_error = self.jacobi.frame_error.max(dev);
            }
        }
        for r in 0..self.flow.nvar {
            let o = self.flow.var_offset(r);
            let yv = &st[o..o + n];
            let v = frames[r];
            let proj = inner(&g[..n], yv, v);
            let res: Vec<f64> = (0..n).map(|k| yv[k] - proj * v[k]).collect();
            self.max_orth = self.max_orth.max(inner(&g[..n], &res, &res).sqrt());
            self.max_y[r] = self.max_y[r].max(inner(&g[..n], yv, yv).sqrt());
            self.max_tan = self.max_tan.max(inner(&g[..n], yv, &vel).abs());
        }
        if self.opts.cross_checks && endpoint {
            let h: Vec<f64> = (0..n).map(|k| m.charts[k].h(phi[k])).collect();
            let dual = super::frame::dual_form_residual(&self.spectral.b, &f[..n], &h, eta, &vel, &frames);
            self.jacobi.dual_form_residual = self.jacobi.dual_form_residual.max(dual);
            let dev = super::frame::hamiltonian_frame_deviation(&self.spectral.b, &f[..n], &xi[..n], &h, &g[..n], &frames);
            self.jacobi.hamiltonian_frame_deviation = self.jacobi.hamiltonian_frame_deviation.max(dev);
        }
    }
}

/// The end of the band of `f_{i+1}` nearest to `f`.
fn band_end(sp: &SpectralData, i: usize, f: f64) -> f64 {
    let (lo, hi) = sp.range(i + 1);
    if (f - lo).abs() <= (hi - f).abs() {
        lo
    } else {
        hi
    }
}

fn push_turn(m: &Manifold, sp: &SpectralData, ev: &mut EventLedger, i: usize, t: f64, phi: f64, sigma: f64) {
    let chart = &m.charts[i];
    let f = chart.f(phi);
    let (lo, hi) = sp.range(i + 1);
    let kind = if (f - lo).abs() <= (hi - f).abs() { TurnKind::Low } else { TurnKind::High };
    ev.turning[i].push(TurnEvent { t, kind, f, x: chart.x_of_phi(phi), sigma });
    let n = m.n();
    // S_i from f_i at its lower end b_i, or S_{i−1} from f_i at its upper end b_{i−1}.
    if kind == TurnKind::Low && i + 1 < n && ev.s_on_own[i] {
        record_s(ev, i, t);
    }
    if kind == TurnKind::High && i >= 1 && !ev.s_on_own[i - 1] {
        record_s(ev, i - 1, t);
    }
}

fn record_s(ev: &mut EventLedger, k: usize, t: f64) {
    if t == 0.0 {
        ev.zero_in_s[k] = true;
    } else {
        ev.s[k].push(t);
    }
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Bisection for a sign change of `q` on `[a, b]`.
pub fn bisect<F: FnMut(f64) -> f64>(mut q: F, mut a: f64, mut b: f64) -> f64 {
    let mut qa = q(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b || (b - a) <= 1e-14 * (1.0 + a.abs()) {
            break;
        }
        let qm = q(mid);
        if qm == 0.0 {
            return mid;
        }
        if (qm > 0.0) == (qa > 0.0) {
            a = mid;
            qa = qm;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}
