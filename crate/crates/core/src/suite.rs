//! The aggregate property suite behind `liouville suite`.
//!
//! Every check draws from its own ChaCha8 stream derived from one seed, and all
//! maps are ordered, so a report depends only on the configuration.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::initial::{from_u, state_from_u};
use crate::geodesic::{asymptotic_accumulation, integrate_geodesic, GeodesicTrace, InitialData, StopRule, TraceOptions};
use crate::manifold::{AProfile, Manifold};
use crate::quadrature::{
    abel_residuals, inequality_sign, limit_sequences, random_admissible_b, GkOptions, SignCase, SignReport,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub dimensions: Vec<usize>,
    pub b_samples: usize,
    pub limit_sequences: usize,
    pub conservation_geodesics: usize,
    pub conservation_horizon: f64,
    pub ordering_geodesics: usize,
    pub boundary_cases: usize,
    pub accumulation_geodesics: usize,
    pub accumulation_zeros: usize,
    pub horizon: f64,
    pub tol: Tolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub abel: f64,
    pub drift: f64,
    pub boundary: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { abel: 1e-8, drift: 1e-8, boundary: 1e-6 }
    }
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            dimensions: vec![2, 3, 4],
            b_samples: 100,
            limit_sequences: 10,
            conservation_geodesics: 100,
            conservation_horizon: 20.0,
            ordering_geodesics: 500,
            boundary_cases: 20,
            accumulation_geodesics: 5,
            accumulation_zeros: 20,
            horizon: 60.0,
            tol: Tolerances::default(),
        }
    }
}

impl SuiteConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    /// `.toml` by extension, JSON otherwise.
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Self::from_toml_str(&text),
            _ => Self::from_json_str(&text),
        }
    }

    /// Positive tolerances and horizons, supported dimensions.
    pub fn check(&self) -> Result<()> {
        let positive = [self.tol.abel, self.tol.drift, self.tol.boundary, self.horizon, self.conservation_horizon];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidConfig("tolerances and horizons must be positive and finite".into()));
        }
        if let Some(&n) = self.dimensions.iter().find(|&&n| !(2..=5).contains(&n)) {
            return Err(Error::UnsupportedDimension(n));
        }
        Ok(())
    }
}

/// Outcome of one suite.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteVerdict {
    pub pass: bool,
    pub checked: usize,
    pub failures: usize,
    pub metrics: BTreeMap<String, f64>,
    /// First few failure descriptions.
    pub notes: Vec<String>,
}

const MAX_NOTES: usize = 20;

impl SuiteVerdict {
    fn fail(&mut self, note: String) {
        self.failures += 1;
        if self.notes.len() < MAX_NOTES {
            self.notes.push(note);
        }
    }

    fn max_metric(&mut self, key: &str, v: f64) {
        let e = self.metrics.entry(key.to_string()).or_insert(f64::NEG_INFINITY);
        *e = e.max(v);
    }

    fn min_metric(&mut self, key: &str, v: f64) {
        let e = self.metrics.entry(key.to_string()).or_insert(f64::INFINITY);
        *e = e.min(v);
    }

    fn close(mut self) -> Self {
        self.pass = self.failures == 0 && self.checked > 0;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub suites: BTreeMap<String, SuiteVerdict>,
    pub pass: bool,
}

/// Ellipsoid spectrum `(n+1, n, …, 1)`.
pub fn fixture_a(n: usize) -> Vec<f64> {
    (1..=n + 1).rev().map(|k| k as f64).collect()
}

pub fn ellipsoid(n: usize) -> Result<Manifold> {
    Manifold::from_parts(&fixture_a(n), AProfile::sqrt())
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Base fractions kept away from the branch locus.
pub fn random_fractions<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.05..0.95)).collect()
}

/// Direction angles kept away from the special values `kπ/2`.
pub fn random_u<R: Rng>(dims: usize, rng: &mut R) -> Vec<f64> {
    (0..dims)
        .map(|_| {
            let q = rng.random_range(0..4) as f64 * FRAC_PI_2;
            q + rng.random_range(0.02..FRAC_PI_2 - 0.02)
        })
        .collect()
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport> {
    cfg.check()?;
    let mut suites = BTreeMap::new();
    suites.insert("abel".to_string(), abel_suite(cfg)?);
    suites.insert("signs".to_string(), sign_suite(cfg)?);
    suites.insert("conservation".to_string(), conservation_suite(cfg)?);
    suites.insert("ordering".to_string(), ordering_suite(cfg)?);
    suites.insert("accumulation".to_string(), accumulation_suite(cfg)?);
    let pass = suites.values().all(|v| v.pass);
    Ok(SuiteReport { config: cfg.clone(), suites, pass })
}

pub fn abel_suite(cfg: &SuiteConfig) -> Result<SuiteVerdict> {
    let mut v = SuiteVerdict::default();
    let opts = GkOptions::default();
    for &n in &cfg.dimensions {
        let a = fixture_a(n);
        let mut rng = rng_for(cfg.seed, 10 + n as u64);
        let width = a[0] - a[n];
        let bs: Vec<Vec<f64>> = (0..cfg.b_samples).map(|_| random_admissible_b(&a, &mut rng, 0.02 * width)).collect();
        let key = format!("max_residual_n{n}");
        v.metrics.insert(key.clone(), 0.0);
        for b in bs {
            v.checked += 1;
            match abel_residuals(&a, &b, &opts) {
                Ok(res) => {
                    let worst = res.iter().fold(0.0_f64, |m, e| m.max(e.value.abs()));
                    v.max_metric(&key, worst);
                    if worst >= cfg.tol.abel {
                        v.fail(format!("n={n} b={b:?} residual {worst:e}"));
                    }
                }
                Err(e) => v.fail(format!("n={n} b={b:?}: {e}")),
            }
        }
    }
    Ok(v.close())
}

fn record_sign(v: &mut SuiteVerdict, n: usize, b: &[f64], case: &SignCase, r: Result<SignReport>) {
    v.checked += 1;
    match r {
        Ok(rep) => {
            let signed = if case.expected_positive() { rep.value } else { -rep.value };
            v.min_metric(&format!("min_signed_value_n{n}"), signed);
            if !rep.pass {
                v.fail(format!("n={n} {} b={b:?} value {:e}", rep.case_id, rep.value));
            }
        }
        Err(e) => v.fail(format!("n={n} {} b={b:?}: {e}", case.id())),
    }
}

pub fn sign_suite(cfg: &SuiteConfig) -> Result<SuiteVerdict> {
    let mut v = SuiteVerdict::default();
    let opts = GkOptions::default();
    let profile = AProfile::sqrt();
    for &n in &cfg.dimensions {
        let a = fixture_a(n);
        let width = a[0] - a[n];
        let mut rng = rng_for(cfg.seed, 20 + n as u64);
        let cases = SignCase::all(n);
        let bs: Vec<Vec<f64>> = (0..cfg.b_samples).map(|_| random_admissible_b(&a, &mut rng, 0.02 * width)).collect();
        let seqs = limit_sequences(&a, cfg.limit_sequences, &mut rng);
        let mut all_b = bs;
        for s in &seqs {
            all_b.extend(s.terms.iter().cloned());
        }
        let results: Vec<(Vec<f64>, SignCase, Result<SignReport>)> = all_b
            .par_iter()
            .flat_map_iter(|b| cases.iter().map(move |c| (b.clone(), c.clone())))
            .map(|(b, c)| {
                let r = inequality_sign(&a, &profile, &b, &c, &opts);
                (b, c, r)
            })
            .collect();
        for (b, c, r) in results {
            record_sign(&mut v, n, &b, &c, r);
        }
        v.metrics.insert(format!("limit_sequences_n{n}"), seqs.len() as f64);
    }
    Ok(v.close())
}

pub fn conservation_suite(cfg: &SuiteConfig) -> Result<SuiteVerdict> {
    let m = ellipsoid(2)?;
    let mut rng = rng_for(cfg.seed, 30);
    let inits: Vec<(Vec<f64>, Vec<f64>)> =
        (0..cfg.conservation_geodesics).map(|_| (random_fractions(2, &mut rng), random_u(1, &mut rng))).collect();
    let opts = TraceOptions { horizon: cfg.conservation_horizon, ..Default::default() };
    let results: Vec<Result<GeodesicTrace>> = inits
        .par_iter()
        .map(|(s, u)| {
            let p = m.point_from_fractions(s)?;
            let state = state_from_u(&m, &p.phi, u)?;
            integrate_geodesic(&m, &InitialData { state, deta: Vec::new(), frames: false }, &opts)
        })
        .collect();
    let mut v = SuiteVerdict::default();
    v.metrics.insert("max_f_drift".into(), 0.0);
    v.metrics.insert("max_energy_drift".into(), 0.0);
    for ((s, u), r) in inits.iter().zip(results) {
        v.checked += 1;
        match r {
            Ok(tr) => {
                let d = tr.ledger.max_f_drift();
                v.max_metric("max_f_drift", d);
                v.max_metric("max_energy_drift", tr.ledger.max_drift_energy);
                if d >= cfg.tol.drift || tr.t_end < cfg.conservation_horizon {
                    v.fail(format!("p={s:?} u={u:?} drift {d:e} t_end {}", tr.t_end));
                }
            }
            Err(e) => v.fail(format!("p={s:?} u={u:?}: {e}")),
        }
    }
    Ok(v.close())
}

/// Trace with frames until the first zeros, all `t_i`, and `s_i^1`.
pub fn ordering_trace(m: &Manifold, phi0: &[f64], u: &[f64], horizon: f64) -> Result<GeodesicTrace> {
    let n = m.n();
    let init = from_u(m, phi0, u, true)?;
    let stop = StopRule {
        zeros: vec![1; n - 1],
        t_needed: (1..=n).collect(),
        s_needed: (1..n).map(|i| (i, 1)).collect(),
    };
    let tr = integrate_geodesic(m, &init, &TraceOptions { horizon, stop, ..Default::default() })?;
    if !tr.complete {
        return Err(Error::NotReached { what: "ordering events".into(), horizon });
    }
    Ok(tr)
}

/// Strict chain `t_n < … < t_1` and `t_{j+1} < r_j < t_j` where `0 ∉ S_j`.
pub fn ordering_violations(tr: &GeodesicTrace) -> Vec<String> {
    let n = tr.n;
    let jb = tr.jacobi.as_ref().expect("frames requested");
    let t: Vec<f64> = (1..=n).map(|i| tr.t(i).unwrap_or(f64::NAN)).collect();
    let mut out = Vec::new();
    for i in 1..n {
        if !(t[i] < t[i - 1]) {
            out.push(format!("t_{} = {} !< t_{} = {}", i + 1, t[i], i, t[i - 1]));
        }
    }
    for j in 1..n {
        if tr.events.zero_in_s[j - 1] {
            continue;
        }
        let r = jb.first_zero(j - 1).unwrap_or(f64::NAN);
        if !(t[j] < r && r < t[j - 1]) {
            out.push(format!("r_{j} = {r} not in ({}, {})", t[j], t[j - 1]));
        }
    }
    out
}

/// Boundary case: `u_i = ±π/2` gives `b_i = f_{i,0}` (`a_i^+`), `u_i ∈ {0, π}` gives `b_i = f_{i+1,0}` (`a_i^−`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCase {
    pub fractions: Vec<f64>,
    pub u: Vec<f64>,
    pub i: usize,
    pub upper: bool,
}

pub fn boundary_cases<R: Rng>(n: usize, count: usize, rng: &mut R) -> Vec<BoundaryCase> {
    (0..count)
        .map(|k| {
            let fractions = random_fractions(n, rng);
            let mut u = random_u(n - 1, rng);
            let i = 1 + k % (n - 1);
            let upper = (k / (n - 1)) % 2 == 0;
            let half = if rng.random_bool(0.5) { 0.0 } else { PI };
            u[i - 1] = if upper { half + FRAC_PI_2 } else { half };
            BoundaryCase { fractions, u, i, upper }
        })
        .collect()
}

/// `max |r_i − s_i^1|, |r_i − t_·|` on a boundary case, with `t_i` (upper) or `t_{i+1}`.
pub fn boundary_gap(m: &Manifold, c: &BoundaryCase, horizon: f64) -> Result<f64> {
    let p = m.point_from_fractions(&c.fractions)?;
    let tr = ordering_trace(m, &p.phi, &c.u, horizon)?;
    if !tr.events.zero_in_s[c.i - 1] || tr.events.s_on_own[c.i - 1] != c.upper {
        return Err(Error::NotApplicable(format!("0 ∉ S_{} for the constructed case", c.i)));
    }
    let r = tr.jacobi.as_ref().and_then(|j| j.first_zero(c.i - 1)).ok_or(Error::FrameDegenerate)?;
    let s1 = tr.events.s[c.i - 1][0];
    let t = tr.t(if c.upper { c.i } else { c.i + 1 }).unwrap_or(f64::NAN);
    Ok((r - s1).abs().max((r - t).abs()))
}

pub fn ordering_suite(cfg: &SuiteConfig) -> Result<SuiteVerdict> {
    let m = ellipsoid(3)?;
    let mut rng = rng_for(cfg.seed, 40);
    let inits: Vec<(Vec<f64>, Vec<f64>)> =
        (0..cfg.ordering_geodesics).map(|_| (random_fractions(3, &mut rng), random_u(2, &mut rng))).collect();
    let cases = boundary_cases(3, cfg.boundary_cases, &mut rng);
    let traced: Vec<Result<GeodesicTrace>> = inits
        .par_iter()
        .map(|(s, u)| ordering_trace(&m, &m.point_from_fractions(s)?.phi, u, cfg.horizon))
        .collect();
    let mut v = SuiteVerdict::default();
    let mut zero_in_s = 0;
    for ((s, u), r) in inits.iter().zip(traced) {
        v.checked += 1;
        match r {
            Ok(tr) => {
                zero_in_s += tr.events.zero_in_s.iter().filter(|&&z| z).count();
                for msg in ordering_violations(&tr) {
                    v.fail(format!("p={s:?} u={u:?}: {msg}"));
                }
            }
            Err(e) => v.fail(format!("p={s:?} u={u:?}: {e}")),
        }
    }
    v.metrics.insert("random_with_zero_in_s".into(), zero_in_s as f64);
    v.metrics.insert("max_boundary_gap".into(), 0.0);
    let gaps: Vec<Result<f64>> = cases.par_iter().map(|c| boundary_gap(&m, c, cfg.horizon)).collect();
    for (c, g) in cases.iter().zip(gaps) {
        v.checked += 1;
        match g {
            Ok(g) => {
                v.max_metric("max_boundary_gap", g);
                if g >= cfg.tol.boundary {
                    v.fail(format!("boundary {c:?}: gap {g:e}"));
                }
            }
            Err(e) => v.fail(format!("boundary {c:?}: {e}")),
        }
    }
    Ok(v.close())
}

pub fn accumulation_suite(cfg: &SuiteConfig) -> Result<SuiteVerdict> {
    let m = ellipsoid(2)?;
    let mut rng = rng_for(cfg.seed, 50);
    let inits: Vec<(Vec<f64>, Vec<f64>)> =
        (0..cfg.accumulation_geodesics).map(|_| (random_fractions(2, &mut rng), random_u(1, &mut rng))).collect();
    let k = cfg.accumulation_zeros;
    let opts = TraceOptions { horizon: 40.0 * k as f64, ..Default::default() };
    let results: Vec<_> = inits
        .par_iter()
        .map(|(s, u)| asymptotic_accumulation(&m, &m.point_from_fractions(s)?.phi, u, 1, k, &opts))
        .collect();
    let mut v = SuiteVerdict::default();
    for ((s, u), r) in inits.iter().zip(results) {
        v.checked += 1;
        match r {
            Ok(rep) => {
                v.max_metric("max_last_gap", *rep.gaps.last().unwrap_or(&f64::NAN));
                if !rep.strictly_decreasing {
                    v.fail(format!("p={s:?} u={u:?}: gaps {:?}", rep.gaps));
                }
            }
            Err(e) => v.fail(format!("p={s:?} u={u:?}: {e}")),
        }
    }
    Ok(v.close())
}
