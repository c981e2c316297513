//! One full conjugate-locus computation with every invariant evaluated.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cusp::{count_cusps_2d, cusp_classify, CuspCount, CuspEvidence, CuspOptions};
use super::d4::{d4_classify, D4Options, D4Report};
use super::field::{check_ordering, grid_u, kth_conjugate_check, ConjugateField, FieldOptions, KthReport, OrderingReport};
use super::locus::{diameter, expected_label, SingularityLabel};
use crate::error::Result;
use crate::manifold::{embed, BasePoint, Manifold};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    pub field: FieldOptions,
    pub max_hole_rate: f64,
    /// Required fraction of successful cusp fits.
    pub cusp_success: f64,
    pub cusp: CuspOptions,
    pub d4: D4Options,
    /// Samples per circle for the n=2 cusp count.
    pub count_samples: usize,
    /// Round sphere: spread of `r` and diameter of the locus.
    pub sphere_r_tol: f64,
    pub sphere_diameter_tol: f64,
    /// Only fit cones at `∂C_j^+` for this `j`.
    pub d4_index: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            field: FieldOptions { second_zero: true, ..Default::default() },
            max_hole_rate: 0.01,
            cusp_success: 0.95,
            cusp: CuspOptions::default(),
            d4: D4Options::default(),
            count_samples: 256,
            sphere_r_tol: 1e-6,
            sphere_diameter_tol: 1e-5,
            d4_index: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CuspSummary {
    pub i: usize,
    pub total: usize,
    pub passed: usize,
    pub success_rate: f64,
    pub evidence: Vec<CuspEvidence>,
    pub errors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereCheck {
    pub r_spread: f64,
    pub locus_diameter: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugateRun {
    pub n: usize,
    pub round_sphere: bool,
    pub hole_rate: f64,
    pub ordering: Option<OrderingReport>,
    pub kth: Option<KthReport>,
    pub cusps: Vec<CuspSummary>,
    pub cusp_count: Option<CuspCount>,
    pub d4: Vec<D4Report>,
    pub d4_errors: Vec<String>,
    pub sphere: Option<SphereCheck>,
    pub pass: bool,
}

/// Indices `i` whose cusp fits are meaningful: always `n−1`, the others only when
/// `K_i` is certified as a conjugate locus of the expected order.
fn cusp_indices(n: usize, kth: Option<&KthReport>) -> Vec<usize> {
    let certified = kth.is_some_and(|k| k.certified);
    (1..n).filter(|&i| i == n - 1 || certified).collect()
}

pub fn cusp_summary(m: &Manifold, p0: &BasePoint, field: &ConjugateField, i: usize, opts: &CuspOptions) -> CuspSummary {
    let dims = field.n - 1;
    let targets: Vec<Vec<f64>> = field
        .samples
        .iter()
        .enumerate()
        .filter_map(|(idx, s)| {
            let u = grid_u(idx, dims, field.per_axis);
            let cell = s.as_ref().map(|s| s.label.clone())?;
            matches!(expected_label(&cell, i), SingularityLabel::CuspidalEdge { .. }).then_some(u)
        })
        .collect();
    let results: Vec<Result<CuspEvidence>> = targets.par_iter().map(|u| cusp_classify(m, p0, i, u, opts)).collect();
    let mut out = CuspSummary { i, total: targets.len(), ..Default::default() };
    for (u, r) in targets.iter().zip(results) {
        match r {
            Ok(e) => {
                if e.pass {
                    out.passed += 1;
                }
                out.evidence.push(e);
            }
            Err(e) => out.errors.push(format!("u={u:?}: {e}")),
        }
    }
    out.success_rate = if out.total == 0 { 1.0 } else { out.passed as f64 / out.total as f64 };
    out
}

fn sphere_check(m: &Manifold, field: &ConjugateField, opts: &RunOptions) -> SphereCheck {
    let rs: Vec<f64> = field.samples.iter().flatten().flat_map(|s| s.r.iter().copied()).collect();
    let lo = rs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pts: Vec<Vec<f64>> = field
        .samples
        .iter()
        .flatten()
        .flat_map(|s| s.phi.iter().map(|phi| embed(m, phi).unwrap_or_else(|_| s.x[0].clone())))
        .collect();
    let d = diameter(&pts);
    let spread = hi - lo;
    SphereCheck {
        r_spread: spread,
        locus_diameter: d,
        pass: field.hole_rate() == 0.0 && spread <= opts.sphere_r_tol && d <= opts.sphere_diameter_tol,
    }
}

/// Field plus every check that applies to this manifold.
pub fn run_conjugate(m: &Manifold, p0: &BasePoint, opts: &RunOptions) -> Result<(ConjugateField, ConjugateRun)> {
    let n = m.n();
    let field = ConjugateField::compute(m, p0, &opts.field)?;
    let round_sphere = m.spec.profile.is_constant();
    if round_sphere {
        let sphere = sphere_check(m, &field, opts);
        let run = ConjugateRun {
            n,
            round_sphere,
            hole_rate: field.hole_rate(),
            ordering: None,
            kth: None,
            cusps: Vec::new(),
            cusp_count: None,
            d4: Vec::new(),
            d4_errors: Vec::new(),
            pass: sphere.pass,
            sphere: Some(sphere),
        };
        return Ok((field, run));
    }
    let ordering = check_ordering(&field, opts.field.eq_tol, opts.max_hole_rate);
    let kth = if opts.field.second_zero { kth_conjugate_check(&field).ok() } else { None };
    let cusps: Vec<CuspSummary> = cusp_indices(n, kth.as_ref())
        .into_iter()
        .map(|i| cusp_summary(m, p0, &field, i, &opts.cusp))
        .collect();
    let cusp_count = if n == 2 { Some(count_cusps_2d(m, p0, opts.count_samples, &opts.field)?) } else { None };

    let mut d4 = Vec::new();
    let mut d4_errors = Vec::new();
    if n == 3 {
        let corners: Vec<Vec<f64>> = field.samples.iter().flatten().filter(|s| s.label.on_boundary()).map(|s| s.u.clone()).collect();
        for u in corners {
            let j = classify_boundary(&u, opts.field.label_tol);
            if opts.d4_index.is_some_and(|want| want != j) {
                continue;
            }
            match d4_classify(m, p0, j, &u, &opts.d4) {
                Ok(r) => d4.push(r),
                Err(e) => d4_errors.push(format!("u={u:?}: {e}")),
            }
        }
    }
    let cusps_ok = cusps.iter().all(|c| c.success_rate >= opts.cusp_success);
    let count_ok = cusp_count.as_ref().is_none_or(|c| c.count == 4);
    let d4_ok = d4_errors.is_empty() && d4.iter().all(|r| r.pass);
    let pass = ordering.pass && cusps_ok && count_ok && d4_ok;
    let hole_rate = field.hole_rate();
    Ok((
        field,
        ConjugateRun {
            n,
            round_sphere,
            hole_rate,
            ordering: Some(ordering),
            kth,
            cusps,
            cusp_count,
            d4,
            d4_errors,
            sphere: None,
            pass,
        },
    ))
}

fn classify_boundary(u: &[f64], tol: f64) -> usize {
    crate::integrals::classify_cell(u, tol).boundary[0]
}
