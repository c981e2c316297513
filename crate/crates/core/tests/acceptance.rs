//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! Built with `harness = false` so the lines are printed even when `cargo test`
//! captures output.

use std::f64::consts::{FRAC_PI_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use liouville_core::conjugate::{
    check_ordering, count_cusps_2d, cusp_summary, d4_classify, run_conjugate, ConjugateField, CuspOptions,
    D4Options, FieldOptions, RunOptions,
};
use liouville_core::geodesic::{asymptotic_accumulation, TraceOptions};
use liouville_core::manifold::{AProfile, Manifold};
use liouville_core::suite::{
    abel_suite, conservation_suite, ordering_suite, run_suite, sign_suite, SuiteConfig, SuiteVerdict,
};

struct Line {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

fn run(id: usize, name: &'static str, budget_s: u64, f: impl FnOnce() -> (bool, String)) -> Line {
    let t0 = Instant::now();
    let (pass, detail) = f();
    let elapsed = t0.elapsed();
    let budget = Duration::from_secs(budget_s);
    Line { id, name, pass: pass && elapsed <= budget, detail, elapsed, budget }
}

fn verdict(v: &SuiteVerdict) -> (bool, String) {
    let metrics: Vec<String> = v.metrics.iter().map(|(k, x)| format!("{k}={x:.3e}")).collect();
    let mut detail = format!("checked {} failures {} {}", v.checked, v.failures, metrics.join(" "));
    if let Some(n) = v.notes.first() {
        detail.push_str(&format!(" first: {n}"));
    }
    (v.pass, detail)
}

fn err(e: impl std::fmt::Display) -> (bool, String) {
    (false, format!("error: {e}"))
}

fn sqrt_manifold(a: &[f64]) -> Manifold {
    Manifold::from_parts(a, AProfile::sqrt()).unwrap()
}

const N3: [f64; 4] = [4.0, 3.0, 2.0, 1.0];
const N3_BASE: [f64; 3] = [0.3, 0.6, 0.45];

fn main() -> ExitCode {
    let cfg = SuiteConfig::default();
    let mut lines = Vec::new();

    lines.push(run(1, "Abel residuals < 1e-8, n=2,3,4, 100 b each", 60, || match abel_suite(&cfg) {
        Ok(v) => verdict(&v),
        Err(e) => err(e),
    }));

    lines.push(run(2, "sign suite P1/P2/P3, 100 b per n + 10 limit sequences", 300, || match sign_suite(&cfg) {
        Ok(v) => verdict(&v),
        Err(e) => err(e),
    }));

    lines.push(run(3, "F_j drift < 1e-8 over T=20 on (3,2,1), 100 geodesics", 120, || match conservation_suite(&cfg) {
        Ok(v) => verdict(&v),
        Err(e) => err(e),
    }));

    lines.push(run(4, "t3<t2<t1, t_{j+1}<r_j<t_j, 500 geodesics + 20 boundary cases", 600, || {
        match ordering_suite(&cfg) {
            Ok(v) => verdict(&v),
            Err(e) => err(e),
        }
    }));

    // Shared by criteria 5, 7 and 8.
    let m3 = sqrt_manifold(&N3);
    let p3 = m3.point_from_fractions(&N3_BASE).unwrap();
    let mut field3 = None;
    lines.push(run(5, "r2 <= r1 on 96x96, equality only at boundary cells, holes <= 1%", 1800, || {
        let f = match ConjugateField::compute(&m3, &p3, &FieldOptions::default()) {
            Ok(f) => f,
            Err(e) => return err(e),
        };
        let o = check_ordering(&f, 1e-8, 0.01);
        let detail = format!(
            "checked {} holes {} ({:.2}%) violations {} equal off boundary {} boundary cells {} min off-boundary gap {:.3e} jump ratio {:.3} pair cross-check {:.2e}",
            o.checked,
            o.holes,
            100.0 * o.hole_rate,
            o.violations.len(),
            o.equal_off_boundary.len(),
            o.boundary_samples.len(),
            o.min_gap_off_boundary,
            o.boundary_jump_ratio,
            o.pair_cross_check,
        );
        field3 = Some(f);
        (o.pass, detail)
    }));

    let m2 = sqrt_manifold(&[3.0, 2.0, 1.0]);
    lines.push(run(6, "n=2 (3,2,1): exactly 4 cusps at 5 base points", 300, || {
        let bases = [[0.3, 0.6], [0.7, 0.2], [0.85, 0.35], [0.15, 0.8], [0.55, 0.45]];
        let mut counts = Vec::new();
        for s in bases {
            let p = m2.point_from_fractions(&s).unwrap();
            match count_cusps_2d(&m2, &p, 256, &FieldOptions::default()) {
                Ok(c) => counts.push(c.count),
                Err(e) => return err(format!("base {s:?}: {e}")),
            }
        }
        (counts.iter().all(|&c| c == 4), format!("counts {counts:?}"))
    }));

    lines.push(run(7, "cubic cusp fits succeed at >= 95% of interior C_i^± samples (n=2, n=3)", 600, || {
        let opts = CuspOptions::default();
        let p2 = m2.point_from_fractions(&[0.3, 0.6]).unwrap();
        let f2 = match ConjugateField::compute(&m2, &p2, &FieldOptions { per_axis: 256, ..Default::default() }) {
            Ok(f) => f,
            Err(e) => return err(e),
        };
        let mut parts = vec![cusp_summary(&m2, &p2, &f2, 1, &opts)];
        let Some(f3) = field3.as_ref() else { return err("n=3 field unavailable") };
        parts.extend((1..3).map(|i| cusp_summary(&m3, &p3, f3, i, &opts)));
        let mut ok = true;
        let mut desc = Vec::new();
        for (label, s) in ["n=2 i=1", "n=3 i=1", "n=3 i=2"].iter().zip(&parts) {
            ok &= s.total > 0 && s.success_rate >= 0.95;
            desc.push(format!("{label}: {}/{} ({} errors)", s.passed, s.total, s.errors.len()));
        }
        (ok, desc.join(", "))
    }));

    lines.push(run(8, "n=3 j=2 nu=0: |Z|<1e-7, theta=2pi±1e-5, cone residual < 5%", 300, || {
        let opts = D4Options::default();
        let corners = [[0.0, FRAC_PI_2], [PI, FRAC_PI_2], [0.0, -FRAC_PI_2], [PI, -FRAC_PI_2]];
        let mut ok = true;
        let mut desc = Vec::new();
        for c in corners {
            match d4_classify(&m3, &p3, 2, &c, &opts) {
                Ok(r) => {
                    let (z1, z2) = r.pair.z_at_tau;
                    let th = r.pair.theta_tau.unwrap_or(f64::NAN);
                    let pass = z1 < 1e-7 && z2 < 1e-7 && (th - 2.0 * PI).abs() <= 1e-5 && r.cone.residual < 0.05 && r.pass;
                    ok &= pass;
                    desc.push(format!(
                        "u={c:.3?} tau1={:.6} |Z1|={z1:.1e} |Z2|={z2:.1e} theta-2pi={:.1e} cone={:.3} sig={:?}",
                        r.pair.tau1,
                        th - 2.0 * PI,
                        r.cone.residual,
                        r.cone.signature
                    ));
                }
                Err(e) => {
                    ok = false;
                    desc.push(format!("u={c:?}: {e}"));
                }
            }
        }
        (ok, desc.join("; "))
    }));

    lines.push(run(9, "constant A: all r_i equal to 1e-6, locus diameter < 1e-5", 60, || {
        let mut ok = true;
        let mut desc = Vec::new();
        for (a, s, grid) in [(vec![3.0, 2.0, 1.0], vec![0.3, 0.6], 64), (N3.to_vec(), N3_BASE.to_vec(), 16)] {
            let m = Manifold::from_parts(&a, AProfile::constant(1.0)).unwrap();
            let p = m.point_from_fractions(&s).unwrap();
            let opts = RunOptions { field: FieldOptions { per_axis: grid, ..Default::default() }, ..Default::default() };
            match run_conjugate(&m, &p, &opts) {
                Ok((_, run)) => {
                    let sp = run.sphere.expect("constant profile runs the sphere check");
                    ok &= sp.pass;
                    desc.push(format!("n={} spread {:.1e} diameter {:.1e}", m.n(), sp.r_spread, sp.locus_diameter));
                }
                Err(e) => {
                    ok = false;
                    desc.push(format!("n={}: {e}", m.n()));
                }
            }
        }
        (ok, desc.join(", "))
    }));

    lines.push(run(10, "n=2 K=20: accumulation gaps strictly decreasing", 120, || {
        let p = m2.point_from_fractions(&[0.3, 0.6]).unwrap();
        let opts = TraceOptions { horizon: 800.0, ..Default::default() };
        let mut ok = true;
        let mut desc = Vec::new();
        // Two directions with b_1 = a_1^+ and two with b_1 = a_1^−.
        for u in [0.4, 1.2, 2.0, 2.9] {
            match asymptotic_accumulation(&m2, &p.phi, &[u], 1, 20, &opts) {
                Ok(r) => {
                    ok &= r.strictly_decreasing && r.gaps.len() == 20;
                    desc.push(format!(
                        "u={u} {} gaps {:.2e}..{:.2e}",
                        if r.upper_side { "a+" } else { "a-" },
                        r.gaps[0],
                        r.gaps.last().unwrap()
                    ));
                }
                Err(e) => {
                    ok = false;
                    desc.push(format!("u={u}: {e}"));
                }
            }
        }
        (ok, desc.join(", "))
    }));

    lines.push(run(11, "suite twice with the same seed gives byte-identical reports", 600, || {
        let cfg = SuiteConfig { seed: 11, ..Default::default() };
        let bytes = || run_suite(&cfg).and_then(|r| Ok(serde_json::to_vec_pretty(&r)?));
        match (bytes(), bytes()) {
            (Ok(x), Ok(y)) => (x == y, format!("{} bytes, identical {}", x.len(), x == y)),
            (Err(e), _) | (_, Err(e)) => err(e),
        }
    }));

    let mut all = true;
    for l in &lines {
        all &= l.pass;
        println!(
            "criterion {:>2} {} | {} | {:.1}s of {}s | {}",
            l.id,
            if l.pass { "PASS" } else { "FAIL" },
            l.name,
            l.elapsed.as_secs_f64(),
            l.budget.as_secs(),
            l.detail
        );
    }
    println!("acceptance: {}", if all { "all criteria pass" } else { "FAILURES" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
