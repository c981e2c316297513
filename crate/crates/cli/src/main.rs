//! `liouville`: validate manifolds, trace geodesics, compute conjugate loci, run the suites.
//!
//! Exit codes: 0 pass, 1 invariant or classification failure, 2 usage or I/O error.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use liouville_core::conjugate::{
    conjugate_locus, run_conjugate, write_field_csv, write_locus_obj, write_samples_json, RunOptions,
};
use liouville_core::geodesic::initial::from_u;
use liouville_core::geodesic::{integrate_geodesic, GeodesicTrace, InitialData, TraceOptions};
use liouville_core::integrals::PhaseState;
use liouville_core::manifold::{inspect_spec, AProfile, BasePoint, Manifold, ManifoldConfig, ManifoldSpec};
use liouville_core::poly::Poly;
use liouville_core::quadrature::orbit_quadrature_check;
use liouville_core::suite::{run_suite, SuiteConfig};
use liouville_core::Error;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "liouville", version, about = "Geodesics and conjugate loci on Liouville manifolds")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the spectrum and the sign conditions on the profile.
    Validate(ValidateArgs),
    /// Integrate one geodesic with its Jacobi fields and write the trace.
    Trace(TraceArgs),
    /// Conjugate field, loci, singularity labels and their checks.
    Conjugate(ConjugateArgs),
    /// Abel, sign, conservation, ordering and accumulation suites.
    Suite(SuiteArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Output root; files go to `<out>/<id>/`.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Run identifier (defaults to the subcommand name).
    #[arg(long)]
    id: Option<String>,
}

impl Common {
    fn dir(&self, default: &str) -> anyhow::Result<PathBuf> {
        let d = self.out.join(self.id.as_deref().unwrap_or(default));
        fs::create_dir_all(&d).with_context(|| format!("creating {}", d.display()))?;
        Ok(d)
    }
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Manifold config (JSON, or TOML by extension).
    #[arg(long)]
    spec: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Direction angles `u_1,…,u_{n−1}`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    u: Vec<f64>,
    /// Base point fractions `s_1,…,s_n` (overrides the config).
    #[arg(long, value_delimiter = ',')]
    base: Option<Vec<f64>>,
    #[arg(long, default_value_t = 20.0)]
    horizon: f64,
    /// Sampling interval of the CSV trace.
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol_drift: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol_energy: f64,
    /// Allowed distance between the start and the end of the reversed trace.
    #[arg(long, default_value_t = 1e-7)]
    tol_reverse: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct ConjugateArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_delimiter = ',')]
    base: Option<Vec<f64>>,
    /// Samples per `u` circle.
    #[arg(long)]
    grid: Option<usize>,
    /// Export only `K_i` (default: every `i`).
    #[arg(long)]
    i: Option<usize>,
    /// Restrict the cone fits to `∂C_j^+`.
    #[arg(long)]
    j: Option<usize>,
    #[arg(long, default_value_t = 60.0)]
    horizon: f64,
    #[arg(long, default_value_t = 0.01)]
    tol_holes: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol_equal: f64,
    #[arg(long, default_value_t = 0.95)]
    tol_cusp_success: f64,
    #[arg(long, default_value_t = 0.05)]
    tol_cone: f64,
    /// Recorded in the report; the computation itself draws no random numbers.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct SuiteArgs {
    /// Suite config (JSON or TOML); flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    tol_abel: Option<f64>,
    #[arg(long)]
    tol_drift: Option<f64>,
    #[arg(long)]
    tol_boundary: Option<f64>,
    #[command(flatten)]
    common: Common,
}

/// Distinguishes invariant failures (exit 1) from usage and I/O errors (exit 2).
enum Outcome {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let res = match &cli.cmd {
        Command::Validate(a) => cmd_validate(a),
        Command::Trace(a) => cmd_trace(a),
        Command::Conjugate(a) => cmd_conjugate(a),
        Command::Suite(a) => cmd_suite(a),
    };
    match res {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::Io(_)
            | Error::Json(_)
            | Error::Toml(_)
            | Error::Csv(_)
            | Error::InvalidConfig(_)
            | Error::NonMonotoneSpectrum(_)
            | Error::InvalidProfile(_)
            | Error::NonPositiveProfile { .. },
        ) => 2,
        Some(_) => 1,
        None => 2,
    }
}

fn write_json<T: serde::Serialize>(path: &Path, v: &T) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn load_config(path: &Path) -> anyhow::Result<ManifoldConfig> {
    ManifoldConfig::from_path(path).map_err(anyhow::Error::from).with_context(|| format!("reading {}", path.display()))
}

fn inspect(cfg: &ManifoldConfig) -> anyhow::Result<ManifoldSpec> {
    let profile = AProfile::new(cfg.profile.clone())?;
    Ok(inspect_spec(&cfg.a, profile)?)
}

/// Fractions used when neither the config nor `--base` names a base point.
fn default_fractions(n: usize) -> Vec<f64> {
    const CYCLE: [f64; 6] = [0.3, 0.6, 0.45, 0.7, 0.35, 0.55];
    (0..n).map(|k| CYCLE[k % CYCLE.len()]).collect()
}

fn base_point(m: &Manifold, cfg: &ManifoldConfig, flag: Option<&Vec<f64>>) -> anyhow::Result<BasePoint> {
    let s = flag.cloned().or_else(|| cfg.base_point.clone()).unwrap_or_else(|| default_fractions(m.n()));
    if s.len() != m.n() {
        return Err(Error::InvalidConfig(format!("base point needs {} fractions, got {}", m.n(), s.len())).into());
    }
    Ok(m.point_from_fractions(&s)?)
}

/// Spec accepted by the sign conditions, or the round sphere with a warning.
fn manifold(cfg: &ManifoldConfig) -> anyhow::Result<Manifold> {
    let spec = inspect(cfg)?;
    if !spec.condition.accepted() {
        return Err(Error::ConditionViolated(Box::new(spec)).into());
    }
    for w in &spec.condition.warnings {
        log::warn!("{w}");
    }
    Ok(Manifold::new(spec)?)
}

fn cmd_validate(a: &ValidateArgs) -> anyhow::Result<Outcome> {
    let cfg = load_config(&a.spec)?;
    let spec = inspect(&cfg)?;
    let dir = a.common.dir("validate")?;
    write_json(&dir.join("config.json"), &cfg)?;
    write_json(&dir.join("condition_report.json"), &json!({ "n": spec.n(), "a": spec.a, "condition": spec.condition }))?;
    let c = &spec.condition;
    if c.round_sphere {
        eprintln!("warning: constant profile (round sphere); the strict sign conditions do not hold");
    }
    for row in c.checks.iter().filter(|r| !r.positive && !c.round_sphere) {
        eprintln!("violated: {} order {} min {:e} at lambda {}", row.family, row.order, row.min_value, row.at_lambda);
    }
    println!("{}", if c.passes { "pass" } else if c.round_sphere { "round sphere" } else { "fail" });
    Ok(if c.accepted() { Outcome::Pass } else { Outcome::Fail })
}

/// Integrate back from the end with reversed momentum and measure the distance to the start.
fn reverse_error(m: &Manifold, tr: &GeodesicTrace, opts: &TraceOptions) -> anyhow::Result<f64> {
    let n = m.n();
    let end = PhaseState { phi: tr.final_state[..n].to_vec(), eta: tr.final_state[n..2 * n].iter().map(|v| -v).collect() };
    let init = InitialData { state: end, deta: Vec::new(), frames: false };
    let mut o = opts.clone();
    o.horizon = tr.t_end;
    o.keep_segments = false;
    o.stop = Default::default();
    let back = integrate_geodesic(m, &init, &o)?;
    let x0 = tr.initial.x(m);
    let state = PhaseState { phi: back.final_state[..n].to_vec(), eta: back.final_state[n..2 * n].to_vec() };
    Ok(x0.iter().zip(state.x(m)).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max))
}

fn cmd_trace(a: &TraceArgs) -> anyhow::Result<Outcome> {
    let cfg = load_config(&a.spec)?;
    let m = manifold(&cfg)?;
    let n = m.n();
    if a.u.len() != n - 1 {
        return Err(Error::InvalidConfig(format!("--u needs {} angles, got {}", n - 1, a.u.len())).into());
    }
    if !(a.horizon > 0.0 && a.dt > 0.0) {
        return Err(Error::InvalidConfig("--horizon and --dt must be positive".into()).into());
    }
    let p0 = base_point(&m, &cfg, a.base.as_ref())?;
    let init = from_u(&m, &p0.phi, &a.u, true)?;
    let opts = TraceOptions { horizon: a.horizon, keep_segments: true, cross_checks: true, ..Default::default() };
    let tr = integrate_geodesic(&m, &init, &opts)?;
    let dir = a.common.dir("trace")?;
    write_json(&dir.join("config.json"), &json!({ "manifold": cfg, "u": a.u, "base": p0.x, "horizon": a.horizon, "dt": a.dt }))?;

    let mut w = csv::Writer::from_path(dir.join("trace.csv"))?;
    let mut header = vec!["t".to_string()];
    for (pre, count) in [("x", n), ("xi", n), ("f", n), ("y", n - 1)] {
        header.extend((1..=count).map(|k| format!("{pre}{k}")));
    }
    w.write_record(&header)?;
    let steps = (tr.t_end / a.dt).floor() as usize;
    for k in 0..=steps {
        let t = (k as f64 * a.dt).min(tr.t_end);
        let Some(st) = tr.state_at(t) else { continue };
        let ps = PhaseState { phi: st[..n].to_vec(), eta: st[n..2 * n].to_vec() };
        let mut row = vec![t];
        row.extend(ps.x(&m));
        row.extend(ps.xi(&m));
        row.extend(ps.f(&m));
        row.extend((0..n - 1).map(|r| tr.y_at(&m, t, r).unwrap_or(f64::NAN)));
        w.write_record(row.iter().map(|v| format!("{v:.15e}")))?;
    }
    w.flush()?;

    // Arclength form (monic, degree n−1) and the degree-0 form that integrates to zero.
    let arclength = orbit_quadrature_check(&m, &tr, 0.0, tr.t_end, &Poly::monomial(n - 1))?;
    let abel = orbit_quadrature_check(&m, &tr, 0.0, tr.t_end, &Poly::constant(1.0))?;
    let rev = reverse_error(&m, &tr, &opts)?;
    let conservation = tr.ledger.check(a.tol_drift, a.tol_energy);
    let reverse_ok = rev <= a.tol_reverse;
    let pass = conservation.is_ok() && reverse_ok;
    write_json(
        &dir.join("report.json"),
        &json!({
            "pass": pass,
            "t_end": tr.t_end,
            "spectral": tr.spectral,
            "conservation": tr.ledger,
            "conservation_ok": conservation.is_ok(),
            "events": tr.events,
            "jacobi": tr.jacobi,
            "orbit_quadrature": { "arclength_residual": arclength, "degree0_residual": abel },
            "reverse_error": rev,
            "reverse_ok": reverse_ok,
        }),
    )?;
    if let Err(e) = conservation {
        eprintln!("{e}");
        return Err(e.into());
    }
    if !reverse_ok {
        eprintln!("reversed trace misses the start by {rev:e}");
    }
    Ok(if pass { Outcome::Pass } else { Outcome::Fail })
}

fn cmd_conjugate(a: &ConjugateArgs) -> anyhow::Result<Outcome> {
    let cfg = load_config(&a.spec)?;
    let m = manifold(&cfg)?;
    let n = m.n();
    if let Some(i) = a.i {
        if !(1..n).contains(&i) {
            return Err(Error::InvalidConfig(format!("--i must lie in 1..{}", n - 1)).into());
        }
    }
    if let Some(j) = a.j {
        if !(2..n).contains(&j) {
            return Err(Error::InvalidConfig(format!("--j must lie in 2..{}", n - 1)).into());
        }
    }
    let p0 = base_point(&m, &cfg, a.base.as_ref())?;
    if !p0.general {
        return Err(Error::InvalidConfig("base point is not general (it lies on a branch locus)".into()).into());
    }
    let mut opts = RunOptions { max_hole_rate: a.tol_holes, cusp_success: a.tol_cusp_success, d4_index: a.j, ..Default::default() };
    opts.field.per_axis = a.grid.unwrap_or(if n == 2 { 256 } else { 96 });
    opts.field.eq_tol = a.tol_equal;
    opts.d4.max_residual = a.tol_cone;
    for f in [&mut opts.field, &mut opts.cusp.field, &mut opts.d4.field] {
        f.horizon = a.horizon;
    }
    opts.d4.pair.horizon = a.horizon;

    let (field, run) = run_conjugate(&m, &p0, &opts)?;
    let dir = a.common.dir("conjugate")?;
    write_json(&dir.join("config.json"), &json!({ "manifold": cfg, "base": p0.x, "seed": a.seed, "options": opts }))?;
    let indices: Vec<usize> = a.i.map(|i| vec![i]).unwrap_or_else(|| (1..n).collect());
    for &i in &indices {
        let mut w = BufWriter::new(File::create(dir.join(format!("field_{i}.csv")))?);
        write_field_csv(&field, i, &mut w)?;
        w.flush()?;
        let samples = conjugate_locus(&m, &field, i);
        let mut w = BufWriter::new(File::create(dir.join(format!("samples_{i}.json")))?);
        write_samples_json(&samples, &mut w)?;
        w.flush()?;
        if n <= 3 {
            let mut w = BufWriter::new(File::create(dir.join(format!("locus_{i}.obj")))?);
            write_locus_obj(&field, &samples, &mut w)?;
            w.flush()?;
        }
    }
    write_json(&dir.join("report.json"), &json!({ "seed": a.seed, "base": p0.x, "result": run }))?;
    if run.round_sphere {
        eprintln!("warning: constant profile; the conjugate locus degenerates to a point");
    }
    println!("{}", if run.pass { "pass" } else { "fail" });
    Ok(if run.pass { Outcome::Pass } else { Outcome::Fail })
}

fn cmd_suite(a: &SuiteArgs) -> anyhow::Result<Outcome> {
    let mut cfg = match &a.config {
        Some(p) => SuiteConfig::from_path(p).with_context(|| format!("reading {}", p.display()))?,
        None => SuiteConfig::default(),
    };
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(h) = a.horizon {
        cfg.horizon = h;
    }
    if let Some(v) = a.tol_abel {
        cfg.tol.abel = v;
    }
    if let Some(v) = a.tol_drift {
        cfg.tol.drift = v;
    }
    if let Some(v) = a.tol_boundary {
        cfg.tol.boundary = v;
    }
    cfg.check()?;
    let report = run_suite(&cfg)?;
    let dir = a.common.dir("suite")?;
    write_json(&dir.join("config.json"), &cfg)?;
    write_json(&dir.join("report.json"), &report)?;
    for (name, v) in &report.suites {
        println!("{name}: {}", if v.pass { "pass" } else { "FAIL" });
    }
    Ok(if report.pass { Outcome::Pass } else { Outcome::Fail })
}
