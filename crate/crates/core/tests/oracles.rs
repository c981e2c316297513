//! Independent oracles: ambient geodesic ODE on the ellipsoid, great circles on the
//! round sphere, and Simpson quadrature in a different substitution.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use liouville_core::conjugate::{ConjugateField, FieldOptions};
use liouville_core::geodesic::initial::from_u;
use liouville_core::geodesic::{integrate_geodesic, GeodesicTrace, TraceOptions};
use liouville_core::manifold::{embed, AProfile, Manifold};
use liouville_core::quadrature::{singular_integral, GkOptions, HyperellipticIntegrand, Numerator, Weight};

fn ellipsoid(a: &[f64]) -> Manifold {
    Manifold::from_parts(a, AProfile::sqrt()).unwrap()
}

fn kept_trace(m: &Manifold, s: &[f64], u: &[f64], horizon: f64) -> GeodesicTrace {
    let p = m.point_from_fractions(s).unwrap();
    let init = from_u(m, &p.phi, u, false).unwrap();
    let opts = TraceOptions { horizon, keep_segments: true, rtol: 1e-12, atol: 1e-13, ..Default::default() };
    integrate_geodesic(m, &init, &opts).unwrap()
}

fn ambient(m: &Manifold, tr: &GeodesicTrace, t: f64) -> Vec<f64> {
    let st = tr.state_at(t).unwrap();
    embed(m, &st[..m.n()]).unwrap()
}

/// Second-order one-sided derivative of the embedded curve at 0.
fn ambient_velocity(m: &Manifold, tr: &GeodesicTrace) -> Vec<f64> {
    let h = 1e-5;
    let (p0, p1, p2) = (ambient(m, tr, 0.0), ambient(m, tr, h), ambient(m, tr, 2.0 * h));
    (0..p0.len()).map(|k| (-3.0 * p0[k] + 4.0 * p1[k] - p2[k]) / (2.0 * h)).collect()
}

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

/// `X'' = −(X'ᵀDX' / |DX|²) DX` on `Σ X_k²/a_k = 1`, classical RK4.
fn quadric_geodesic(a: &[f64], x0: &[f64], v0: &[f64], t_end: f64, steps: usize) -> Vec<f64> {
    let d = x0.len();
    let rhs = |y: &[f64]| -> Vec<f64> {
        let (x, v) = (&y[..d], &y[d..]);
        let dx: Vec<f64> = (0..d).map(|k| x[k] / a[k]).collect();
        let num: f64 = (0..d).map(|k| v[k] * v[k] / a[k]).sum();
        let den: f64 = dx.iter().map(|v| v * v).sum();
        let mut out = v.to_vec();
        out.extend(dx.iter().map(|g| -num / den * g));
        out
    };
    let mut y: Vec<f64> = x0.iter().chain(v0).copied().collect();
    let h = t_end / steps as f64;
    let axpy = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    for _ in 0..steps {
        let k1 = rhs(&y);
        let k2 = rhs(&axpy(&y, &k1, 0.5 * h));
        let k3 = rhs(&axpy(&y, &k2, 0.5 * h));
        let k4 = rhs(&axpy(&y, &k3, h));
        for k in 0..y.len() {
            y[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
    }
    y[..d].to_vec()
}

#[test]
fn ellipsoid_trace_matches_ambient_geodesic_equation() {
    for (a, s, u) in [
        (vec![3.0, 2.0, 1.0], vec![0.3, 0.6], vec![0.7]),
        (vec![3.0, 2.0, 1.0], vec![0.8, 0.25], vec![2.4]),
        (vec![4.0, 3.0, 2.0, 1.0], vec![0.3, 0.6, 0.45], vec![0.4, 1.1]),
    ] {
        let m = ellipsoid(&a);
        let tr = kept_trace(&m, &s, &u, 3.5);
        let x0 = ambient(&m, &tr, 0.0);
        let on_surface: f64 = x0.iter().zip(&a).map(|(x, ak)| x * x / ak).sum();
        assert_relative_eq!(on_surface, 1.0, epsilon = 1e-13);
        let v0 = ambient_velocity(&m, &tr);
        let speed = v0.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert_relative_eq!(speed, 1.0, epsilon = 1e-8);
        for t in [0.5, 1.5, 3.0] {
            let oracle = quadric_geodesic(&a, &x0, &v0, t, 6000);
            let ours = ambient(&m, &tr, t);
            assert!(dist(&oracle, &ours) < 1e-7, "a={a:?} u={u:?} t={t}: {}", dist(&oracle, &ours));
        }
    }
}

#[test]
fn sphere_geodesics_are_great_circles_with_antipodal_conjugate_points() {
    let c = 1.5;
    let m = Manifold::from_parts(&[3.0, 2.0, 1.0], AProfile::constant(c)).unwrap();
    let tr = kept_trace(&m, &[0.3, 0.6], &[0.9], 4.0);
    let x0 = ambient(&m, &tr, 0.0);
    let v0 = ambient_velocity(&m, &tr);
    assert_relative_eq!(x0.iter().map(|x| x * x).sum::<f64>().sqrt(), c, epsilon = 1e-13);
    for t in [1.0, 2.5, 4.0] {
        let circle: Vec<f64> = (0..3).map(|k| x0[k] * (t / c).cos() + c * v0[k] * (t / c).sin()).collect();
        assert!(dist(&circle, &ambient(&m, &tr, t)) < 1e-8);
    }

    let p0 = m.point_from_fractions(&[0.3, 0.6]).unwrap();
    let field = ConjugateField::compute(&m, &p0, &FieldOptions { per_axis: 12, ..Default::default() }).unwrap();
    for s in field.samples.iter().flatten() {
        assert_relative_eq!(s.r[0], PI * c, epsilon = 1e-8);
    }
}

/// `∫_lo^hi λ^m dλ / √|Π(λ−a)(λ−b)|` with `λ = mid + half·sin θ` and Richardson-extrapolated
/// composite Simpson on dyadic panel counts.
fn simpson_oracle(a: &[f64], b: &[f64], lo: f64, hi: f64, m: i32) -> f64 {
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let g = |th: f64| -> f64 {
        let lam = mid + half * th.sin();
        let mut rad = 1.0;
        for &r in a.iter().chain(b) {
            if r != lo && r != hi {
                rad *= (lam - r).abs();
            }
        }
        lam.powi(m) / rad.sqrt()
    };
    let simpson = |k: u32| -> f64 {
        let panels = 2usize.pow(k);
        let h = PI / panels as f64;
        let mut s = g(-0.5 * PI) + g(0.5 * PI);
        for j in 1..panels {
            s += g(-0.5 * PI + j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    let (coarse, fine) = (simpson(9), simpson(10));
    fine + (fine - coarse) / 15.0
}

#[test]
fn endpoint_singular_integrals_match_simpson_oracle() {
    let a = [3.0, 2.0, 1.0];
    let b = [2.5];
    let opts = GkOptions::default();
    // Intervals [2.5, 3] and [1, 2] for the ellipsoid with b_1 = 2.5.
    for (l, lo, hi) in [(1usize, 2.5, 3.0), (2, 1.0, 2.0)] {
        for m in 0..2 {
            let ig = HyperellipticIntegrand {
                numerator: Numerator::monomial(m as usize),
                weight: Weight::One,
                a: a.to_vec(),
                b: b.to_vec(),
                l,
                signed: false,
            };
            let ours = singular_integral(&ig, &opts).unwrap().value;
            let oracle = simpson_oracle(&a, &b, lo, hi, m);
            assert_relative_eq!(ours, oracle, max_relative = 1e-11);
        }
    }
}

#[test]
fn frozen_singular_integrals() {
    // 30-digit tanh-sinh values, rounded to 15. The first two agree because G = 1 has degree n − 2.
    let a = [3.0, 2.0, 1.0];
    let b = [2.5];
    let frozen = [(1usize, 0usize, 2.831_474_416_851_91), (2, 0, 2.831_474_416_851_91), (1, 1, 7.700_308_699_716_14)];
    for (l, m, want) in frozen {
        let ig = HyperellipticIntegrand {
            numerator: Numerator::monomial(m),
            weight: Weight::One,
            a: a.to_vec(),
            b: b.to_vec(),
            l,
            signed: false,
        };
        let got = singular_integral(&ig, &GkOptions::default()).unwrap().value;
        assert_relative_eq!(got, want, max_relative = 1e-10);
    }
}
