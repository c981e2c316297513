//! Invariants as property tests.

use std::f64::consts::{FRAC_PI_2, PI};

use liouville_core::dual::{Dual, Scalar};
use liouville_core::geodesic::initial::from_u;
use liouville_core::geodesic::{integrate_geodesic, InitialData, TraceOptions};
use liouville_core::integrals::{
    b_from_f, b_of_u, classify_cell, covector_from_u, first_integrals, first_integrals_by_solve, PhaseState,
};
use liouville_core::manifold::{AProfile, Manifold, ManifoldConfig, ProfileSpec};
use liouville_core::poly::Poly;
use liouville_core::quadrature::{abel_residuals, random_admissible_b, GkOptions};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn spectrum(n: usize) -> Vec<f64> {
    (0..=n).rev().map(|k| k as f64 + 1.0).collect()
}

/// `f_{i,0}` from fractions inside each band.
fn base_f(a: &[f64], s: &[f64]) -> Vec<f64> {
    s.iter().enumerate().map(|(k, sk)| a[k + 1] + sk * (a[k] - a[k + 1])).collect()
}

fn fractions(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.05f64..0.95, n)
}

fn angles(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..2.0 * PI, n - 1)
}

fn case() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
    (2usize..=4).prop_flat_map(|n| (Just(n), fractions(n), angles(n)))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn spectral_roots_recover_the_u_chart((n, s, u) in case()) {
        let a = spectrum(n);
        let f0 = base_f(&a, &s);
        let xi = covector_from_u::<f64>(&f0, &u);
        let ints = first_integrals(&a, &f0, &xi).unwrap();
        let sp = b_from_f(&a, &ints).unwrap();
        for (got, want) in sp.b.iter().zip(b_of_u(&f0, &u)) {
            prop_assert!((got - want).abs() < 1e-9, "b {got} vs {want}");
        }
    }

    #[test]
    fn closed_form_and_linear_solve_agree((n, s, u) in case()) {
        let a = spectrum(n);
        let f0 = base_f(&a, &s);
        let xi = covector_from_u::<f64>(&f0, &u);
        let closed = first_integrals(&a, &f0, &xi).unwrap();
        let solved = first_integrals_by_solve(&a, &f0, &xi).unwrap();
        for (x, y) in closed.f.iter().zip(&solved.f) {
            prop_assert!((x - y).abs() < 1e-10 * (1.0 + x.abs()));
        }
        prop_assert!((closed.energy2 - solved.energy2).abs() < 1e-10 * closed.energy2);
    }

    #[test]
    fn dual_derivative_of_covector_matches_central_difference((n, s, u) in case(), k in 0usize..3) {
        let k = k % (n - 1);
        let a = spectrum(n);
        let f0 = base_f(&a, &s);
        let ud: Vec<Dual<1>> = u.iter().enumerate().map(|(j, &v)| if j == k { Dual::variable(v, 0) } else { Dual::constant(v) }).collect();
        let xi = covector_from_u(&f0, &ud);
        let h = 1e-6;
        let shifted = |d: f64| {
            let mut w = u.clone();
            w[k] += d;
            covector_from_u::<f64>(&f0, &w)
        };
        let (p, m) = (shifted(h), shifted(-h));
        for i in 0..n {
            let fd = (p[i] - m[i]) / (2.0 * h);
            prop_assert!((xi[i].eps[0] - fd).abs() < 1e-6 * (1.0 + fd.abs()), "i={i}: {} vs {fd}", xi[i].eps[0]);
            prop_assert!((xi[i].re() - covector_from_u::<f64>(&f0, &u)[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn abel_residuals_vanish(n in 2usize..=4, seed in any::<u64>()) {
        let a = spectrum(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = random_admissible_b(&a, &mut rng, 1e-3);
        for est in abel_residuals(&a, &b, &GkOptions::default()).unwrap() {
            prop_assert!(est.value.abs() < 1e-8, "b={b:?}: {}", est.value);
        }
    }

    #[test]
    fn polynomial_roots_are_recovered(mut roots in proptest::collection::vec(-5.0f64..5.0, 1..6)) {
        roots.sort_by(|x, y| y.partial_cmp(x).unwrap());
        prop_assume!(roots.windows(2).all(|w| w[0] - w[1] > 1e-2));
        let mut got = Poly::from_roots(&roots).real_roots().unwrap();
        got.sort_by(|x, y| y.partial_cmp(x).unwrap());
        prop_assert_eq!(got.len(), roots.len());
        for (g, r) in got.iter().zip(&roots) {
            prop_assert!((g - r).abs() < 1e-9);
        }
    }

    #[test]
    fn cell_labels_follow_special_angles(u in angles(3), snap in proptest::bool::ANY) {
        let mut u = u;
        if snap {
            u[0] = FRAC_PI_2;
        }
        let cell = classify_cell(&u, 1e-9);
        let special = |v: f64| {
            let r = v.rem_euclid(FRAC_PI_2);
            r < 1e-9 || FRAC_PI_2 - r < 1e-9
        };
        prop_assert_eq!(cell.interior(), !u.iter().any(|&v| special(v)));
    }

    #[test]
    fn config_json_round_trip(n in 2usize..=5, c in 0.1f64..10.0, s in fractions(5), sqrt in proptest::bool::ANY) {
        let profile = if sqrt { ProfileSpec::Sqrt } else { ProfileSpec::Constant { c } };
        let cfg = ManifoldConfig { a: spectrum(n), profile, base_point: Some(s[..n].to_vec()) };
        let text = serde_json::to_string(&cfg).unwrap();
        prop_assert_eq!(ManifoldConfig::from_json_str(&text).unwrap(), cfg.clone());
        let text = toml::to_string(&cfg).unwrap();
        prop_assert_eq!(ManifoldConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn config_parsers_never_panic(text in ".{0,200}") {
        let _ = ManifoldConfig::from_json_str(&text);
        let _ = ManifoldConfig::from_toml_str(&text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn first_integrals_are_conserved(s in fractions(2), u in 0.02f64..(2.0 * PI - 0.02)) {
        let m = Manifold::from_parts(&[3.0, 2.0, 1.0], AProfile::sqrt()).unwrap();
        let p = m.point_from_fractions(&s).unwrap();
        let init = from_u(&m, &p.phi, &[u], true).unwrap();
        let tr = integrate_geodesic(&m, &init, &TraceOptions { horizon: 10.0, ..Default::default() }).unwrap();
        prop_assert!(tr.ledger.max_f_drift() < 1e-8);
        prop_assert!(tr.ledger.max_drift_energy < 1e-8);
    }

    #[test]
    fn reversed_geodesic_returns_to_start(s in fractions(3), u in angles(3)) {
        let m = Manifold::from_parts(&spectrum(3), AProfile::sqrt()).unwrap();
        let p = m.point_from_fractions(&s).unwrap();
        let init = from_u(&m, &p.phi, &u, false).unwrap();
        let opts = TraceOptions { horizon: 5.0, ..Default::default() };
        let fwd = integrate_geodesic(&m, &init, &opts).unwrap();
        let back = InitialData {
            state: PhaseState { phi: fwd.final_state[..3].to_vec(), eta: fwd.final_state[3..6].iter().map(|v| -v).collect() },
            deta: Vec::new(),
            frames: false,
        };
        let rev = integrate_geodesic(&m, &back, &opts).unwrap();
        let end = PhaseState { phi: rev.final_state[..3].to_vec(), eta: rev.final_state[3..6].to_vec() };
        for (x, y) in end.x(&m).iter().zip(p.x.iter()) {
            prop_assert!((x - y).abs() < 1e-7);
        }
    }
}
