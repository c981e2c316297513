//! Independent checks of the transported frame.
//!
//! The projected Hamiltonian fields `W_r = ∂b_r/∂ξ` of the spectral values are
//! tangent to the level sets and orthogonal to `γ'`; they give a second route
//! to the frame directions. The one-forms `ω̃_i` annihilate `γ'` and every
//! `V_k` with `k ≠ i`.

use super::flow::inner;

/// Minimum `|ξ_k|` for the dual-form check; the forms blow up at turning points.
pub const XI_FLOOR: f64 = 1e-3;

/// `∂b_r/∂ξ_m` (x coordinates), by implicit differentiation of `Q(b_r) = 0` with
/// `Q(λ) = Σ_i (ξ_i²/g_i) Π_{l≠i}(λ − f_l)`, whose roots are the spectral values.
pub fn spectral_gradients(b: &[f64], f: &[f64], xi: &[f64], g: &[f64]) -> Vec<Vec<f64>> {
    let n = f.len();
    let w: Vec<f64> = (0..n).map(|i| xi[i] * xi[i] / g[i]).collect();
    let prod_except = |lam: f64, skip: &[usize]| -> f64 {
        (0..n).filter(|l| !skip.contains(l)).map(|l| lam - f[l]).product()
    };
    b.iter()
        .map(|&br| {
            let mut qp = 0.0;
            for i in 0..n {
                for p in (0..n).filter(|&p| p != i) {
                    qp += w[i] * prod_except(br, &[i, p]);
                }
            }
            (0..n).map(|m| -2.0 * xi[m] / g[m] * prod_except(br, &[m]) / qp).collect()
        })
        .collect()
}

/// `Q(λ)` itself, for tests.
pub fn spectral_polynomial_value(f: &[f64], xi: &[f64], g: &[f64], lam: f64) -> f64 {
    let n = f.len();
    (0..n)
        .map(|i| xi[i] * xi[i] / g[i] * (0..n).filter(|&l| l != i).map(|l| lam - f[l]).product::<f64>())
        .sum()
}

/// Largest `1 − |⟨V_r, Ŵ_r⟩|` over the frame (φ coordinates, metric `G`).
pub fn hamiltonian_frame_deviation(b: &[f64], f: &[f64], xi: &[f64], h: &[f64], gphi: &[f64], frames: &[&[f64]]) -> f64 {
    let n = f.len();
    let gx: Vec<f64> = (0..n).map(|k| gphi[k] / (h[k] * h[k])).collect();
    let grads = spectral_gradients(b, f, xi, &gx);
    let mut worst: f64 = 0.0;
    for (r, v) in frames.iter().enumerate() {
        let w: Vec<f64> = (0..n).map(|m| grads[r][m] / h[m]).collect();
        let nw = inner(gphi, &w, &w).sqrt();
        if !(nw > 1e-12) {
            continue;
        }
        let c = inner(gphi, v, &w).abs() / nw;
        worst = worst.max(1.0 - c);
    }
    worst
}

/// Largest normalized `|ω̃_i(V)|` for `V ∈ {γ', V_k : k ≠ i}`; 0 if some `|ξ_k|` is below the floor.
pub fn dual_form_residual(b: &[f64], f: &[f64], h: &[f64], eta: &[f64], vel: &[f64], frames: &[&[f64]]) -> f64 {
    let n = f.len();
    if (0..n).any(|k| (eta[k] / h[k]).abs() < XI_FLOOR) {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for i in 0..b.len() {
        let gi = |lam: f64| -> f64 { b.iter().enumerate().filter(|&(l, _)| l != i).map(|(_, bl)| lam - bl).product() };
        let form = |v: &[f64]| -> (f64, f64) {
            let mut s = 0.0;
            let mut sa = 0.0;
            for k in 0..n {
                let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
                let term = sign * gi(f[k]) * h[k] * h[k] * v[k] / eta[k];
                s += term;
                sa += term.abs();
            }
            (s, sa)
        };
        let mut targets: Vec<&[f64]> = vec![vel];
        targets.extend(frames.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, v)| *v));
        for v in targets {
            let (s, sa) = form(v);
            if sa > 0.0 {
                worst = worst.max(s.abs() / sa);
            }
        }
    }
    worst
}
