//! Independent verification route for the entmax family.
//!
//! [`entmax_oracle`] solves `argmax_{p ∈ Δ} ⟨p, z⟩ + H_α(p)` by projected
//! gradient ascent with diminishing steps, using the Euclidean simplex
//! projection (sparsemax) as the projector.  It never touches the
//! closed-form or bisection solvers, so agreement between the two routes is
//! meaningful evidence that both are right.  Meant for tests and the
//! verification harness, not for production inference.

use crate::simplex::{sparsemax, AlphaParam, SimplexVector};

/// Tsallis entropy `H_α(p) = (1/(α(α−1))) Σ (p_i − p_i^α)`, α > 1.
fn tsallis_entropy(p: &[f64], alpha: f64) -> f64 {
    p.iter()
        .map(|&v| {
            let v = v.max(0.0);
            v - v.powf(alpha)
        })
        .sum::<f64>()
        / (alpha * (alpha - 1.0))
}

/// Objective `⟨p, z⟩ + H_α(p)`.
fn objective(p: &[f64], z: &[f64], alpha: f64) -> f64 {
    let inner: f64 = p.iter().zip(z).map(|(&pi, &zi)| pi * zi).sum();
    inner + tsallis_entropy(p, alpha)
}

/// Projected gradient ascent for `argmax_{p ∈ Δ} ⟨p, z⟩ + H_α(p)`, 1 < α ≤ 2.
///
/// Runs `iters` steps with a diminishing step size and returns the best
/// iterate by objective value.  The gradient's constant component is dropped
/// since the simplex projection is invariant to uniform shifts.
pub fn entmax_oracle(z: &[f64], alpha: AlphaParam, iters: usize) -> SimplexVector {
    let a = alpha.value();
    assert!(a > 1.0, "oracle requires alpha in (1, 2]");
    assert!(!z.is_empty(), "oracle requires a non-empty score vector");
    let m = z.len();

    let mut p = vec![1.0 / m as f64; m];
    let mut best = p.clone();
    let mut best_obj = objective(&p, z, a);

    let mut grad = vec![0.0f64; m];
    let mut step_arg = vec![0.0f64; m];
    for k in 1..=iters.max(1) {
        for i in 0..m {
            // ∂/∂p_i [⟨p,z⟩ + H_α(p)] = z_i + 1/(α(α−1)) − p_i^{α−1}/(α−1);
            // the constant is projection-invariant and omitted.
            grad[i] = z[i] - p[i].max(0.0).powf(a - 1.0) / (a - 1.0);
        }
        // Long early steps localize the support, a 1/k tail refines it.
        let kf = k as f64;
        let step = if k <= 64 {
            1.0 / kf.sqrt()
        } else {
            16.0 / kf
        };
        for i in 0..m {
            step_arg[i] = p[i] + step * grad[i];
        }
        let (proj, _) = sparsemax(&step_arg).expect("projection input is finite");
        p = proj.probs;
        let obj = objective(&p, z, a);
        if obj > best_obj {
            best_obj = obj;
            best.copy_from_slice(&p);
        }
    }
    SimplexVector::from_probs(best)
}
