//! The α-entmax family: entropy-regularized argmax maps onto the simplex.
//!
//! For a score vector `z ∈ R^M` and `α ∈ [1, 2]`, the transform is
//!
//! ```text
//! entmax_α(z) = argmax_{p ∈ Δ^M} ⟨p, z⟩ + H_α(p)
//! ```
//!
//! where `H_α(p) = (1/(α(α−1))) Σ (p_i − p_i^α)` is the Tsallis entropy
//! (`H_1(p) = −Σ p_i log p_i` in the limit).  α=1 recovers softmax, α=2
//! recovers sparsemax (the Euclidean projection onto the simplex), and every
//! α>1 can return exact zeros.
//!
//! For α>1 there is a unique threshold τ(z) with
//!
//! ```text
//! entmax_α(z)_i = [(α−1) z_i − τ(z)]_+^{1/(α−1)}
//! ```
//!
//! which is what the exact solvers here compute: a sort-and-threshold pass
//! for α=2 (Held et al. 1974; Martins & Astudillo 2016), the closed form on
//! sorted z/2 for α=1.5 (Peters et al. 2019), and bisection on τ otherwise.
//!
//! Sign conventions: this module works with the *convex* regularizer
//! `Ψ_α = −H_α`, so the conjugate [`psi_conjugate`] reduces exactly to
//! log-sum-exp at α=1 and the threshold formula above is consistent across
//! the whole family.

use crate::{Error, Result};

/// Sparsity parameter for the entmax family, validated to `[1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaParam(f64);

impl AlphaParam {
    /// Validate and wrap an α value. Values outside `[1, 2]` are rejected.
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || !(1.0..=2.0).contains(&alpha) {
            return Err(Error::InvalidAlpha(alpha));
        }
        Ok(Self(alpha))
    }

    /// The raw α value.
    pub fn value(self) -> f64 {
        self.0
    }

    /// True iff α = 1 (softmax member).
    pub fn is_softmax(self) -> bool {
        self.0 == 1.0
    }
}

/// A probability vector on the simplex with its support bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVector {
    /// Probabilities, all ≥ 0, summing to 1 (up to roundoff).
    pub probs: Vec<f64>,
    /// Indices of the strictly positive entries, ascending.
    pub support: Vec<usize>,
    /// Support size, `|{i : probs[i] > 0}|`.
    pub kappa: usize,
}

impl SimplexVector {
    /// Wrap a probability vector, deriving `support` and `kappa`.
    pub fn from_probs(probs: Vec<f64>) -> Self {
        let support: Vec<usize> = probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(i, _)| i)
            .collect();
        let kappa = support.len();
        Self {
            probs,
            support,
            kappa,
        }
    }

    /// Number of entries M.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    /// True iff the vector has no entries.
    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Check the simplex invariants within `tol` on the total mass.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if self.probs.is_empty() {
            return Err(Error::EmptyInput);
        }
        if self.probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::NonFinite("probability vector"));
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::OffSimplex((sum - 1.0).abs()));
        }
        Ok(())
    }
}

/// Threshold τ and support size κ characterizing an entmax solution (α > 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult {
    /// Threshold in the convention `p_i = [(α−1) z_i − τ]_+^{1/(α−1)}`.
    pub tau: f64,
    /// Support size of the solution.
    pub kappa: usize,
}

fn check_scores(z: &[f64]) -> Result<()> {
    if z.is_empty() {
        return Err(Error::EmptyInput);
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("score vector"));
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::InvalidBeta(beta));
    }
    Ok(())
}

/// Rebuild the probability vector from a threshold via
/// `p_i = [(α−1) z_i − τ]_+^{1/(α−1)}`.
///
/// Used to check the threshold identity; callers that want a normalized
/// vector should prefer the solvers themselves.
pub fn reconstruct_from_threshold(z: &[f64], alpha: AlphaParam, thr: &ThresholdResult) -> Vec<f64> {
    let a = alpha.value();
    let inv = 1.0 / (a - 1.0);
    z.iter()
        .map(|&zi| ((a - 1.0) * zi - thr.tau).max(0.0).powf(inv))
        .collect()
}

/// Temperature-scaled softmax: `p_i ∝ exp(β z_i)`, max-shifted for stability.
///
/// Every entry is strictly positive in exact arithmetic; with extreme logit
/// spreads (≳ 700/β) the far tail can underflow to 0.0 in f64, in which case
/// `kappa` reports the representable support.
pub fn softmax(z: &[f64], beta: f64) -> Result<SimplexVector> {
    check_scores(z)?;
    check_beta(beta)?;
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|&v| (beta * (v - max)).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Ok(SimplexVector::from_probs(
        exps.into_iter().map(|e| e / sum).collect(),
    ))
}

/// Log-sum-exp at inverse temperature β: `(1/β) log Σ exp(β z_i)`.
pub fn lse(beta: f64, z: &[f64]) -> Result<f64> {
    check_scores(z)?;
    check_beta(beta)?;
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = z.iter().map(|&v| (beta * (v - max)).exp()).sum();
    Ok(max + sum.ln() / beta)
}

/// Sparsemax: Euclidean projection of `z` onto the simplex (the α=2 member),
/// via the classic sort-and-threshold pass.
pub fn sparsemax(z: &[f64]) -> Result<(SimplexVector, ThresholdResult)> {
    check_scores(z)?;
    let mut sorted = z.to_vec();
    // Stable descending sort; ties keep input order, which is irrelevant to
    // the threshold (it depends on values only).
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let mut cumsum = 0.0;
    let mut k = 0usize;
    let mut cumsum_k = 0.0;
    for (j, &s) in sorted.iter().enumerate() {
        cumsum += s;
        if 1.0 + (j + 1) as f64 * s > cumsum {
            k = j + 1;
            cumsum_k = cumsum;
        }
    }
    let tau = (cumsum_k - 1.0) / k as f64;
    let probs: Vec<f64> = z.iter().map(|&v| (v - tau).max(0.0)).collect();
    let sv = SimplexVector::from_probs(probs);
    let kappa = sv.kappa;
    Ok((sv, ThresholdResult { tau, kappa }))
}

/// Exact 1.5-entmax via the closed-form threshold on sorted `z/2`.
///
/// On the support, `p_i = (z_i/2 − τ)²` with τ chosen so the squares sum
/// to one; the support is the unique k whose candidate τ falls between the
/// k-th and (k+1)-th sorted values of `z/2`.
pub fn entmax15(z: &[f64]) -> Result<(SimplexVector, ThresholdResult)> {
    check_scores(z)?;
    let m = z.len();
    let mut s: Vec<f64> = z.iter().map(|&v| v / 2.0).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let mut best: Option<(usize, f64)> = None;
    let mut fallback: Option<(usize, f64, f64)> = None;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for k in 1..=m {
        sum += s[k - 1];
        sum_sq += s[k - 1] * s[k - 1];
        let mean = sum / k as f64;
        let var = sum_sq / k as f64 - mean * mean;
        let inner = 1.0 / k as f64 - var;
        if inner < 0.0 {
            continue;
        }
        let tau = mean - inner.sqrt();
        // The true (κ, τ) satisfies s_(κ) ≥ τ ≥ s_(κ+1).
        let lower_ok = k == m || tau >= s[k];
        let upper_ok = tau <= s[k - 1];
        if lower_ok && upper_ok {
            best = Some((k, tau));
        }
        // Track the candidate with the smallest mass residual in case
        // roundoff keeps every interval test from passing exactly.
        let mass: f64 = s[..k].iter().map(|&si| (si - tau).max(0.0).powi(2)).sum();
        let resid = (mass - 1.0).abs();
        if fallback.map_or(true, |(_, _, r)| resid < r) {
            fallback = Some((k, tau, resid));
        }
    }
    let (_, tau) = best.or(fallback.map(|(k, t, _)| (k, t))).unwrap();
    let probs: Vec<f64> = z
        .iter()
        .map(|&v| {
            let d = v / 2.0 - tau;
            if d > 0.0 {
                d * d
            } else {
                0.0
            }
        })
        .collect();
    let sv = SimplexVector::from_probs(probs);
    let kappa = sv.kappa;
    Ok((sv, ThresholdResult { tau, kappa }))
}

/// General-α entmax by bisection on the threshold τ.
///
/// The mass function `τ ↦ Σ [(α−1) z_i − τ]_+^{1/(α−1)}` is monotone
/// decreasing and crosses 1 inside the bracket
/// `[(α−1) max z − 1, (α−1) max z]`, so bisection always converges.  The
/// residual mass left when the tolerance is met is renormalized onto the
/// support.  Returns a solver failure carrying the final residual if the
/// tolerance cannot be met in `max_iter` steps.
pub fn entmax_bisect(
    z: &[f64],
    alpha: AlphaParam,
    tol: f64,
    max_iter: usize,
) -> Result<(SimplexVector, ThresholdResult)> {
    check_scores(z)?;
    let a = alpha.value();
    if a <= 1.0 {
        return Err(Error::InvalidAlpha(a));
    }
    if !(tol > 0.0) {
        return Err(Error::SolverFailure {
            residual: f64::NAN,
            iters: 0,
        });
    }
    let inv = 1.0 / (a - 1.0);
    let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut lo = (a - 1.0) * zmax - 1.0;
    let mut hi = (a - 1.0) * zmax;

    let mass = |tau: f64| -> f64 {
        z.iter()
            .map(|&zi| ((a - 1.0) * zi - tau).max(0.0).powf(inv))
            .sum()
    };

    let mut tau = lo;
    let mut resid = (mass(tau) - 1.0).abs();
    let mut converged = resid <= tol;
    let mut iters = 0usize;
    while !converged && iters < max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Bracket exhausted at f64 resolution.
            break;
        }
        let m = mass(mid);
        resid = (m - 1.0).abs();
        tau = mid;
        if resid <= tol {
            converged = true;
        } else if m > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iters += 1;
    }
    if !converged {
        return Err(Error::SolverFailure {
            residual: resid,
            iters,
        });
    }

    let mut probs: Vec<f64> = z
        .iter()
        .map(|&zi| ((a - 1.0) * zi - tau).max(0.0).powf(inv))
        .collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    let sv = SimplexVector::from_probs(probs);
    let kappa = sv.kappa;
    Ok((sv, ThresholdResult { tau, kappa }))
}

/// Bisection tolerance used by the [`entmax`] dispatcher.
pub const ENTMAX_DISPATCH_TOL: f64 = 1e-12;
/// Bisection iteration cap used by the [`entmax`] dispatcher.
pub const ENTMAX_DISPATCH_MAX_ITER: usize = 100;

/// The α-entmax transform, dispatching to the exact solver where one exists:
/// α=1 → softmax (β=1), α=1.5 → [`entmax15`], α=2 → [`sparsemax`], and
/// bisection everywhere else.
pub fn entmax(z: &[f64], alpha: AlphaParam) -> Result<SimplexVector> {
    let a = alpha.value();
    if a == 1.0 {
        softmax(z, 1.0)
    } else if a == 1.5 {
        Ok(entmax15(z)?.0)
    } else if a == 2.0 {
        Ok(sparsemax(z)?.0)
    } else {
        Ok(entmax_bisect(z, alpha, ENTMAX_DISPATCH_TOL, ENTMAX_DISPATCH_MAX_ITER)?.0)
    }
}

/// The convex regularizer `Ψ_α(p) = −H_α(p)` used in the variational form
/// of the transform.
///
/// For α≠1 this is `−(1/(α(α−1))) Σ (p_i − p_i^α)`; for α=1 it is
/// `Σ p_i log p_i` (negative Shannon entropy, with `0·log 0 := 0`), so that
/// [`psi_conjugate`] reduces to [`lse`] exactly.
pub fn tsallis_psi(p: &[f64], alpha: AlphaParam) -> Result<f64> {
    if p.is_empty() {
        return Err(Error::EmptyInput);
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("probability vector"));
    }
    if p.iter().any(|&v| v < -1e-9) {
        return Err(Error::OffSimplex(f64::NAN));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(Error::OffSimplex((sum - 1.0).abs()));
    }
    let a = alpha.value();
    if a == 1.0 {
        Ok(p
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| v * v.ln())
            .sum())
    } else {
        let h: f64 = p
            .iter()
            .map(|&v| {
                let v = v.max(0.0);
                v - v.powf(a)
            })
            .sum::<f64>()
            / (a * (a - 1.0));
        Ok(-h)
    }
}

/// The β-scaled convex conjugate of the Tsallis regularizer,
/// `(1/β)·[⟨p*, βz⟩ − Ψ_α(p*)]` with `p* = entmax_α(βz)`.
///
/// At α=1 this equals `lse(β, z)`.
pub fn psi_conjugate(beta: f64, z: &[f64], alpha: AlphaParam) -> Result<f64> {
    check_scores(z)?;
    check_beta(beta)?;
    let scaled: Vec<f64> = z.iter().map(|&v| beta * v).collect();
    let p = entmax(&scaled, alpha)?;
    let inner: f64 = p.probs.iter().zip(&scaled).map(|(&pi, &zi)| pi * zi).sum();
    let psi = tsallis_psi(&p.probs, alpha)?;
    Ok((inner - psi) / beta)
}
