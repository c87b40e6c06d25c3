//! Dense and sparse Hopfield energies, one-step retrieval dynamics, and
//! computable retrieval-error bounds.
//!
//! Patterns are the columns of `Ξ ∈ R^{d×M}`; a query `x ∈ R^d` is retrieved
//! in one step of the dynamics
//!
//! ```text
//! T_1(x) = Ξ · softmax(β Ξᵀx)           (dense)
//! T_α(x) = Ξ · entmax_α(β Ξᵀx)          (sparse, 1 < α ≤ 2)
//! T_α^λ(x) = λ T_α(x) + (1−λ) T_1(x)    (extrapolated mixture)
//! ```
//!
//! which are the gradient maps of the energies
//!
//! ```text
//! E_1(x) = −lse(β, Ξᵀx) + ½⟨x,x⟩
//! E_α(x) = −Ψ*_α(β, Ξᵀx) + ½⟨x,x⟩      so that  ∇E_α(x) = x − T_α(x).
//! ```
//!
//! The error bounds implemented here control `‖T(x) − ξ_μ‖` for a target
//! pattern `ξ_μ`: an exponential bound for the dense dynamics, the sparse
//! α=2 bound, a polynomial bound for all 1 < α ≤ 2 built from the sorted
//! inner products `[Ξᵀx]_(k)`, and their `|λ| / |1−λ|` combination for the
//! mixture.  Sorted statistics are evaluated on the raw `Ξᵀx` and scaled by
//! β exactly as the bounds are stated; the `(M+1)`-th sorted value needed
//! when the transform has full support is defined as
//! `[Ξᵀx]_(M) − M^{1−α}/((α−1)β)`, i.e. the same convention expressed in
//! raw coordinates.

use crate::simplex::{entmax, lse, psi_conjugate, softmax, sparsemax, AlphaParam};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rayon::prelude::*;

/// A stored-pattern matrix `Ξ ∈ R^{d×M}` with its cached max column norm.
#[derive(Debug, Clone)]
pub struct PatternMatrix {
    data: Vec<f64>, // column-major, d × M
    dim: usize,
    count: usize,
    m_norm: f64,
}

impl PatternMatrix {
    /// Build from column-major data (`columns[ν][i] = ξ_ν[i]`).
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        if columns.is_empty() || columns[0].is_empty() {
            return Err(Error::EmptyInput);
        }
        let dim = columns[0].len();
        let count = columns.len();
        let mut data = Vec::with_capacity(dim * count);
        for col in &columns {
            if col.len() != dim {
                return Err(Error::DimMismatch {
                    context: "pattern column length",
                    left: col.len(),
                    right: dim,
                });
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("pattern matrix"));
            }
            data.extend_from_slice(col);
        }
        let m_norm = (0..count)
            .map(|nu| {
                data[nu * dim..(nu + 1) * dim]
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        Ok(Self {
            data,
            dim,
            count,
            m_norm,
        })
    }

    /// Pattern dimension d.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored patterns M.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Cached `m = max_ν ‖ξ_ν‖`.
    pub fn max_norm(&self) -> f64 {
        self.m_norm
    }

    /// The ν-th stored pattern.
    pub fn column(&self, nu: usize) -> &[f64] {
        &self.data[nu * self.dim..(nu + 1) * self.dim]
    }

    /// Raw similarity scores `Ξᵀx`.
    pub fn inner_products(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimMismatch {
                context: "query vs pattern dimension",
                left: x.len(),
                right: self.dim,
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("query"));
        }
        Ok((0..self.count)
            .map(|nu| {
                self.column(nu)
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .collect())
    }

    /// Convex combination of patterns `Ξ p`.
    pub fn combine(&self, weights: &[f64]) -> Result<Vec<f64>> {
        if weights.len() != self.count {
            return Err(Error::DimMismatch {
                context: "weights vs pattern count",
                left: weights.len(),
                right: self.count,
            });
        }
        let mut out = vec![0.0; self.dim];
        for (nu, &w) in weights.iter().enumerate() {
            if w != 0.0 {
                for (o, &v) in out.iter_mut().zip(self.column(nu)) {
                    *o += w * v;
                }
            }
        }
        Ok(out)
    }

    fn check_index(&self, mu: usize) -> Result<()> {
        if mu >= self.count {
            return Err(Error::InvalidIndex {
                index: mu,
                count: self.count,
            });
        }
        Ok(())
    }
}

fn half_sq_norm(x: &[f64]) -> f64 {
    0.5 * x.iter().map(|v| v * v).sum::<f64>()
}

fn euclid_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Dense Hopfield energy `−lse(β, Ξᵀx) + ½⟨x,x⟩`.
pub fn dense_energy(x: &[f64], xi: &PatternMatrix, beta: f64) -> Result<f64> {
    let scores = xi.inner_products(x)?;
    Ok(-lse(beta, &scores)? + half_sq_norm(x))
}

/// Sparse Hopfield energy `−Ψ*_α(β, Ξᵀx) + ½⟨x,x⟩`; equals
/// [`dense_energy`] at α=1.
pub fn sparse_energy(x: &[f64], xi: &PatternMatrix, beta: f64, alpha: AlphaParam) -> Result<f64> {
    let scores = xi.inner_products(x)?;
    Ok(-psi_conjugate(beta, &scores, alpha)? + half_sq_norm(x))
}

/// One-step dense retrieval `Ξ · softmax(β Ξᵀx)`.
pub fn retrieve_dense(x: &[f64], xi: &PatternMatrix, beta: f64) -> Result<Vec<f64>> {
    let scores = xi.inner_products(x)?;
    let p = softmax(&scores, beta)?;
    xi.combine(&p.probs)
}

/// One-step sparse retrieval `Ξ · entmax_α(β Ξᵀx)`; equals
/// [`retrieve_dense`] at α=1.
pub fn retrieve_alpha(
    x: &[f64],
    xi: &PatternMatrix,
    beta: f64,
    alpha: AlphaParam,
) -> Result<Vec<f64>> {
    let scores = xi.inner_products(x)?;
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::InvalidBeta(beta));
    }
    let scaled: Vec<f64> = scores.iter().map(|v| beta * v).collect();
    let p = entmax(&scaled, alpha)?;
    xi.combine(&p.probs)
}

/// Extrapolated retrieval `λ·T_α(x) + (1−λ)·T_1(x)`.
///
/// λ=0 and λ=1 return the dense and sparse dynamics bitwise; other λ use
/// exactly the linear-mixture expression.
pub fn retrieve_extrapolated(
    x: &[f64],
    xi: &PatternMatrix,
    beta: f64,
    alpha: AlphaParam,
    lambda: f64,
) -> Result<Vec<f64>> {
    if lambda == 0.0 {
        return retrieve_dense(x, xi, beta);
    }
    if lambda == 1.0 {
        return retrieve_alpha(x, xi, beta, alpha);
    }
    let ta = retrieve_alpha(x, xi, beta, alpha)?;
    let td = retrieve_dense(x, xi, beta)?;
    Ok(ta
        .iter()
        .zip(&td)
        .map(|(&a, &d)| lambda * a + (1.0 - lambda) * d)
        .collect())
}

/// Exponential retrieval-error bound for the dense dynamics:
/// `2m(M−1)·exp{−β(⟨ξ_μ, x⟩ − max_ν ⟨ξ_μ, ξ_ν⟩)}`.
///
/// The max runs over all ν including μ; `exclude_target` switches to the
/// ν≠μ convention used by some prior analyses, for comparison runs.
pub fn bound_dense_with(
    x: &[f64],
    xi: &PatternMatrix,
    mu: usize,
    beta: f64,
    exclude_target: bool,
) -> Result<f64> {
    xi.check_index(mu)?;
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::InvalidBeta(beta));
    }
    let scores = xi.inner_products(x)?;
    let target = xi.column(mu).to_vec();
    let gram_max = (0..xi.count())
        .filter(|&nu| !(exclude_target && nu == mu))
        .map(|nu| {
            xi.column(nu)
                .iter()
                .zip(&target)
                .map(|(a, b)| a * b)
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let m = xi.max_norm();
    let mm = (xi.count() - 1) as f64;
    Ok(2.0 * m * mm * (-beta * (scores[mu] - gram_max)).exp())
}

/// [`bound_dense_with`] with the max taken over all ν, as stated.
pub fn bound_dense(x: &[f64], xi: &PatternMatrix, mu: usize, beta: f64) -> Result<f64> {
    bound_dense_with(x, xi, mu, beta, false)
}

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Retrieval-error bound for the α=2 dynamics:
/// `m + mβ[κ(max_ν⟨ξ_ν,x⟩ − [Ξᵀx]_(κ)) + 1/β]` with κ the support size of
/// `sparsemax(β Ξᵀx)`.
pub fn bound_alpha2(x: &[f64], xi: &PatternMatrix, mu: usize, beta: f64) -> Result<f64> {
    xi.check_index(mu)?;
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::InvalidBeta(beta));
    }
    let scores = xi.inner_products(x)?;
    let scaled: Vec<f64> = scores.iter().map(|v| beta * v).collect();
    let (p, _) = sparsemax(&scaled)?;
    let kappa = p.kappa;
    let top = sorted_desc(&scores);
    let m = xi.max_norm();
    Ok(m + m * beta * (kappa as f64 * (top[0] - top[kappa - 1]) + 1.0 / beta))
}

/// Retrieval-error bound for the α-entmax dynamics, 1 < α ≤ 2:
///
/// ```text
/// m + mκ[(α−1)β(max_ν⟨ξ_ν,x⟩ − [Ξᵀx]_(κ+1))]^{1/(α−1)}
/// ```
///
/// κ is the support size of the actually computed `entmax_α(β Ξᵀx)`, and
/// `[Ξᵀx]_(M+1) := [Ξᵀx]_(M) − M^{1−α}/((α−1)β)` covers the full-support
/// case.  α=1 is rejected; use [`bound_dense`] for the dense dynamics.
pub fn bound_general(
    x: &[f64],
    xi: &PatternMatrix,
    mu: usize,
    beta: f64,
    alpha: AlphaParam,
) -> Result<f64> {
    xi.check_index(mu)?;
    let a = alpha.value();
    if a <= 1.0 {
        return Err(Error::InvalidAlpha(a));
    }
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::InvalidBeta(beta));
    }
    let scores = xi.inner_products(x)?;
    let mm = xi.count();
    let scaled: Vec<f64> = scores.iter().map(|v| beta * v).collect();
    let p = entmax(&scaled, alpha)?;
    let kappa = p.kappa;
    let top = sorted_desc(&scores);
    let next = if kappa < mm {
        top[kappa]
    } else {
        top[mm - 1] - (mm as f64).powf(1.0 - a) / ((a - 1.0) * beta)
    };
    let base = (a - 1.0) * beta * (top[0] - next);
    let m = xi.max_norm();
    Ok(m + m * kappa as f64 * base.max(0.0).powf(1.0 / (a - 1.0)))
}

/// Retrieval-error bound for the extrapolated mixture:
/// `|λ|·bound_general + |1−λ|·bound_dense`.
pub fn bound_extrapolated(
    x: &[f64],
    xi: &PatternMatrix,
    mu: usize,
    beta: f64,
    alpha: AlphaParam,
    lambda: f64,
) -> Result<f64> {
    let bg = bound_general(x, xi, mu, beta, alpha)?;
    let bd = bound_dense(x, xi, mu, beta)?;
    Ok(lambda.abs() * bg + (1.0 - lambda).abs() * bd)
}

/// Everything the verification harness wants to know about one retrieval.
#[derive(Debug, Clone)]
pub struct RetrievalReport {
    /// One-step retrieval output.
    pub retrieved: Vec<f64>,
    /// Target pattern index μ.
    pub target_index: usize,
    /// `‖T(x) − ξ_μ‖`.
    pub error: f64,
    /// The applicable error bound (dense for α=1, general otherwise).
    pub bound: f64,
    /// Sorted raw inner products `[Ξᵀx]_(k)`, non-increasing.
    pub inner_products: Vec<f64>,
    /// Support size of `entmax_α(β Ξᵀx)` (M for α=1).
    pub kappa: usize,
}

/// Run one retrieval and assemble its [`RetrievalReport`].
pub fn retrieval_report(
    x: &[f64],
    xi: &PatternMatrix,
    mu: usize,
    beta: f64,
    alpha: AlphaParam,
) -> Result<RetrievalReport> {
    xi.check_index(mu)?;
    let scores = xi.inner_products(x)?;
    let scaled: Vec<f64> = scores.iter().map(|v| beta * v).collect();
    let p = entmax(&scaled, alpha)?;
    let retrieved = xi.combine(&p.probs)?;
    let error = euclid_dist(&retrieved, xi.column(mu));
    let bound = if alpha.is_softmax() {
        bound_dense(x, xi, mu, beta)?
    } else {
        bound_general(x, xi, mu, beta, alpha)?
    };
    Ok(RetrievalReport {
        retrieved,
        target_index: mu,
        error,
        bound,
        inner_products: sorted_desc(&scores),
        kappa: p.kappa,
    })
}

/// One row of a retrieval experiment table.  Serialized by the harness as
/// CSV with columns `alpha,beta,noise_norm,trial,error,bound,kappa`.
#[derive(Debug, Clone, Copy)]
pub struct ExperimentRow {
    /// Sparsity parameter of the dynamics.
    pub alpha: f64,
    /// Inverse temperature.
    pub beta: f64,
    /// Query noise magnitude `‖η‖`.
    pub noise_norm: f64,
    /// Trial index within the (α, ‖η‖) cell.
    pub trial: usize,
    /// Observed retrieval error.
    pub error: f64,
    /// Applicable error bound.
    pub bound: f64,
    /// Support size of the transform.
    pub kappa: usize,
}

/// Draw a Gaussian direction scaled to an exact norm (zero stays zero).
pub fn scaled_noise<R: Rng>(dim: usize, norm: f64, rng: &mut R) -> Vec<f64> {
    if norm == 0.0 {
        return vec![0.0; dim];
    }
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n > 1e-12 {
            return g.iter().map(|v| v * norm / n).collect();
        }
    }
}

/// Noise-robustness experiment: for each α and each noise magnitude, retrieve
/// `ξ_μ + η` over `trials` Gaussian draws of η scaled to the target norm, and
/// tabulate error, bound, and support size per trial.
///
/// Intended for well-separated patterns (pairwise inner products below the
/// self inner products), e.g. from [`orthonormal_patterns`].  Trials run in
/// parallel with per-trial seeds split off the master seed; row order is by
/// (α index, noise index, trial) regardless of scheduling.
pub fn noise_robustness_experiment(
    xi: &PatternMatrix,
    mu: usize,
    beta: f64,
    alphas: &[f64],
    noise_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<ExperimentRow>> {
    xi.check_index(mu)?;
    let alphas: Vec<AlphaParam> = alphas
        .iter()
        .map(|&a| AlphaParam::new(a))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, usize, usize)> = (0..alphas.len())
        .flat_map(|ai| {
            (0..noise_grid.len()).flat_map(move |ni| (0..trials).map(move |t| (ai, ni, t)))
        })
        .collect();
    cells
        .par_iter()
        .map(|&(ai, ni, trial)| {
            let alpha = alphas[ai];
            let noise_norm = noise_grid[ni];
            // Same noise draw for every α at a given (noise, trial) cell, so
            // the α curves are paired.
            let cell_seed = crate::seeding::split_seed(seed, (ni * trials + trial) as u64);
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(cell_seed);
            let eta = scaled_noise(xi.dim(), noise_norm, &mut rng);
            let x: Vec<f64> = xi.column(mu).iter().zip(&eta).map(|(a, b)| a + b).collect();
            let report = retrieval_report(&x, xi, mu, beta, alpha)?;
            Ok(ExperimentRow {
                alpha: alpha.value(),
                beta,
                noise_norm,
                trial,
                error: report.error,
                bound: report.bound,
                kappa: report.kappa,
            })
        })
        .collect()
}

/// Random orthonormal pattern columns (QR of a Gaussian matrix via modified
/// Gram-Schmidt), scaled to norm `m_norm`.  Requires `count ≤ dim`.
pub fn orthonormal_patterns<R: Rng>(
    dim: usize,
    count: usize,
    m_norm: f64,
    rng: &mut R,
) -> Result<PatternMatrix> {
    if count > dim {
        return Err(Error::DimMismatch {
            context: "orthonormal pattern count vs dimension",
            left: count,
            right: dim,
        });
    }
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(count);
    while cols.len() < count {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        for c in &cols {
            let dot: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum::<f64>() / (m_norm * m_norm);
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= dot * ci;
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n < 1e-8 {
            continue; // degenerate draw, retry
        }
        for vi in &mut v {
            *vi *= m_norm / n;
        }
        cols.push(v);
    }
    PatternMatrix::from_columns(cols)
}

/// Random pattern columns, each scaled to norm `m_norm`.
pub fn unit_norm_patterns<R: Rng>(
    dim: usize,
    count: usize,
    m_norm: f64,
    rng: &mut R,
) -> Result<PatternMatrix> {
    let cols: Vec<Vec<f64>> = (0..count)
        .map(|_| {
            let v = scaled_noise(dim, m_norm, rng);
            v
        })
        .collect();
    PatternMatrix::from_columns(cols)
}
