//! Attention operators: dense, sparse, extrapolated, and the perturbed
//! variants used for weak-model guidance, plus a projection-equipped
//! multi-head layer.
//!
//! Logits are `QKᵀ/(√d·τ)` with `d` the key/query width and τ the
//! temperature, i.e. inverse temperature `β = 1/(√d·τ)`.  Rows of the weight
//! matrix live on the simplex; the sparse rows may contain exact zeros.
//!
//! The extrapolated operator accentuates the sparse component beyond the
//! dense one on identical logits:
//!
//! ```text
//! At_λ(Q,K,V) = At(Q,K,V) + λ·(At_α(Q,K,V) − At(Q,K,V))
//! ```
//!
//! λ=0 is the dense baseline bitwise, λ=1 is the pure sparse operator
//! bitwise, and λ>1 extrapolates past it (mixed weight rows still sum to 1,
//! with possibly negative entries).

use crate::simplex::{entmax, softmax, AlphaParam};
use crate::{Error, Result};
use ndarray::{Array2, ArrayView2, Axis};

/// Per-layer attention configuration.
#[derive(Debug, Clone)]
pub struct AttentionConfig {
    /// Sparsity parameter of the sparse branch.
    pub alpha: AlphaParam,
    /// Extrapolation scale λ.
    pub lambda: f64,
    /// Temperature τ (logits are divided by √d·τ).
    pub temperature: f64,
    /// Number of attention heads.
    pub heads: usize,
    /// Per-layer-group enable flags for the extrapolated substitution.
    pub layer_group_mask: Vec<bool>,
}

impl AttentionConfig {
    /// The default operating point: α = 1.5, λ = 2, τ = 1.
    pub fn standard(heads: usize, groups: usize) -> Self {
        Self {
            alpha: AlphaParam::new(1.5).unwrap(),
            lambda: 2.0,
            temperature: 1.0,
            heads,
            layer_group_mask: vec![true; groups],
        }
    }

    /// True iff the substitution is live for `group`.
    pub fn active_for(&self, group: usize) -> bool {
        self.lambda != 0.0
            && !self.alpha.is_softmax()
            && self.layer_group_mask.get(group).copied().unwrap_or(false)
    }
}

/// Query/key/value projection weights for one layer.
#[derive(Debug, Clone)]
pub struct ProjectionWeights {
    /// Query projection, (width_x, width).
    pub w_q: Array2<f64>,
    /// Key projection, (width_ctx, width).
    pub w_k: Array2<f64>,
    /// Value projection, (width_ctx, width).
    pub w_v: Array2<f64>,
    /// Output projection, (width, width_x).
    pub w_o: Array2<f64>,
}

/// Which attention a [`multihead_layer`] call runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerMode {
    /// Self-attention with the dense baseline operator.
    SelfDense,
    /// Self-attention with the sparse operator (diagnostic only; it
    /// concentrates weight on the diagonal and degrades generation).
    SelfSparse,
    /// Cross-attention; the extrapolated substitution applies here when the
    /// config gates it on.
    Cross,
}

fn check_qkv(q: &ArrayView2<f64>, k: &ArrayView2<f64>, v: &ArrayView2<f64>) -> Result<()> {
    if q.ncols() != k.ncols() {
        return Err(Error::DimMismatch {
            context: "query vs key width",
            left: q.ncols(),
            right: k.ncols(),
        });
    }
    if k.nrows() != v.nrows() {
        return Err(Error::DimMismatch {
            context: "key vs value rows",
            left: k.nrows(),
            right: v.nrows(),
        });
    }
    if q.is_empty() || k.is_empty() {
        return Err(Error::EmptyInput);
    }
    if q.iter().any(|x| !x.is_finite())
        || k.iter().any(|x| !x.is_finite())
        || v.iter().any(|x| !x.is_finite())
    {
        return Err(Error::NonFinite("attention inputs"));
    }
    Ok(())
}

fn check_temperature(temperature: f64) -> Result<()> {
    if !temperature.is_finite() || temperature <= 0.0 {
        return Err(Error::InvalidTemperature(temperature));
    }
    Ok(())
}

/// Scaled logits `QKᵀ/(√d·τ)`.
pub fn attention_logits(
    q: &ArrayView2<f64>,
    k: &ArrayView2<f64>,
    temperature: f64,
) -> Result<Array2<f64>> {
    check_temperature(temperature)?;
    let d = q.ncols() as f64;
    let scale = 1.0 / (d.sqrt() * temperature);
    Ok(q.dot(&k.t()) * scale)
}

/// Row-stochastic dense weights `softmax(QKᵀ/(√d·τ))`.
pub fn dense_weights(
    q: &ArrayView2<f64>,
    k: &ArrayView2<f64>,
    temperature: f64,
) -> Result<Array2<f64>> {
    let logits = attention_logits(q, k, temperature)?;
    let mut out = logits;
    for mut row in out.rows_mut() {
        let p = softmax(row.as_slice().unwrap(), 1.0)?;
        for (w, pi) in row.iter_mut().zip(p.probs) {
            *w = pi;
        }
    }
    Ok(out)
}

/// Row-wise sparse weights `entmax_α(QKᵀ/(√d·τ))`, α ∈ (1, 2].
pub fn sparse_weights(
    q: &ArrayView2<f64>,
    k: &ArrayView2<f64>,
    alpha: AlphaParam,
    temperature: f64,
) -> Result<Array2<f64>> {
    if alpha.is_softmax() {
        return Err(Error::InvalidAlpha(1.0));
    }
    let logits = attention_logits(q, k, temperature)?;
    let mut out = logits;
    for mut row in out.rows_mut() {
        let p = entmax(row.as_slice().unwrap(), alpha)?;
        for (w, pi) in row.iter_mut().zip(p.probs) {
            *w = pi;
        }
    }
    Ok(out)
}

/// Dense attention `softmax(QKᵀ/(√d·τ))·V`.
pub fn dense_attention(
    q: &ArrayView2<f64>,
    k: &ArrayView2<f64>,
    v: &ArrayView2<f64>,
    temperature: f64,
) -> Result<Array2<f64>> {
    check_qkv(q, k, v)?;
    Ok(dense_weights(q, k, temperature)?.dot(v))
}

/// Sparse attention `entmax_α(QKᵀ/(√d·τ))·V`; α=1 callers must use
/// [`dense_attention`].
pub fn sparse_attention(
    q: &ArrayView2<f64>,
    k: &ArrayView2<f64>,
    v: &ArrayView2<f64>,
    alpha: AlphaParam,
    temperature: f64,
) -> Result<Array2<f64>> {
    check_qkv(q, k, v)?;
    Ok(sparse_weights(q, k, alpha, temperature)?.dot(v))
}

/// Extrapolated attention `dense + λ·(sparse − dense)` on identical logits.
///
/// λ=0 returns the dense output bitwise; λ=1 returns the sparse output
/// bitwise.
pub fn extrapolated_attention(
    q: &ArrayView2<f64>,
    k: &ArrayView2<f64>,
    v: &ArrayView2<f64>,
    cfg: &AttentionConfig,
) -> Result<Array2<f64>> {
    if cfg.lambda == 0.0 {
        return dense_attention(q, k, v, cfg.temperature);
    }
    if cfg.lambda == 1.0 {
        return sparse_attention(q, k, v, cfg.alpha, cfg.temperature);
    }
    check_qkv(q, k, v)?;
    let dense = dense_weights(q, k, cfg.temperature)?;
    let sparse = sparse_weights(q, k, cfg.alpha, cfg.temperature)?;
    let mixed = &dense + cfg.lambda * (&sparse - &dense);
    Ok(mixed.dot(v))
}

/// Self-attention with the map replaced by the identity: output = V.
pub fn identity_attention(
    q: &ArrayView2<f64>,
    k: &ArrayView2<f64>,
    v: &ArrayView2<f64>,
) -> Result<Array2<f64>> {
    check_qkv(q, k, v)?;
    if q.nrows() != k.nrows() {
        return Err(Error::DimMismatch {
            context: "identity attention needs square maps",
            left: q.nrows(),
            right: k.nrows(),
        });
    }
    Ok(v.to_owned())
}

/// Blur width for [`blurred_attention`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlurSigma {
    /// Gaussian of the given standard deviation, truncated at 3σ.
    Finite(f64),
    /// The σ→∞ limit: logits replaced by their query-axis mean.
    Infinite,
}

/// Self-attention with the pre-softmax logits blurred along the query axis
/// by a normalized 1-D Gaussian kernel (truncated at 3σ, renormalized; the
/// window is renormalized again where it overhangs the matrix edge), then
/// softmax rows and multiply by V.
pub fn blurred_attention(
    q: &ArrayView2<f64>,
    k: &ArrayView2<f64>,
    v: &ArrayView2<f64>,
    sigma: BlurSigma,
    temperature: f64,
) -> Result<Array2<f64>> {
    check_qkv(q, k, v)?;
    if q.nrows() != k.nrows() {
        return Err(Error::DimMismatch {
            context: "blurred attention needs square maps",
            left: q.nrows(),
            right: k.nrows(),
        });
    }
    let logits = attention_logits(q, k, temperature)?;
    let blurred = match sigma {
        BlurSigma::Infinite => {
            let mean = logits.mean_axis(Axis(0)).unwrap();
            let mut out = Array2::zeros(logits.raw_dim());
            for mut row in out.rows_mut() {
                row.assign(&mean);
            }
            out
        }
        BlurSigma::Finite(s) => {
            if !s.is_finite() || s <= 0.0 {
                return Err(Error::InvalidSigma(s));
            }
            let radius = (3.0 * s).floor() as i64;
            let kernel: Vec<f64> = (-radius..=radius)
                .map(|j| (-((j * j) as f64) / (2.0 * s * s)).exp())
                .collect();
            let ksum: f64 = kernel.iter().sum();
            let kernel: Vec<f64> = kernel.into_iter().map(|w| w / ksum).collect();
            let n = logits.nrows() as i64;
            let mut out = Array2::zeros(logits.raw_dim());
            for i in 0..n {
                let mut wsum = 0.0;
                for (off, &w) in (-radius..=radius).zip(&kernel) {
                    let j = i + off;
                    if j >= 0 && j < n {
                        wsum += w;
                    }
                }
                for (off, &w) in (-radius..=radius).zip(&kernel) {
                    let j = i + off;
                    if j >= 0 && j < n {
                        let scaled = w / wsum;
                        for c in 0..logits.ncols() {
                            out[[i as usize, c]] += scaled * logits[[j as usize, c]];
                        }
                    }
                }
            }
            out
        }
    };
    let mut weights = blurred;
    for mut row in weights.rows_mut() {
        let p = softmax(row.as_slice().unwrap(), 1.0)?;
        for (w, pi) in row.iter_mut().zip(p.probs) {
            *w = pi;
        }
    }
    Ok(weights.dot(v))
}

/// Shannon entropy of each weight row, averaged; a sharpness diagnostic.
pub fn mean_row_entropy(weights: &ArrayView2<f64>) -> f64 {
    let mut total = 0.0;
    for row in weights.rows() {
        total += row
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum::<f64>();
    }
    total / weights.nrows() as f64
}

/// Projection-equipped multi-head attention layer.
///
/// Projects `x` (and `context` in cross mode; self modes use `x` as its own
/// context) to per-head Q, K, V, applies the per-head operator selected by
/// `mode` and `cfg`, concatenates heads, and applies the output projection.
/// The extrapolated substitution runs only in [`LayerMode::Cross`], and only
/// when `cfg.layer_group_mask[group]` is set.
pub fn multihead_layer<'a>(
    x: &ArrayView2<'a, f64>,
    context: &ArrayView2<'a, f64>,
    w: &ProjectionWeights,
    cfg: &AttentionConfig,
    mode: LayerMode,
    group: usize,
) -> Result<Array2<f64>> {
    if cfg.heads == 0 {
        return Err(Error::EmptyInput);
    }
    let ctx = match mode {
        LayerMode::Cross => context,
        _ => x,
    };
    if x.ncols() != w.w_q.nrows() {
        return Err(Error::DimMismatch {
            context: "tokens vs query projection",
            left: x.ncols(),
            right: w.w_q.nrows(),
        });
    }
    if ctx.ncols() != w.w_k.nrows() {
        return Err(Error::DimMismatch {
            context: "context vs key projection",
            left: ctx.ncols(),
            right: w.w_k.nrows(),
        });
    }
    let width = w.w_q.ncols();
    if width % cfg.heads != 0 {
        return Err(Error::DimMismatch {
            context: "width vs head count",
            left: width,
            right: cfg.heads,
        });
    }
    let dh = width / cfg.heads;

    let q = x.dot(&w.w_q);
    let k = ctx.dot(&w.w_k);
    let v = ctx.dot(&w.w_v);

    let mut concat = Array2::zeros((x.nrows(), width));
    for h in 0..cfg.heads {
        let cols = h * dh..(h + 1) * dh;
        let qh = q.slice(ndarray::s![.., cols.clone()]);
        let kh = k.slice(ndarray::s![.., cols.clone()]);
        let vh = v.slice(ndarray::s![.., cols.clone()]);
        let head_out = match mode {
            LayerMode::SelfDense => dense_attention(&qh, &kh, &vh, cfg.temperature)?,
            LayerMode::SelfSparse => {
                sparse_attention(&qh, &kh, &vh, cfg.alpha, cfg.temperature)?
            }
            LayerMode::Cross => {
                if cfg.active_for(group) {
                    extrapolated_attention(&qh, &kh, &vh, cfg)?
                } else {
                    dense_attention(&qh, &kh, &vh, cfg.temperature)?
                }
            }
        };
        concat.slice_mut(ndarray::s![.., cols]).assign(&head_out);
    }
    Ok(concat.dot(&w.w_o))
}
