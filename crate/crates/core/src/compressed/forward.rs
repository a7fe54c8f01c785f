use crate::attention::core::{attend_backward, attend_forward, linear_counted, AttendCache, Projections};
use crate::attention::{check_input, AttentionConfig, AttentionWeights, Frozen, Gradients};
use crate::dense::{Matrix, MulCounter, Tensor3};
use crate::error::{arg_err, shape_err, Error, Result};
use crate::scalar::Scalar;
use crate::transform::{kept_count, DctBasis, TruncatedDct};

use super::weights::{CompressedVariant, CompressedWeights};

/// Channel encoder/decoder around the compressed attention core.
#[derive(Debug, Clone, PartialEq)]
enum Codec<T> {
    /// Truncated DCT in, zero-pad + IDCT out.
    Dct { encode: Matrix<T>, decode: Matrix<T> },
    /// First `kept` channels in, zero-padding out.
    Select { c: usize, kept: usize },
}

impl<T: Scalar> Codec<T> {
    fn from_trunc(trunc: &TruncatedDct<T>) -> Self {
        Codec::Dct {
            encode: trunc.dbar().clone(),
            decode: trunc.dbar_inv().clone(),
        }
    }

    fn kept(&self) -> usize {
        match self {
            Codec::Dct { encode, .. } => encode.rows(),
            Codec::Select { kept, .. } => *kept,
        }
    }

    fn channels(&self) -> usize {
        match self {
            Codec::Dct { encode, .. } => encode.cols(),
            Codec::Select { c, .. } => *c,
        }
    }

    /// `tokens x C -> tokens x kept`.
    fn encode(&self, x: &Matrix<T>, counter: Option<&mut MulCounter>) -> Result<Matrix<T>> {
        match self {
            Codec::Dct { encode, .. } => x.matmul_t(encode, counter),
            Codec::Select { kept, .. } => Ok(x.block(0, 0, x.rows(), *kept)),
        }
    }

    /// Adjoint of `encode`: `tokens x kept -> tokens x C`.
    fn encode_adjoint(&self, g: &Matrix<T>) -> Result<Matrix<T>> {
        match self {
            Codec::Dct { encode, .. } => g.matmul(encode, None),
            Codec::Select { c, .. } => Ok(pad(g, *c)),
        }
    }

    /// `tokens x kept -> tokens x C`.
    fn decode(&self, a: &Matrix<T>, counter: Option<&mut MulCounter>) -> Result<Matrix<T>> {
        match self {
            Codec::Dct { decode, .. } => a.matmul_t(decode, counter),
            Codec::Select { c, .. } => Ok(pad(a, *c)),
        }
    }

    /// Adjoint of `decode`: `tokens x C -> tokens x kept`.
    fn decode_adjoint(&self, g: &Matrix<T>) -> Result<Matrix<T>> {
        match self {
            Codec::Dct { decode, .. } => g.matmul(decode, None),
            Codec::Select { kept, .. } => Ok(g.block(0, 0, g.rows(), *kept)),
        }
    }

    /// The `C x kept` decoding matrix.
    fn decode_matrix(&self) -> Matrix<T> {
        match self {
            Codec::Dct { decode, .. } => decode.clone(),
            Codec::Select { c, kept } => Matrix::from_fn(*c, *kept, |r, k| if r == k { T::one() } else { T::zero() }),
        }
    }
}

fn pad<T: Scalar>(a: &Matrix<T>, c: usize) -> Matrix<T> {
    let mut out = Matrix::zeros(a.rows(), c);
    out.set_block(0, 0, a);
    out
}

/// `W_O D̄⁻¹`: the `C x kept` matrix that applies zero-padding, IDCT and the
/// output projection in one product.
pub fn fuse_output<T: Scalar>(wo: &Matrix<T>, trunc: &TruncatedDct<T>) -> Result<Matrix<T>> {
    if wo.cols() != trunc.size() {
        return shape_err(
            "fuse_output",
            format!("W_O {:?} with a size-{} transform", wo.shape(), trunc.size()),
        );
    }
    wo.matmul(trunc.dbar_inv(), None)
}

/// Intermediates of a compressed forward pass.
#[derive(Debug, Clone)]
pub struct CompressedCache<T> {
    cfg: AttentionConfig,
    weights: CompressedWeights<T>,
    codec: Codec<T>,
    variant: CompressedVariant,
    inner: AttendCache<T>,
    /// Naive: decoded head outputs (`tokens x C`). Simplified: the fused
    /// `C x kept` output matrix.
    out_input: Matrix<T>,
}

impl<T: Scalar> CompressedCache<T> {
    pub fn variant(&self) -> CompressedVariant {
        self.variant
    }

    pub fn attention_probs(&self) -> &[Matrix<T>] {
        &self.inner.probs
    }
}

fn check_compressed<T: Scalar>(cw: &CompressedWeights<T>, cfg: &AttentionConfig, kept: usize) -> Result<()> {
    cfg.validate()?;
    let c = cfg.c;
    if cw.kept() != kept {
        return arg_err(
            "tau",
            format!("weights hold {} coefficients but the transform keeps {kept}", cw.kept()),
        );
    }
    if cw.heads() != cfg.p || kept % cfg.p != 0 {
        return arg_err(
            "heads",
            format!("{kept} retained channels not divisible into {} heads", cfg.p),
        );
    }
    let side = cfg.bias_side();
    let ok = [&cw.wq, &cw.wk, &cw.wv].iter().all(|m| m.shape() == (kept, kept))
        && cw.wo.shape() == (c, c)
        && [&cw.bq, &cw.bk, &cw.bv].iter().all(|b| b.len() == kept)
        && cw.bo.len() == c
        && cw.bhat.iter().all(|t| t.shape() == (side, side));
    if !ok {
        return shape_err("compressed weights", format!("weights do not match config {cfg:?} with kept={kept}"));
    }
    Ok(())
}

fn projections<T: Scalar>(cw: &CompressedWeights<T>) -> Projections<'_, T> {
    Projections {
        wq: &cw.wq,
        wk: &cw.wk,
        wv: &cw.wv,
        bq: &cw.bq,
        bk: &cw.bk,
        bv: &cw.bv,
        bhat: &cw.bhat,
    }
}

fn run_forward<T: Scalar>(
    x: &Tensor3<T>,
    cw: &CompressedWeights<T>,
    cfg: &AttentionConfig,
    codec: Codec<T>,
    variant: CompressedVariant,
    mut counter: Option<&mut MulCounter>,
) -> Result<(Tensor3<T>, CompressedCache<T>)> {
    if codec.channels() != cfg.c {
        return shape_err("compressed attention", format!("transform over {} channels, config has {}", codec.channels(), cfg.c));
    }
    check_compressed(cw, cfg, codec.kept())?;
    check_input(x, cfg, cfg.c)?;
    let x_tilde = codec.encode(&x.to_token_matrix(), counter.as_deref_mut())?;
    let inner = attend_forward(x_tilde, &projections(cw), cfg.n, cfg.m, counter.as_deref_mut())?;
    let (y, out_input) = match variant {
        CompressedVariant::Naive => {
            let z = codec.decode(&inner.a, counter.as_deref_mut())?;
            (linear_counted(&z, &cw.wo, &cw.bo, counter)?, z)
        }
        CompressedVariant::Simplified => {
            // derived from the current W_O on every call; not counted
            let fused = cw.wo.matmul(&codec.decode_matrix(), None)?;
            (linear_counted(&inner.a, &fused, &cw.bo, counter)?, fused)
        }
    };
    let y = Tensor3::from_token_matrix(cfg.n, cfg.m2(), y)?;
    Ok((
        y,
        CompressedCache {
            cfg: *cfg,
            weights: cw.clone(),
            codec,
            variant,
            inner,
            out_input,
        },
    ))
}

/// DCT-compressed attention: truncated DCT along channels, attention on the
/// `kept` coefficients (head dim `kept / P`), then zero-pad + IDCT + `W_O`
/// (naive) or the fused `W_O D̄⁻¹` (simplified).
pub fn compressed_forward<T: Scalar>(
    x: &Tensor3<T>,
    cw: &CompressedWeights<T>,
    cfg: &AttentionConfig,
    trunc: &TruncatedDct<T>,
    variant: CompressedVariant,
    counter: Option<&mut MulCounter>,
) -> Result<(Tensor3<T>, CompressedCache<T>)> {
    run_forward(x, cw, cfg, Codec::from_trunc(trunc), variant, counter)
}

/// Ablation: the compressed pipeline with the DCT removed. Keeps the first
/// `round(tau * C)` raw channels and zero-pads the attention output back to
/// `C` before `W_O`.
pub fn truncate_no_dct_forward<T: Scalar>(
    x: &Tensor3<T>,
    cw: &CompressedWeights<T>,
    cfg: &AttentionConfig,
    tau: f64,
) -> Result<Tensor3<T>> {
    Ok(truncate_no_dct_forward_cached(x, cw, cfg, tau)?.0)
}

/// [`truncate_no_dct_forward`] returning the cache for
/// [`compressed_backward`].
pub fn truncate_no_dct_forward_cached<T: Scalar>(
    x: &Tensor3<T>,
    cw: &CompressedWeights<T>,
    cfg: &AttentionConfig,
    tau: f64,
) -> Result<(Tensor3<T>, CompressedCache<T>)> {
    let kept = kept_count(cfg.c, tau)?;
    let codec = Codec::Select { c: cfg.c, kept };
    run_forward(x, cw, cfg, codec, CompressedVariant::Naive, None)
}

/// Reverse pass of a compressed forward. The transform matrices are
/// constants; `W_O` receives its gradient through the fused product in the
/// simplified variant.
pub fn compressed_backward<T: Scalar>(cache: &CompressedCache<T>, dy: &Tensor3<T>) -> Result<Gradients<T>> {
    let cfg = &cache.cfg;
    if dy.shape() != (cfg.n, cfg.m2(), cfg.c) {
        return Err(Error::CacheMismatch(format!(
            "upstream gradient {:?} for a forward pass of shape ({}, {}, {})",
            dy.shape(),
            cfg.n,
            cfg.m2(),
            cfg.c
        )));
    }
    let cw = &cache.weights;
    let dy = dy.to_token_matrix();
    let bo = dy.col_sums();
    let (wo, da) = match cache.variant {
        CompressedVariant::Naive => {
            let wo = dy.t_matmul(&cache.out_input)?;
            let dz = dy.matmul(&cw.wo, None)?;
            (wo, cache.codec.decode_adjoint(&dz)?)
        }
        CompressedVariant::Simplified => {
            let fused = &cache.out_input;
            let dfused = dy.t_matmul(&cache.inner.a)?;
            let wo = dfused.matmul_t(&cache.codec.decode_matrix(), None)?;
            (wo, dy.matmul(fused, None)?)
        }
    };
    let g = attend_backward(&cache.inner, &projections(cw), &da)?;
    let dx = cache.codec.encode_adjoint(&g.x_in)?;
    Ok(Gradients {
        wq: g.wq,
        wk: g.wk,
        wv: g.wv,
        wo,
        bq: g.bq,
        bk: g.bk,
        bv: g.bv,
        bo,
        bhat: g.bhat,
        dx: Tensor3::from_token_matrix(cfg.n, cfg.m2(), dx)?,
    })
}

/// Vanilla weights computing the same function as a `tau = 1` compressed
/// block: `W_Q' = W_Q D`, `W_K' = W_K D`, `W_V' = W_V D`, `W_O' = W_O D^T`.
pub fn conjugate_tau1<T: Scalar>(cw: &CompressedWeights<T>, basis: &DctBasis<T>) -> Result<AttentionWeights<T>> {
    let c = basis.size();
    if cw.kept() != c || cw.channels() != c {
        return arg_err(
            "tau",
            format!("conjugation needs kept = C = {c}, weights keep {} of {}", cw.kept(), cw.channels()),
        );
    }
    let d = basis.matrix();
    Ok(AttentionWeights {
        wq: cw.wq.matmul(d, None)?,
        wk: cw.wk.matmul(d, None)?,
        wv: cw.wv.matmul(d, None)?,
        wo: cw.wo.matmul_t(d, None)?,
        bq: cw.bq.clone(),
        bk: cw.bk.clone(),
        bv: cw.bv.clone(),
        bo: cw.bo.clone(),
        bhat: cw.bhat.clone(),
        frozen: Frozen::default(),
    })
}
