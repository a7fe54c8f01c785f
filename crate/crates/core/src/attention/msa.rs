use crate::dense::{Matrix, MulCounter, Tensor3};
use crate::error::{shape_err, Error, Result};
use crate::scalar::Scalar;

use super::config::AttentionConfig;
use super::core::{attend_backward, attend_forward, linear_counted, AttendCache, Projections};
use super::params::{AttentionWeights, Gradients};

/// Intermediates of a vanilla forward pass, consumed by [`msa_backward`].
#[derive(Debug, Clone)]
pub struct MsaCache<T> {
    cfg: AttentionConfig,
    weights: AttentionWeights<T>,
    inner: AttendCache<T>,
}

impl<T: Scalar> MsaCache<T> {
    pub fn config(&self) -> &AttentionConfig {
        &self.cfg
    }

    /// Per-window, per-head attention probabilities (`window * P + head`).
    pub fn attention_probs(&self) -> &[Matrix<T>] {
        &self.inner.probs
    }

    /// Concatenated head outputs before the output projection.
    pub fn head_outputs(&self) -> &Matrix<T> {
        &self.inner.a
    }
}

pub(crate) fn check_weights<T: Scalar>(w: &AttentionWeights<T>, cfg: &AttentionConfig) -> Result<()> {
    cfg.validate()?;
    let c = cfg.c;
    let side = cfg.bias_side();
    let square = [&w.wq, &w.wk, &w.wv, &w.wo].iter().all(|m| m.shape() == (c, c));
    let vecs = [&w.bq, &w.bk, &w.bv, &w.bo].iter().all(|b| b.len() == c);
    let tables = w.bhat.len() == cfg.p && w.bhat.iter().all(|t| t.shape() == (side, side));
    if !(square && vecs && tables) {
        return shape_err("attention weights", format!("weights do not match config {cfg:?}"));
    }
    Ok(())
}

pub(crate) fn check_input<T: Scalar>(x: &Tensor3<T>, cfg: &AttentionConfig, channels: usize) -> Result<()> {
    if x.shape() != (cfg.n, cfg.m2(), channels) {
        return shape_err(
            "attention input",
            format!("{:?}, expected ({}, {}, {channels})", x.shape(), cfg.n, cfg.m2()),
        );
    }
    Ok(())
}

/// Vanilla windowed multi-head self-attention:
/// `Q, K, V = X W^T + b`, per head `softmax(Q K^T / sqrt(d) + B) V`, heads
/// concatenated, then `A W_O^T + b_O`.
pub fn msa_forward<T: Scalar>(
    x: &Tensor3<T>,
    w: &AttentionWeights<T>,
    cfg: &AttentionConfig,
    mut counter: Option<&mut MulCounter>,
) -> Result<(Tensor3<T>, MsaCache<T>)> {
    check_weights(w, cfg)?;
    check_input(x, cfg, cfg.c)?;
    let proj = Projections {
        wq: &w.wq,
        wk: &w.wk,
        wv: &w.wv,
        bq: &w.bq,
        bk: &w.bk,
        bv: &w.bv,
        bhat: &w.bhat,
    };
    let inner = attend_forward(x.to_token_matrix(), &proj, cfg.n, cfg.m, counter.as_deref_mut())?;
    let y = linear_counted(&inner.a, &w.wo, &w.bo, counter)?;
    let y = Tensor3::from_token_matrix(cfg.n, cfg.m2(), y)?;
    Ok((
        y,
        MsaCache {
            cfg: *cfg,
            weights: w.clone(),
            inner,
        },
    ))
}

/// Reverse pass of [`msa_forward`] for an upstream gradient `dy`. Frozen
/// projection matrices receive zero gradient.
pub fn msa_backward<T: Scalar>(cache: &MsaCache<T>, dy: &Tensor3<T>) -> Result<Gradients<T>> {
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
    let w = &cache.weights;
    let dy = dy.to_token_matrix();
    let wo_grad = dy.t_matmul(&cache.inner.a)?;
    let bo_grad = dy.col_sums();
    let da = dy.matmul(&w.wo, None)?;
    let proj = Projections {
        wq: &w.wq,
        wk: &w.wk,
        wv: &w.wv,
        bq: &w.bq,
        bk: &w.bk,
        bv: &w.bv,
        bhat: &w.bhat,
    };
    let g = attend_backward(&cache.inner, &proj, &da)?;
    let mut grads = Gradients {
        wq: g.wq,
        wk: g.wk,
        wv: g.wv,
        wo: wo_grad,
        bq: g.bq,
        bk: g.bk,
        bv: g.bv,
        bo: bo_grad,
        bhat: g.bhat,
        dx: Tensor3::from_token_matrix(cfg.n, cfg.m2(), g.x_in)?,
    };
    grads.mask(w.frozen);
    Ok(grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{normal_matrix, seeded_rng};

    fn random_input(cfg: &AttentionConfig, seed: u64) -> Tensor3<f64> {
        let mut rng = seeded_rng(seed);
        let m = normal_matrix(cfg.tokens(), cfg.c, 1.0, &mut rng);
        Tensor3::from_token_matrix(cfg.n, cfg.m2(), m).unwrap()
    }

    #[test]
    fn uniform_attention_averages_each_window() {
        let cfg = AttentionConfig::new(3, 2, 4, 2).unwrap();
        let mut w = AttentionWeights::<f64>::init(&cfg, 0).unwrap();
        w.wq = Matrix::zeros(4, 4);
        w.wk = Matrix::zeros(4, 4);
        w.wv = Matrix::identity(4);
        w.wo = Matrix::identity(4);
        let x = random_input(&cfg, 1);
        let (y, cache) = msa_forward(&x, &w, &cfg, None).unwrap();
        for p in cache.attention_probs() {
            assert!(p.as_slice().iter().all(|&v| (v - 0.25).abs() < 1e-15));
        }
        for win in 0..cfg.n {
            let mean: Vec<f64> = x.window(win).col_sums().iter().map(|s| s / 4.0).collect();
            for t in 0..4 {
                for ch in 0..4 {
                    assert!((y.get(win, t, ch) - mean[ch]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn single_token_is_two_linear_layers() {
        let cfg = AttentionConfig::new(1, 1, 4, 2).unwrap();
        let w = AttentionWeights::<f64>::randomized(&cfg, 0.5, 3).unwrap();
        let x = random_input(&cfg, 4);
        let (y, _) = msa_forward(&x, &w, &cfg, None).unwrap();
        let mut v = x.to_token_matrix().matmul_t(&w.wv, None).unwrap();
        v.add_row_vector(&w.bv).unwrap();
        let mut expect = v.matmul_t(&w.wo, None).unwrap();
        expect.add_row_vector(&w.bo).unwrap();
        assert!(y.to_token_matrix().max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let cfg = AttentionConfig::new(2, 2, 4, 2).unwrap();
        let w = AttentionWeights::<f64>::randomized(&cfg, 0.5, 7).unwrap();
        let (_, cache) = msa_forward(&random_input(&cfg, 8), &w, &cfg, None).unwrap();
        let g = msa_backward(&cache, &Tensor3::zeros(2, 4, 4)).unwrap();
        assert_eq!(g.max_abs(), 0.0);
    }

    #[test]
    fn backward_is_linear_in_upstream() {
        let cfg = AttentionConfig::new(2, 2, 4, 2).unwrap();
        let w = AttentionWeights::<f64>::randomized(&cfg, 0.5, 11).unwrap();
        let (_, cache) = msa_forward(&random_input(&cfg, 12), &w, &cfg, None).unwrap();
        let d1 = random_input(&cfg, 13);
        let d2 = random_input(&cfg, 14);
        let a = 0.37;
        let combo = Tensor3::from_vec(
            2,
            4,
            4,
            d1.as_slice().iter().zip(d2.as_slice()).map(|(x, y)| a * x + y).collect(),
        )
        .unwrap();
        let g1 = msa_backward(&cache, &d1).unwrap();
        let g2 = msa_backward(&cache, &d2).unwrap();
        let gc = msa_backward(&cache, &combo).unwrap();
        use crate::attention::Parameters;
        let f1 = g1.flatten();
        let f2 = g2.flatten();
        for ((c, x), y) in gc.flatten().iter().zip(&f1).zip(&f2) {
            assert!((c - (a * x + y)).abs() < 1e-10);
        }
        for ((c, x), y) in gc.dx.as_slice().iter().zip(g1.dx.as_slice()).zip(g2.dx.as_slice()) {
            assert!((c - (a * x + y)).abs() < 1e-10);
        }
    }

    #[test]
    fn mismatched_upstream_rejected() {
        let cfg = AttentionConfig::new(1, 2, 4, 1).unwrap();
        let w = AttentionWeights::<f64>::init(&cfg, 0).unwrap();
        let (_, cache) = msa_forward(&random_input(&cfg, 0), &w, &cfg, None).unwrap();
        assert!(matches!(
            msa_backward(&cache, &Tensor3::zeros(2, 4, 4)),
            Err(Error::CacheMismatch(_))
        ));
    }

    #[test]
    fn bad_shapes_rejected() {
        let cfg = AttentionConfig::new(1, 2, 4, 1).unwrap();
        let w = AttentionWeights::<f64>::init(&cfg, 0).unwrap();
        assert!(msa_forward(&Tensor3::zeros(1, 4, 8), &w, &cfg, None).is_err());
        let cfg2 = AttentionConfig::new(1, 2, 4, 2).unwrap();
        assert!(msa_forward(&Tensor3::zeros(1, 4, 4), &w, &cfg2, None).is_err());
    }

    #[test]
    fn frozen_projection_gets_zero_gradient() {
        let cfg = AttentionConfig::new(1, 2, 4, 2).unwrap();
        let mut w = AttentionWeights::<f64>::randomized(&cfg, 0.5, 2).unwrap();
        w.frozen.k = true;
        w.frozen.v = true;
        let x = random_input(&cfg, 3);
        let (y, cache) = msa_forward(&x, &w, &cfg, None).unwrap();
        let g = msa_backward(&cache, &y).unwrap();
        assert_eq!(g.wk.max_abs(), 0.0);
        assert_eq!(g.wv.max_abs(), 0.0);
        assert!(g.wq.max_abs() > 0.0);
        // bias of a frozen matrix stays trainable (b_K is softmax-invariant, so check b_V)
        assert!(g.bv.iter().any(|&v| v != 0.0));
    }

    #[test]
    fn single_precision_forward_tracks_double() {
        let cfg = AttentionConfig::new(2, 2, 8, 2).unwrap();
        let w = AttentionWeights::<f64>::randomized(&cfg, 0.3, 5).unwrap();
        let x = random_input(&cfg, 6);
        let (y64, _) = msa_forward(&x, &w, &cfg, None).unwrap();
        let w32 = AttentionWeights::<f32> {
            wq: w.wq.cast(),
            wk: w.wk.cast(),
            wv: w.wv.cast(),
            wo: w.wo.cast(),
            bq: w.bq.iter().map(|&v| v as f32).collect(),
            bk: w.bk.iter().map(|&v| v as f32).collect(),
            bv: w.bv.iter().map(|&v| v as f32).collect(),
            bo: w.bo.iter().map(|&v| v as f32).collect(),
            bhat: w.bhat.iter().map(|b| b.cast()).collect(),
            frozen: w.frozen,
        };
        let x32 = Tensor3::from_token_matrix(2, 4, x.to_token_matrix().cast()).unwrap();
        let (y32, _) = msa_forward(&x32, &w32, &cfg, None).unwrap();
        for (a, b) in y64.as_slice().iter().zip(y32.as_slice()) {
            assert!((a - *b as f64).abs() < 1e-5);
        }
    }
}
