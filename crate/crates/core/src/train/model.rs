use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::attention::{msa_backward, msa_forward, AttentionConfig, AttentionWeights, Gradients, MsaCache, Parameters};
use crate::compressed::{
    compressed_backward, compressed_forward, dct_init, truncate_no_dct_forward_cached, CompressedCache,
    CompressedVariant, CompressedWeights, InitTarget,
};
use crate::dense::{seeded_rng, softmax_rows, trunc_normal_with, Matrix, Tensor3, DEFAULT_INIT_STD};
use crate::error::{arg_err, shape_err, Error, Result};
use crate::scalar::Scalar;
use crate::transform::{dct_matrix, kept_count, truncate, TruncatedDct};

/// Which block sits between the input and the pooled classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyMode {
    /// No attention block; the classifier sees pooled raw tokens.
    Linear,
    Vanilla,
    Dct(InitTarget),
    Compressed(CompressedVariant),
    NoDct,
}

impl ToyMode {
    /// Modes with an attention block, as accepted by [`FromStr`].
    pub const NAMES: [&'static str; 14] = [
        "linear",
        "vanilla",
        "dct-q",
        "dct-k",
        "dct-v",
        "dct-qk",
        "dct-qkv",
        "frozen-dct-q",
        "frozen-dct-k",
        "frozen-dct-v",
        "frozen-dct-qkv",
        "naive",
        "simplified",
        "no-dct",
    ];
}

impl FromStr for ToyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "vanilla" => Ok(Self::Vanilla),
            "naive" => Ok(Self::Compressed(CompressedVariant::Naive)),
            "simplified" | "fused" => Ok(Self::Compressed(CompressedVariant::Simplified)),
            "no-dct" => Ok(Self::NoDct),
            other => {
                let (frozen, rest) = match other.strip_prefix("frozen-") {
                    Some(rest) => (true, rest),
                    None => (false, other),
                };
                match rest.strip_prefix("dct-") {
                    Some(targets) => Ok(Self::Dct(InitTarget::parse(targets, frozen)?)),
                    None => arg_err("mode", format!("unknown mode `{other}`")),
                }
            }
        }
    }
}

impl fmt::Display for ToyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear => f.write_str("linear"),
            Self::Vanilla => f.write_str("vanilla"),
            Self::Compressed(CompressedVariant::Naive) => f.write_str("naive"),
            Self::Compressed(CompressedVariant::Simplified) => f.write_str("simplified"),
            Self::NoDct => f.write_str("no-dct"),
            Self::Dct(t) => {
                if t.frozen {
                    f.write_str("frozen-")?;
                }
                f.write_str("dct-")?;
                for (on, ch) in [(t.q, 'q'), (t.k, 'k'), (t.v, 'v')] {
                    if on {
                        write!(f, "{ch}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

/// Shape and initialization of a [`ToyModel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyModelConfig {
    pub n: usize,
    pub m: usize,
    pub c: usize,
    pub p: usize,
    /// Truncation ratio of the compressed and no-DCT modes.
    pub tau: f64,
    /// Std of the truncated-normal draws for the block's projection
    /// matrices. The classifier always starts at std 0.02.
    pub init_std: f64,
    pub seed: u64,
}

impl Default for ToyModelConfig {
    fn default() -> Self {
        Self {
            n: 1,
            m: 2,
            c: 8,
            p: 2,
            tau: 0.5,
            init_std: 0.3,
            seed: 0,
        }
    }
}

impl ToyModelConfig {
    pub fn attention(&self) -> Result<AttentionConfig> {
        AttentionConfig::new(self.n, self.m, self.c, self.p)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Block<T> {
    None,
    Full(AttentionWeights<T>),
    Compressed {
        weights: CompressedWeights<T>,
        // None selects the no-DCT ablation.
        trunc: Option<TruncatedDct<T>>,
        variant: CompressedVariant,
    },
}

/// One attention block, mean pooling over all tokens, and a linear layer to
/// two logits.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyModel<T> {
    mode: ToyMode,
    config: ToyModelConfig,
    block: Block<T>,
    pub wc: Matrix<T>,
    pub bc: Vec<T>,
}

enum BlockCache<T> {
    None,
    Full(MsaCache<T>),
    Compressed(CompressedCache<T>),
}

/// Forward state of a batch, kept for the backward pass.
pub struct ToyCache<T> {
    block: BlockCache<T>,
    pooled: Matrix<T>,
    probs: Matrix<T>,
}

impl<T: Scalar> ToyCache<T> {
    pub fn batch(&self) -> usize {
        self.probs.rows()
    }

    /// Class probabilities, one row per sample.
    pub fn probs(&self) -> &Matrix<T> {
        &self.probs
    }

    /// Cross-entropy of each sample.
    pub fn losses(&self, labels: &[usize]) -> Result<Vec<T>> {
        self.check_labels(labels)?;
        Ok(labels.iter().enumerate().map(|(b, &l)| -self.probs[(b, l)].ln()).collect())
    }

    fn check_labels(&self, labels: &[usize]) -> Result<()> {
        if labels.len() != self.batch() {
            return arg_err("labels", format!("{} labels for {} samples", labels.len(), self.batch()));
        }
        if let Some(l) = labels.iter().find(|&&l| l > 1) {
            return arg_err("labels", format!("{l} is not a binary class"));
        }
        Ok(())
    }
}

impl<T: Scalar> ToyModel<T> {
    pub fn new(mode: ToyMode, config: ToyModelConfig) -> Result<Self> {
        let cfg = config.attention()?;
        let c = config.c;
        let mut rng = seeded_rng(config.seed);
        let wc = trunc_normal_with(2, c, DEFAULT_INIT_STD, &mut rng)?;
        let block_seed = config.seed.wrapping_add(1);
        let full = |cfg: &AttentionConfig| -> Result<AttentionWeights<T>> {
            let mut w = AttentionWeights::init(cfg, block_seed)?;
            let mut rng = seeded_rng(block_seed);
            for m in [&mut w.wq, &mut w.wk, &mut w.wv, &mut w.wo] {
                *m = trunc_normal_with(c, c, config.init_std, &mut rng)?;
            }
            Ok(w)
        };
        let compressed = |kept: usize| -> Result<CompressedWeights<T>> {
            let mut w = CompressedWeights::init(c, kept, config.p, config.m, block_seed)?;
            let mut rng = seeded_rng(block_seed);
            for m in [&mut w.wq, &mut w.wk, &mut w.wv] {
                *m = trunc_normal_with(kept, kept, config.init_std, &mut rng)?;
            }
            w.wo = trunc_normal_with(c, c, config.init_std, &mut rng)?;
            Ok(w)
        };
        let block = match mode {
            ToyMode::Linear => Block::None,
            ToyMode::Vanilla => Block::Full(full(&cfg)?),
            ToyMode::Dct(target) => Block::Full(dct_init(&full(&cfg)?, target, &dct_matrix(c)?)?),
            ToyMode::Compressed(variant) => {
                let trunc = truncate(&dct_matrix(c)?, config.tau)?;
                Block::Compressed {
                    weights: compressed(trunc.kept())?,
                    trunc: Some(trunc),
                    variant,
                }
            }
            ToyMode::NoDct => Block::Compressed {
                weights: compressed(kept_count(c, config.tau)?)?,
                trunc: None,
                variant: CompressedVariant::Naive,
            },
        };
        Ok(Self {
            mode,
            config,
            block,
            wc,
            bc: vec![T::zero(); 2],
        })
    }

    pub fn mode(&self) -> ToyMode {
        self.mode
    }

    pub fn config(&self) -> &ToyModelConfig {
        &self.config
    }

    /// Full-size attention weights, if the mode has them.
    pub fn attention_weights(&self) -> Option<&AttentionWeights<T>> {
        match &self.block {
            Block::Full(w) => Some(w),
            _ => None,
        }
    }

    pub fn compressed_weights(&self) -> Option<&CompressedWeights<T>> {
        match &self.block {
            Block::Compressed { weights, .. } => Some(weights),
            _ => None,
        }
    }

    /// One flag per entry of [`Parameters::flatten`]: true when training
    /// must leave the entry untouched.
    pub fn frozen_mask(&self) -> Vec<bool> {
        let frozen = match &self.block {
            Block::Full(w) => w.frozen,
            _ => Default::default(),
        };
        self.tensors()
            .iter()
            .flat_map(|(name, t)| std::iter::repeat_n(frozen.contains(name), t.len()))
            .collect()
    }

    /// Number of samples stacked window-wise in `x`.
    fn batch_of(&self, x: &Tensor3<T>) -> Result<usize> {
        let cfg = &self.config;
        if x.m2() != cfg.m * cfg.m || x.c() != cfg.c || x.n() == 0 || x.n() % cfg.n != 0 {
            return shape_err(
                "toy model input",
                format!(
                    "got {:?}, expected a multiple of {} windows of {} x {}",
                    x.shape(),
                    cfg.n,
                    cfg.m * cfg.m,
                    cfg.c
                ),
            );
        }
        Ok(x.n() / cfg.n)
    }

    /// Forward pass over a batch: `x` holds the windows of each sample one
    /// after the other (see [`ToyDataset::stacked`](super::ToyDataset::stacked)).
    pub fn forward(&self, x: &Tensor3<T>) -> Result<ToyCache<T>> {
        let batch = self.batch_of(x)?;
        let cfg = AttentionConfig::new(batch * self.config.n, self.config.m, self.config.c, self.config.p)?;
        let (y, block) = match &self.block {
            Block::None => (x.clone(), BlockCache::None),
            Block::Full(w) => {
                let (y, cache) = msa_forward(x, w, &cfg, None)?;
                (y, BlockCache::Full(cache))
            }
            Block::Compressed { weights, trunc, variant } => {
                let (y, cache) = match trunc {
                    Some(trunc) => compressed_forward(x, weights, &cfg, trunc, *variant, None)?,
                    None => truncate_no_dct_forward_cached(x, weights, &cfg, self.config.tau)?,
                };
                (y, BlockCache::Compressed(cache))
            }
        };
        let tokens = y.to_token_matrix();
        let per = tokens.rows() / batch;
        let inv = T::one() / T::of_usize(per);
        let mut pooled = Matrix::zeros(batch, self.config.c);
        for r in 0..tokens.rows() {
            for (p, &v) in pooled.row_mut(r / per).iter_mut().zip(tokens.row(r)) {
                *p += v * inv;
            }
        }
        let mut logits = pooled.matmul_t(&self.wc, None)?;
        logits.add_row_vector(&self.bc)?;
        Ok(ToyCache {
            block,
            pooled,
            probs: softmax_rows(&logits),
        })
    }

    /// Mean cross-entropy over the batch.
    pub fn loss(&self, x: &Tensor3<T>, labels: &[usize]) -> Result<T> {
        let losses = self.forward(x)?.losses(labels)?;
        let mean = losses.iter().copied().sum::<T>() / T::of_usize(losses.len());
        if !mean.is_finite() {
            return Err(Error::NonFinite("toy model loss"));
        }
        Ok(mean)
    }

    /// Gradient of `scale` times the summed cross-entropy, in
    /// [`Parameters::flatten`] order.
    pub fn backward(&self, cache: &ToyCache<T>, labels: &[usize], scale: T) -> Result<Vec<T>> {
        cache.check_labels(labels)?;
        let mut dlogits = cache.probs.clone();
        for (b, &l) in labels.iter().enumerate() {
            dlogits.row_mut(b)[l] -= T::one();
        }
        let dlogits = dlogits.scale(scale);
        let mut grad = Vec::with_capacity(self.num_params());
        grad.extend(dlogits.t_matmul(&cache.pooled)?.into_vec());
        grad.extend(dlogits.col_sums());
        let block_grad: Option<Gradients<T>> = match &cache.block {
            BlockCache::None => None,
            other => {
                let dpool = dlogits.matmul(&self.wc, None)?;
                let (n, m2, c) = (self.config.n, self.config.m * self.config.m, self.config.c);
                let inv = T::one() / T::of_usize(n * m2);
                let dy = Tensor3::from_fn(cache.batch() * n, m2, c, |w, _, ch| dpool[(w / n, ch)] * inv);
                match other {
                    BlockCache::Full(bc) => Some(msa_backward(bc, &dy)?),
                    BlockCache::Compressed(bc) => Some(compressed_backward(bc, &dy)?),
                    BlockCache::None => unreachable!(),
                }
            }
        };
        if let Some(g) = block_grad {
            grad.extend(g.flatten());
        }
        Ok(grad)
    }

    /// Predicted class of each sample in the batch.
    pub fn predict(&self, x: &Tensor3<T>) -> Result<Vec<usize>> {
        let probs = self.forward(x)?.probs;
        Ok((0..probs.rows()).map(|b| usize::from(probs[(b, 1)] > probs[(b, 0)])).collect())
    }
}

impl<T: Scalar> Parameters<T> for ToyModel<T> {
    fn tensors(&self) -> Vec<(&'static str, &[T])> {
        let mut v: Vec<(&'static str, &[T])> = vec![("wc", self.wc.as_slice()), ("bc", &self.bc)];
        match &self.block {
            Block::None => {}
            Block::Full(w) => v.extend(w.tensors()),
            Block::Compressed { weights, .. } => v.extend(weights.tensors()),
        }
        v
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [T])> {
        let mut v: Vec<(&'static str, &mut [T])> = vec![("wc", self.wc.as_mut_slice()), ("bc", &mut self.bc)];
        match &mut self.block {
            Block::None => {}
            Block::Full(w) => v.extend(w.tensors_mut()),
            Block::Compressed { weights, .. } => v.extend(weights.tensors_mut()),
        }
        v
    }
}

/// Worst `|a - n| / max(|a|, |n|, floor)` between the analytic gradient of
/// the mean cross-entropy of `x` and central differences at `step`, where
/// the floor is the larger of 1e-8 and the round-off resolution of the
/// difference quotient. Frozen entries, whose gradient is zero by
/// contract, are skipped.
pub fn grad_check<T: Scalar>(model: &ToyModel<T>, x: &Tensor3<T>, labels: &[usize], step: f64) -> Result<f64> {
    grad_check_with(model, x, labels, step, |_| {})
}

/// [`grad_check`] with a hook that may alter the analytic gradient before
/// comparison.
pub fn grad_check_with<T: Scalar>(
    model: &ToyModel<T>,
    x: &Tensor3<T>,
    labels: &[usize],
    step: f64,
    hook: impl FnOnce(&mut [T]),
) -> Result<f64> {
    if !(step > 0.0 && step.is_finite()) {
        return arg_err("step", format!("{step} must be positive"));
    }
    let base = model.flatten();
    if base.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("toy model parameters"));
    }
    let cache = model.forward(x)?;
    let losses = cache.losses(labels)?;
    let loss = (losses.iter().copied().sum::<T>() / T::of_usize(losses.len())).to_f64_lossy();
    if !loss.is_finite() {
        return Err(Error::NonFinite("toy model loss"));
    }
    let mut analytic = model.backward(&cache, labels, T::one() / T::of_usize(labels.len()))?;
    hook(&mut analytic);
    let floor = (1e6 * T::epsilon().to_f64_lossy() * loss.abs().max(1.0) / step).max(1e-8);
    let mut probe = model.clone();
    let mut v = base.clone();
    let frozen = model.frozen_mask();
    let mut worst: f64 = 0.0;
    let h = T::of(step);
    for i in (0..base.len()).filter(|&i| !frozen[i]) {
        v[i] = base[i] + h;
        probe.assign(&v);
        let up = probe.loss(x, labels)?.to_f64_lossy();
        v[i] = base[i] - h;
        probe.assign(&v);
        let down = probe.loss(x, labels)?.to_f64_lossy();
        v[i] = base[i];
        let num = (up - down) / (2.0 * step);
        let a = analytic[i].to_f64_lossy();
        let err = (a - num).abs() / a.abs().max(num.abs()).max(floor);
        worst = worst.max(err);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::normal_matrix;

    fn sample(cfg: &ToyModelConfig, seed: u64) -> Tensor3<f64> {
        let mut rng = seeded_rng(seed);
        let m2 = cfg.m * cfg.m;
        Tensor3::from_token_matrix(cfg.n, m2, normal_matrix(cfg.n * m2, cfg.c, 1.0, &mut rng)).unwrap()
    }

    #[test]
    fn mode_names_round_trip() {
        for name in ToyMode::NAMES {
            assert_eq!(name.parse::<ToyMode>().unwrap().to_string(), name);
        }
        assert!("dct-".parse::<ToyMode>().is_err());
        assert!("frozen-vanilla".parse::<ToyMode>().is_err());
    }

    #[test]
    fn linear_model_gradient_is_exact() {
        let cfg = ToyModelConfig {
            init_std: 0.5,
            ..Default::default()
        };
        let model = ToyModel::<f64>::new(ToyMode::Linear, cfg).unwrap();
        assert!(grad_check(&model, &sample(&cfg, 1), &[1], 1e-5).unwrap() < 1e-8);
    }

    #[test]
    fn frozen_mask_covers_targets() {
        let model = ToyModel::<f64>::new("frozen-dct-k".parse().unwrap(), Default::default()).unwrap();
        let mask = model.frozen_mask();
        let frozen = mask.iter().filter(|&&f| f).count();
        assert_eq!(frozen, 64);
        // classifier (16 + 2) then wq (64) precede wk
        assert!(mask[18 + 64..18 + 128].iter().all(|&f| f));
        assert!(model.attention_weights().unwrap().frozen.k);
    }

    #[test]
    fn parameter_counts_per_mode() {
        let cfg = ToyModelConfig::default();
        let count = |mode: &str| ToyModel::<f64>::new(mode.parse().unwrap(), cfg).unwrap().num_params();
        assert_eq!(count("linear"), 18);
        // 4 (64 + 8) + 2 * 9
        assert_eq!(count("vanilla"), 18 + 306);
        assert_eq!(count("dct-qkv"), 18 + 306);
        // 3 (16 + 4) + 64 + 8 + 2 * 9
        assert_eq!(count("simplified"), 18 + 150);
        assert_eq!(count("no-dct"), 18 + 150);
    }

    #[test]
    fn rejects_bad_labels() {
        let cfg = ToyModelConfig::default();
        let model = ToyModel::<f64>::new(ToyMode::Vanilla, cfg).unwrap();
        assert!(model.loss(&sample(&cfg, 0), &[2]).is_err());
        assert!(model.loss(&sample(&cfg, 0), &[0, 1]).is_err());
    }
}
