use crate::attention::AttentionWeights;
use crate::error::{arg_err, shape_err, Result};
use crate::scalar::Scalar;
use crate::transform::DctBasis;

/// Which of `W_Q`, `W_K`, `W_V` are initialized to the DCT matrix, and
/// whether they stay fixed during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InitTarget {
    pub q: bool,
    pub k: bool,
    pub v: bool,
    pub frozen: bool,
}

impl InitTarget {
    pub fn new(q: bool, k: bool, v: bool, frozen: bool) -> Result<Self> {
        if !(q || k || v) {
            return arg_err("targets", "at least one of Q, K, V must be selected");
        }
        Ok(Self { q, k, v, frozen })
    }

    pub fn query() -> Self {
        Self { q: true, k: false, v: false, frozen: false }
    }

    pub fn key() -> Self {
        Self { q: false, k: true, v: false, frozen: false }
    }

    pub fn value() -> Self {
        Self { q: false, k: false, v: true, frozen: false }
    }

    pub fn frozen(self) -> Self {
        Self { frozen: true, ..self }
    }

    /// Parses a subset of `q`, `k`, `v` such as `"k"` or `"qk"`.
    pub fn parse(targets: &str, frozen: bool) -> Result<Self> {
        let mut t = (false, false, false);
        for ch in targets.chars() {
            match ch.to_ascii_lowercase() {
                'q' => t.0 = true,
                'k' => t.1 = true,
                'v' => t.2 = true,
                other => return arg_err("targets", format!("unknown projection `{other}`")),
            }
        }
        Self::new(t.0, t.1, t.2, frozen)
    }

    pub fn count(&self) -> usize {
        [self.q, self.k, self.v].iter().filter(|&&b| b).count()
    }
}

/// Sets every targeted projection to the DCT matrix with a zero bias;
/// everything else is left as is. With `frozen`, the targeted matrices are
/// marked non-trainable.
pub fn dct_init<T: Scalar>(
    w: &AttentionWeights<T>,
    target: InitTarget,
    basis: &DctBasis<T>,
) -> Result<AttentionWeights<T>> {
    if basis.size() != w.channels() {
        return shape_err(
            "dct_init",
            format!("DCT of size {} for {} channels", basis.size(), w.channels()),
        );
    }
    let mut out = w.clone();
    let d = basis.matrix();
    let zero = vec![T::zero(); basis.size()];
    if target.q {
        out.wq = d.clone();
        out.bq.clone_from(&zero);
        out.frozen.q |= target.frozen;
    }
    if target.k {
        out.wk = d.clone();
        out.bk.clone_from(&zero);
        out.frozen.k |= target.frozen;
    }
    if target.v {
        out.wv = d.clone();
        out.bv.clone_from(&zero);
        out.frozen.v |= target.frozen;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attention::AttentionConfig;
    use crate::dense::{normal_matrix, seeded_rng};
    use crate::transform::dct_matrix;

    fn setup() -> (AttentionConfig, AttentionWeights<f64>, DctBasis<f64>) {
        let cfg = AttentionConfig::new(1, 2, 8, 2).unwrap();
        let w = AttentionWeights::randomized(&cfg, 0.1, 5).unwrap();
        (cfg, w, dct_matrix(8).unwrap())
    }

    #[test]
    fn key_projection_becomes_channel_dct() {
        let (_, w, d) = setup();
        let w = dct_init(&w, InitTarget::key(), &d).unwrap();
        let mut rng = seeded_rng(1);
        let x = normal_matrix::<f64>(4, 8, 1.0, &mut rng);
        let mut k = x.matmul_t(&w.wk, None).unwrap();
        k.add_row_vector(&w.bk).unwrap();
        assert!(k.max_abs_diff(&d.forward_rows(&x).unwrap()) < 1e-12);
        assert!(!w.frozen.k);
    }

    #[test]
    fn multiple_targets_share_the_matrix() {
        let (_, w0, d) = setup();
        let w = dct_init(&w0, InitTarget::parse("qk", false).unwrap(), &d).unwrap();
        assert_eq!(w.wq, *d.matrix());
        assert_eq!(w.wk, *d.matrix());
        assert_eq!(w.wv, w0.wv);
        assert_eq!(w.bv, w0.bv);
        assert_eq!(w.wo, w0.wo);
    }

    #[test]
    fn idempotent() {
        let (_, w, d) = setup();
        let t = InitTarget::value().frozen();
        let once = dct_init(&w, t, &d).unwrap();
        let twice = dct_init(&once, t, &d).unwrap();
        assert_eq!(once, twice);
        assert!(once.frozen.v);
    }

    #[test]
    fn rejects_empty_or_mismatched() {
        assert!(InitTarget::new(false, false, false, false).is_err());
        assert!(InitTarget::parse("x", false).is_err());
        let (_, w, _) = setup();
        assert!(dct_init(&w, InitTarget::key(), &dct_matrix(4).unwrap()).is_err());
    }
}
