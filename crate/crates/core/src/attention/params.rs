use crate::dense::{seeded_rng, trunc_normal_with, Matrix, Tensor3, DEFAULT_INIT_STD};
use crate::error::Result;
use crate::scalar::Scalar;

use super::config::AttentionConfig;

/// Uniform view over named parameter tensors, in a fixed order shared by
/// weights and their gradients.
pub trait Parameters<T> {
    fn tensors(&self) -> Vec<(&'static str, &[T])>;
    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [T])>;

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    fn flatten(&self) -> Vec<T>
    where
        T: Copy,
    {
        self.tensors().iter().flat_map(|(_, t)| t.iter().copied()).collect()
    }

    /// Overwrites all parameters from `flat`, which must hold exactly
    /// [`num_params`](Parameters::num_params) values.
    fn assign(&mut self, flat: &[T])
    where
        T: Copy,
    {
        let mut offset = 0;
        for (_, t) in self.tensors_mut() {
            let len = t.len();
            t.copy_from_slice(&flat[offset..offset + len]);
            offset += len;
        }
        assert_eq!(offset, flat.len(), "parameter count mismatch");
    }
}

/// Which projection matrices are excluded from training.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Frozen {
    pub q: bool,
    pub k: bool,
    pub v: bool,
    pub o: bool,
}

impl Frozen {
    pub fn contains(&self, name: &str) -> bool {
        match name {
            "wq" => self.q,
            "wk" => self.k,
            "wv" => self.v,
            "wo" => self.o,
            _ => false,
        }
    }
}

/// Parameters of one attention block. Projection matrices map `in -> out`
/// features and are applied to row tokens as `X W^T + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionWeights<T> {
    pub wq: Matrix<T>,
    pub wk: Matrix<T>,
    pub wv: Matrix<T>,
    pub wo: Matrix<T>,
    pub bq: Vec<T>,
    pub bk: Vec<T>,
    pub bv: Vec<T>,
    pub bo: Vec<T>,
    /// One `(2M-1) x (2M-1)` relative-bias table per head.
    pub bhat: Vec<Matrix<T>>,
    pub frozen: Frozen,
}

impl<T: Scalar> AttentionWeights<T> {
    /// Default initialization: projections from a truncated normal with
    /// std 0.02, biases and bias tables zero.
    pub fn init(cfg: &AttentionConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = seeded_rng(seed);
        let c = cfg.c;
        let side = cfg.bias_side();
        Ok(Self {
            wq: trunc_normal_with(c, c, DEFAULT_INIT_STD, &mut rng)?,
            wk: trunc_normal_with(c, c, DEFAULT_INIT_STD, &mut rng)?,
            wv: trunc_normal_with(c, c, DEFAULT_INIT_STD, &mut rng)?,
            wo: trunc_normal_with(c, c, DEFAULT_INIT_STD, &mut rng)?,
            bq: vec![T::zero(); c],
            bk: vec![T::zero(); c],
            bv: vec![T::zero(); c],
            bo: vec![T::zero(); c],
            bhat: vec![Matrix::zeros(side, side); cfg.p],
            frozen: Frozen::default(),
        })
    }

    /// Every parameter, biases and bias tables included, drawn from a
    /// truncated normal with the given std. Used for verification runs.
    pub fn randomized(cfg: &AttentionConfig, std: f64, seed: u64) -> Result<Self> {
        let mut w = Self::init(cfg, seed)?;
        let mut rng = seeded_rng(seed ^ 0x9e37_79b9_7f4a_7c15);
        for (_, t) in w.tensors_mut() {
            let fresh = trunc_normal_with::<T>(1, t.len(), std, &mut rng)?;
            t.copy_from_slice(fresh.as_slice());
        }
        Ok(w)
    }

    pub fn channels(&self) -> usize {
        self.wo.rows()
    }

    pub fn heads(&self) -> usize {
        self.bhat.len()
    }
}

impl<T: Scalar> Parameters<T> for AttentionWeights<T> {
    fn tensors(&self) -> Vec<(&'static str, &[T])> {
        let mut v: Vec<(&'static str, &[T])> = vec![
            ("wq", self.wq.as_slice()),
            ("wk", self.wk.as_slice()),
            ("wv", self.wv.as_slice()),
            ("wo", self.wo.as_slice()),
            ("bq", &self.bq),
            ("bk", &self.bk),
            ("bv", &self.bv),
            ("bo", &self.bo),
        ];
        v.extend(self.bhat.iter().map(|b| ("bhat", b.as_slice())));
        v
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [T])> {
        let mut v: Vec<(&'static str, &mut [T])> = vec![
            ("wq", self.wq.as_mut_slice()),
            ("wk", self.wk.as_mut_slice()),
            ("wv", self.wv.as_mut_slice()),
            ("wo", self.wo.as_mut_slice()),
            ("bq", &mut self.bq),
            ("bk", &mut self.bk),
            ("bv", &mut self.bv),
            ("bo", &mut self.bo),
        ];
        v.extend(self.bhat.iter_mut().map(|b| ("bhat", b.as_mut_slice())));
        v
    }
}

/// Gradients of an attention block, laid out like its weights, plus the
/// input gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub wq: Matrix<T>,
    pub wk: Matrix<T>,
    pub wv: Matrix<T>,
    pub wo: Matrix<T>,
    pub bq: Vec<T>,
    pub bk: Vec<T>,
    pub bv: Vec<T>,
    pub bo: Vec<T>,
    pub bhat: Vec<Matrix<T>>,
    pub dx: Tensor3<T>,
}

impl<T: Scalar> Gradients<T> {
    /// Zeroes the gradients of frozen projection matrices.
    pub fn mask(&mut self, frozen: Frozen) {
        for (name, g) in self.tensors_mut() {
            if frozen.contains(name) {
                g.iter_mut().for_each(|v| *v = T::zero());
            }
        }
    }

    /// Largest absolute entry over every parameter gradient and `dx`.
    pub fn max_abs(&self) -> T {
        self.tensors()
            .iter()
            .flat_map(|(_, t)| t.iter())
            .chain(self.dx.as_slice())
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

impl<T: Scalar> Parameters<T> for Gradients<T> {
    fn tensors(&self) -> Vec<(&'static str, &[T])> {
        let mut v: Vec<(&'static str, &[T])> = vec![
            ("wq", self.wq.as_slice()),
            ("wk", self.wk.as_slice()),
            ("wv", self.wv.as_slice()),
            ("wo", self.wo.as_slice()),
            ("bq", &self.bq),
            ("bk", &self.bk),
            ("bv", &self.bv),
            ("bo", &self.bo),
        ];
        v.extend(self.bhat.iter().map(|b| ("bhat", b.as_slice())));
        v
    }

    fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [T])> {
        let mut v: Vec<(&'static str, &mut [T])> = vec![
            ("wq", self.wq.as_mut_slice()),
            ("wk", self.wk.as_mut_slice()),
            ("wv", self.wv.as_mut_slice()),
            ("wo", self.wo.as_mut_slice()),
            ("bq", &mut self.bq),
            ("bk", &mut self.bk),
            ("bv", &mut self.bv),
            ("bo", &mut self.bo),
        ];
        v.extend(self.bhat.iter_mut().map(|b| ("bhat", b.as_mut_slice())));
        v
    }
}
