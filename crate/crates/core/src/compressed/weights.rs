use serde::{Deserialize, Serialize};

use crate::attention::Parameters;
use crate::dense::{seeded_rng, trunc_normal_with, Matrix, DEFAULT_INIT_STD};
use crate::error::{arg_err, Result};
use crate::scalar::Scalar;

/// Naive runs IDCT then `W_O`; simplified folds both into `W_O D̄⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompressedVariant {
    Naive,
    Simplified,
}

impl std::str::FromStr for CompressedVariant {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Self::Naive),
            "simplified" | "fused" => Ok(Self::Simplified),
            other => arg_err("variant", format!("unknown compressed variant `{other}`")),
        }
    }
}

/// Parameters of a compressed attention block. `Q`, `K`, `V` projections act
/// on the `kept` retained coefficients; `W_O` keeps its full `C x C` shape.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedWeights<T> {
    pub wq: Matrix<T>,
    pub wk: Matrix<T>,
    pub wv: Matrix<T>,
    pub wo: Matrix<T>,
    pub bq: Vec<T>,
    pub bk: Vec<T>,
    pub bv: Vec<T>,
    pub bo: Vec<T>,
    pub bhat: Vec<Matrix<T>>,
}

impl<T: Scalar> CompressedWeights<T> {
    /// Truncated-normal (std 0.02) projections, zero biases and tables.
    pub fn init(c: usize, kept: usize, heads: usize, m: usize, seed: u64) -> Result<Self> {
        if kept == 0 || kept > c {
            return arg_err("kept", format!("{kept} coefficients out of {c}"));
        }
        if heads == 0 || kept % heads != 0 {
            return arg_err("heads", format!("{kept} retained channels not divisible into {heads} heads"));
        }
        if m == 0 {
            return arg_err("m", "window side must be positive");
        }
        let mut rng = seeded_rng(seed);
        let side = 2 * m - 1;
        Ok(Self {
            wq: trunc_normal_with(kept, kept, DEFAULT_INIT_STD, &mut rng)?,
            wk: trunc_normal_with(kept, kept, DEFAULT_INIT_STD, &mut rng)?,
            wv: trunc_normal_with(kept, kept, DEFAULT_INIT_STD, &mut rng)?,
            wo: trunc_normal_with(c, c, DEFAULT_INIT_STD, &mut rng)?,
            bq: vec![T::zero(); kept],
            bk: vec![T::zero(); kept],
            bv: vec![T::zero(); kept],
            bo: vec![T::zero(); c],
            bhat: vec![Matrix::zeros(side, side); heads],
        })
    }

    /// Every parameter drawn from a truncated normal with the given std.
    pub fn randomized(c: usize, kept: usize, heads: usize, m: usize, std: f64, seed: u64) -> Result<Self> {
        let mut w = Self::init(c, kept, heads, m, seed)?;
        let mut rng = seeded_rng(seed ^ 0x2545_f491_4f6c_dd1d);
        for (_, t) in w.tensors_mut() {
            let fresh = trunc_normal_with::<T>(1, t.len(), std, &mut rng)?;
            t.copy_from_slice(fresh.as_slice());
        }
        Ok(w)
    }

    pub fn kept(&self) -> usize {
        self.wq.rows()
    }

    pub fn channels(&self) -> usize {
        self.wo.rows()
    }

    pub fn heads(&self) -> usize {
        self.bhat.len()
    }
}

impl<T: Scalar> Parameters<T> for CompressedWeights<T> {
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_validation() {
        let w = CompressedWeights::<f64>::init(8, 4, 2, 2, 0).unwrap();
        assert_eq!(w.wq.shape(), (4, 4));
        assert_eq!(w.wo.shape(), (8, 8));
        assert_eq!(w.bhat.len(), 2);
        assert_eq!(w.num_params(), 3 * (16 + 4) + 64 + 8 + 2 * 9);
        assert!(CompressedWeights::<f64>::init(8, 3, 2, 2, 0).is_err());
        assert!(CompressedWeights::<f64>::init(8, 0, 1, 2, 0).is_err());
        assert!(CompressedWeights::<f64>::init(8, 9, 1, 2, 0).is_err());
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("naive".parse::<CompressedVariant>().unwrap(), CompressedVariant::Naive);
        assert_eq!("simplified".parse::<CompressedVariant>().unwrap(), CompressedVariant::Simplified);
        assert!("other".parse::<CompressedVariant>().is_err());
    }
}
