use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::matrix::Matrix;
use crate::error::{arg_err, Result};
use crate::scalar::Scalar;

/// Standard deviation of the default weight initializer.
pub const DEFAULT_INIT_STD: f64 = 0.02;

/// Seeded generator used everywhere randomness is needed.
pub type Rng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One standard-normal draw rejected outside `[-2, 2]`.
pub fn trunc_normal_sample(rng: &mut Rng) -> f64 {
    loop {
        let z: f64 = StandardNormal.sample(rng);
        if z.abs() <= 2.0 {
            return z;
        }
    }
}

/// Truncated-normal matrix with entries in `[-2 std, 2 std]`, drawn from a
/// generator seeded with `seed`.
pub fn trunc_normal_init<T: Scalar>(rows: usize, cols: usize, std: f64, seed: u64) -> Result<Matrix<T>> {
    let mut rng = seeded_rng(seed);
    trunc_normal_with(rows, cols, std, &mut rng)
}

/// As [`trunc_normal_init`], drawing from an existing generator.
pub fn trunc_normal_with<T: Scalar>(rows: usize, cols: usize, std: f64, rng: &mut Rng) -> Result<Matrix<T>> {
    if !(std > 0.0 && std.is_finite()) {
        return arg_err("std", format!("must be positive and finite, got {std}"));
    }
    let data = (0..rows * cols)
        .map(|_| T::of(trunc_normal_sample(rng) * std))
        .collect();
    Matrix::from_vec(rows, cols, data)
}

/// Untruncated standard-normal matrix scaled by `std`.
pub fn normal_matrix<T: Scalar>(rows: usize, cols: usize, std: f64, rng: &mut Rng) -> Matrix<T> {
    Matrix::from_fn(rows, cols, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        T::of(z * std)
    })
}
