use crate::dense::Matrix;
use crate::error::{arg_err, Result};
use crate::scalar::Scalar;

/// Orthonormal DCT-II matrix of size `C`.
///
/// Row `k` is the `k`-th cosine basis vector sampled at `n = 0..C-1`:
/// `D[k, n] = sqrt(2/C) * g_k * cos((2n + 1) k pi / (2C))` with
/// `g_0 = 1/sqrt(2)` and `g_k = 1` otherwise, so `D * D^T = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct DctBasis<T> {
    size: usize,
    d: Matrix<T>,
}

impl<T: Scalar> DctBasis<T> {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.d
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.d
    }

    /// Forward transform of each row of `x` (`rows x C`): `x * D^T`.
    pub fn forward_rows(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        x.matmul_t(&self.d, None)
    }

    /// Inverse transform of each row: `y * D`.
    pub fn inverse_rows(&self, y: &Matrix<T>) -> Result<Matrix<T>> {
        y.matmul(&self.d, None)
    }
}

/// Builds the orthonormal type-II DCT matrix for `c` channels.
pub fn dct_matrix<T: Scalar>(c: usize) -> Result<DctBasis<T>> {
    if c == 0 {
        return arg_err("c", "DCT size must be at least 1");
    }
    let cf = T::of_usize(c);
    let scale = (T::of(2.0) / cf).sqrt();
    let dc = T::FRAC_1_SQRT_2();
    let d = Matrix::from_fn(c, c, |k, n| {
        let gamma = if k == 0 { dc } else { T::one() };
        // (2n+1)k taken modulo 4C keeps the cosine argument in [0, 2 pi)
        let phase = ((2 * n + 1) * k) % (4 * c);
        let arg = T::of_usize(phase) * T::PI() / (T::of(2.0) * cf);
        scale * gamma * arg.cos()
    });
    Ok(DctBasis { size: c, d })
}

/// Number of retained coefficients: `round(tau * c)`.
pub fn kept_count(c: usize, tau: f64) -> Result<usize> {
    if !(tau > 0.0 && tau <= 1.0) {
        return arg_err("tau", format!("truncation ratio must lie in (0, 1], got {tau}"));
    }
    let kept = (tau * c as f64).round() as usize;
    if kept == 0 {
        return arg_err("tau", format!("round({tau} * {c}) keeps no coefficients"));
    }
    Ok(kept.min(c))
}

/// DCT and IDCT truncated to the `kept` lowest frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedDct<T> {
    tau: f64,
    kept: usize,
    dbar: Matrix<T>,
    dbar_inv: Matrix<T>,
}

impl<T: Scalar> TruncatedDct<T> {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn kept(&self) -> usize {
        self.kept
    }

    pub fn size(&self) -> usize {
        self.dbar.cols()
    }

    /// `kept x C`: the first `kept` rows of `D`.
    pub fn dbar(&self) -> &Matrix<T> {
        &self.dbar
    }

    /// `C x kept`: zero-padding followed by the inverse transform.
    pub fn dbar_inv(&self) -> &Matrix<T> {
        &self.dbar_inv
    }
}

/// Keeps the first `round(tau * C)` rows of the basis.
pub fn truncate<T: Scalar>(basis: &DctBasis<T>, tau: f64) -> Result<TruncatedDct<T>> {
    let kept = kept_count(basis.size(), tau)?;
    let dbar = basis.matrix().block(0, 0, kept, basis.size());
    let dbar_inv = dbar.transpose();
    Ok(TruncatedDct {
        tau,
        kept,
        dbar,
        dbar_inv,
    })
}

/// Number of sign flips between consecutive entries, ignoring entries whose
/// magnitude is below `1e-12`.
pub fn sign_changes<T: Scalar>(v: &[T]) -> usize {
    let eps = T::of(1e-12);
    let signs: Vec<bool> = v
        .iter()
        .filter(|x| x.abs() > eps)
        .map(|x| x.is_sign_positive())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}
