use crate::dense::Matrix;
use crate::error::{shape_err, Result};
use crate::scalar::Scalar;

/// For each token pair `(i, j)` of an `m x m` window, the flat index into the
/// `(2m-1) x (2m-1)` table: `(dy + m - 1) * (2m - 1) + (dx + m - 1)` with
/// `dy = y_i - y_j`, `dx = x_i - x_j`.
pub fn relative_index(m: usize) -> Vec<usize> {
    let m2 = m * m;
    let side = 2 * m - 1;
    let mut idx = Vec::with_capacity(m2 * m2);
    for i in 0..m2 {
        let (yi, xi) = (i / m, i % m);
        for j in 0..m2 {
            let (yj, xj) = (j / m, j % m);
            let dy = yi + m - 1 - yj;
            let dx = xi + m - 1 - xj;
            idx.push(dy * side + dx);
        }
    }
    idx
}

/// Expands a relative-bias table into the `M^2 x M^2` bias matrix.
pub fn relative_bias<T: Scalar>(bhat: &Matrix<T>, m: usize) -> Result<Matrix<T>> {
    let side = 2 * m - 1;
    if m == 0 || bhat.shape() != (side, side) {
        return shape_err(
            "relative_bias",
            format!("table {:?} for window side {m}", bhat.shape()),
        );
    }
    let m2 = m * m;
    let idx = relative_index(m);
    let table = bhat.as_slice();
    Ok(Matrix::from_fn(m2, m2, |i, j| table[idx[i * m2 + j]]))
}

/// Adjoint of [`relative_bias`]: accumulates a bias-matrix gradient into a
/// table gradient.
pub(crate) fn scatter_bias_grad<T: Scalar>(grad: &Matrix<T>, idx: &[usize], table: &mut Matrix<T>) {
    let out = table.as_mut_slice();
    for (&k, &g) in idx.iter().zip(grad.as_slice()) {
        out[k] += g;
    }
}
