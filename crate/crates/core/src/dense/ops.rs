use super::matrix::Matrix;
use crate::scalar::Scalar;

/// Row-wise softmax, stabilized by subtracting each row's maximum.
pub fn softmax_rows<T: Scalar>(m: &Matrix<T>) -> Matrix<T> {
    let mut out = m.clone();
    for r in 0..out.rows() {
        softmax_in_place(out.row_mut(r));
    }
    out
}

pub(crate) fn softmax_in_place<T: Scalar>(row: &mut [T]) {
    let max = row.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    let mut sum = T::zero();
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_row() {
        let s = softmax_rows(&Matrix::<f64>::zeros(1, 3));
        for &v in s.as_slice() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn log_two_row() {
        let m = Matrix::from_rows(&[&[0.0, 2f64.ln()]]).unwrap();
        let s = softmax_rows::<f64>(&m);
        assert!((s[(0, 0)] - 1.0 / 3.0).abs() < 1e-15);
        assert!((s[(0, 1)] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn huge_magnitudes_stay_finite() {
        let m = Matrix::from_rows(&[&[1e300, 1e300 - 1e285, -1e300]]).unwrap();
        let s = softmax_rows::<f64>(&m);
        assert!(s.is_finite());
        assert!((s.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn rows_sum_to_one_and_shift_invariant(
            row in prop::collection::vec(-50.0f64..50.0, 1..12),
            shift in -100.0f64..100.0,
        ) {
            let m = Matrix::from_vec(1, row.len(), row.clone()).unwrap();
            let s = softmax_rows(&m);
            let total: f64 = s.as_slice().iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            prop_assert!(s.as_slice().iter().all(|&v| v >= 0.0));
            let shifted = softmax_rows(&m.map(|v| v + shift));
            prop_assert!(s.max_abs_diff(&shifted) <= 1e-12);
        }
    }
}
