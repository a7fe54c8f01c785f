use super::matrix::Matrix;
use crate::error::{shape_err, Result};
use crate::scalar::Scalar;

/// Complex matrix stored as separate real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    re: Matrix<T>,
    im: Matrix<T>,
}

impl<T: Scalar> ComplexMatrix<T> {
    pub fn new(re: Matrix<T>, im: Matrix<T>) -> Result<Self> {
        if re.shape() != im.shape() {
            return shape_err(
                "ComplexMatrix::new",
                format!("real {:?} vs imaginary {:?}", re.shape(), im.shape()),
            );
        }
        Ok(Self { re, im })
    }

    pub fn re(&self) -> &Matrix<T> {
        &self.re
    }

    pub fn im(&self) -> &Matrix<T> {
        &self.im
    }

    pub fn shape(&self) -> (usize, usize) {
        self.re.shape()
    }

    /// Complex product with a real right-hand side.
    pub fn matmul_real(&self, b: &Matrix<T>) -> Result<Self> {
        Ok(Self {
            re: self.re.matmul(b, None)?,
            im: self.im.matmul(b, None)?,
        })
    }

    /// `self * other^H`.
    pub fn matmul_conj_t(&self, other: &Self) -> Result<Self> {
        // (a + ib)(c - id)^T = (ac^T + bd^T) + i(bc^T - ad^T)
        let ac = self.re.matmul_t(&other.re, None)?;
        let bd = self.im.matmul_t(&other.im, None)?;
        let bc = self.im.matmul_t(&other.re, None)?;
        let ad = self.re.matmul_t(&other.im, None)?;
        Ok(Self {
            re: ac.add(&bd)?,
            im: bc.sub(&ad)?,
        })
    }

    /// Entry-wise modulus.
    pub fn magnitude(&self) -> Matrix<T> {
        Matrix::from_fn(self.re.rows(), self.re.cols(), |r, c| {
            self.re[(r, c)].hypot(self.im[(r, c)])
        })
    }
}

/// Unitary DFT matrix `F[k, n] = exp(-2 pi i k n / c) / sqrt(c)`.
pub fn unitary_dft<T: Scalar>(c: usize) -> ComplexMatrix<T> {
    let scale = T::one() / T::of_usize(c.max(1)).sqrt();
    let step = T::TAU() / T::of_usize(c.max(1));
    // reduce k*n mod c first so the angle stays small and exact in integers
    let angle = |k: usize, n: usize| step * T::of_usize((k * n) % c.max(1));
    let re = Matrix::from_fn(c, c, |k, n| angle(k, n).cos() * scale);
    let im = Matrix::from_fn(c, c, |k, n| -angle(k, n).sin() * scale);
    ComplexMatrix { re, im }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_size() {
        let f = unitary_dft::<f64>(1);
        assert_eq!(f.re().as_slice(), &[1.0]);
        assert_eq!(f.im().as_slice(), &[0.0]);
    }

    #[test]
    fn unitary_at_eight() {
        let f = unitary_dft::<f64>(8);
        let p = f.matmul_conj_t(&f).unwrap();
        assert!(p.re().max_abs_diff(&Matrix::identity(8)) < 1e-12);
        assert!(p.im().max_abs() < 1e-12);
    }

    #[test]
    fn constant_signal_lands_in_dc() {
        let c = 8;
        let f = unitary_dft::<f64>(c);
        let ones = Matrix::from_fn(c, 1, |_, _| 1.0 / (c as f64).sqrt());
        let spec = f.matmul_real(&ones).unwrap().magnitude();
        assert!((spec[(0, 0)] - 1.0).abs() < 1e-12);
        for k in 1..c {
            assert!(spec[(k, 0)] < 1e-12, "bin {k}: {}", spec[(k, 0)]);
        }
    }
}
