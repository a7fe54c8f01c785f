use super::matrix::Matrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    /// Eigenvalues in descending order.
    pub values: Vec<T>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: Matrix<T>,
    pub sweeps: usize,
}

impl<T: Scalar> SymmetricEigen<T> {
    /// `V diag(values) V^T`.
    pub fn reconstruct(&self) -> Matrix<T> {
        let scaled = Matrix::from_fn(self.vectors.rows(), self.vectors.cols(), |r, c| {
            self.vectors[(r, c)] * self.values[c]
        });
        scaled
            .matmul_t(&self.vectors, None)
            .expect("square factors")
    }
}

/// Cyclic Jacobi eigensolver.
///
/// Sweeps until the off-diagonal Frobenius norm drops below `1e-12` relative
/// to the input norm, or after [`JACOBI_MAX_SWEEPS`] sweeps.
pub fn jacobi_eigh<T: Scalar>(s: &Matrix<T>) -> Result<SymmetricEigen<T>> {
    let n = s.rows();
    let asym = s.asymmetry();
    let scale = s.max_abs().max(T::one());
    if asym > T::tiny_tol() * scale {
        return Err(Error::NotSymmetric(asym.to_f64_lossy()));
    }

    let mut a = s.clone();
    let mut v = Matrix::identity(n);
    let norm = s.frobenius_sq().sqrt().max(T::min_positive_value());
    let tol = T::tiny_tol() * norm;
    let half = T::of(0.5);
    let mut sweeps = 0;

    while sweeps < JACOBI_MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= tol {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // an element already negligible against both diagonals is dropped
                let g = T::of(100.0) * apq.abs();
                if sweeps > 4 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[(p, q)] = T::zero();
                    a[(q, p)] = T::zero();
                    continue;
                }
                let theta = half * (aqq - app) / apq;
                let t = if theta.abs() > T::of(1e150).min(T::max_value().sqrt()) {
                    T::one() / (T::of(2.0) * theta)
                } else {
                    let t = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    if theta < T::zero() {
                        -t
                    } else {
                        t
                    }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let sn = t * c;
                let tau = sn / (T::one() + c);
                let h = t * apq;
                a[(p, p)] = app - h;
                a[(q, q)] = aqq + h;
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let g = a[(r, p)];
                    let hh = a[(r, q)];
                    let np = g - sn * (hh + g * tau);
                    let nq = hh + sn * (g - hh * tau);
                    a[(r, p)] = np;
                    a[(p, r)] = np;
                    a[(r, q)] = nq;
                    a[(q, r)] = nq;
                }
                for r in 0..n {
                    let g = v[(r, p)];
                    let hh = v[(r, q)];
                    v[(r, p)] = g - sn * (hh + g * tau);
                    v[(r, q)] = hh + sn * (g - hh * tau);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(j, j)]
            .partial_cmp(&a[(i, i)])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

fn off_diagonal_norm<T: Scalar>(a: &Matrix<T>) -> T {
    let mut acc = T::zero();
    for p in 0..a.rows() {
        for q in p + 1..a.cols() {
            acc += a[(p, q)] * a[(p, q)];
        }
    }
    (acc + acc).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::init::{normal_matrix, seeded_rng};

    #[test]
    fn already_diagonal() {
        let d = Matrix::<f64>::diag(&[3.0, 1.0, 2.0]);
        let e = jacobi_eigh(&d).unwrap();
        assert_eq!(e.values, vec![3.0, 2.0, 1.0]);
        let expected = Matrix::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0]]).unwrap();
        assert_eq!(e.vectors.map(f64::abs), expected);
    }

    #[test]
    fn two_by_two_by_hand() {
        let s = Matrix::<f64>::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let e = jacobi_eigh(&s).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = e.vectors.column(0);
        let v1 = e.vectors.column(1);
        let sign0 = v0[0].signum();
        let sign1 = v1[0].signum();
        assert!((v0[0] * sign0 - r).abs() < 1e-14 && (v0[1] * sign0 - r).abs() < 1e-14);
        assert!((v1[0] * sign1 - r).abs() < 1e-14 && (v1[1] * sign1 + r).abs() < 1e-14);
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        for seed in 0..5 {
            let mut rng = seeded_rng(seed);
            let g = normal_matrix::<f64>(6, 6, 1.0, &mut rng);
            let s = g.add(&g.transpose()).unwrap();
            let e = jacobi_eigh(&s).unwrap();
            assert!(e.reconstruct().max_abs_diff(&s) < 1e-10);
            let vtv = e.vectors.t_matmul(&e.vectors).unwrap();
            assert!(vtv.max_abs_diff(&Matrix::identity(6)) < 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let s = Matrix::<f64>::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(jacobi_eigh(&s), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn single_precision_converges() {
        let mut rng = seeded_rng(3);
        let g = normal_matrix::<f32>(8, 8, 1.0, &mut rng);
        let s = g.add(&g.transpose()).unwrap();
        let e = jacobi_eigh(&s).unwrap();
        assert!(e.sweeps < JACOBI_MAX_SWEEPS);
        assert!(e.reconstruct().max_abs_diff(&s) < 1e-4);
    }
}
