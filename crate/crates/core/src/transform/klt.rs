use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::dct::{dct_matrix, kept_count};
use crate::dense::{dot, jacobi_eigh, Matrix, Rng};
use crate::error::{arg_err, Result};
use crate::scalar::Scalar;

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rho) {
        return arg_err("rho", format!("correlation must lie in [0, 1), got {rho}"));
    }
    Ok(())
}

/// AR(1) covariance: `phi[i, j] = rho^|i - j|`.
pub fn toeplitz_cov<T: Scalar>(c: usize, rho: f64) -> Result<Matrix<T>> {
    if c == 0 {
        return arg_err("c", "size must be at least 1");
    }
    check_rho(rho)?;
    let rho = T::of(rho);
    Ok(Matrix::from_fn(c, c, |i, j| rho.powi(i.abs_diff(j) as i32)))
}

/// Fraction of the squared entries of `basis * cov * basis^T` that sit off
/// the diagonal. Zero for a basis that diagonalizes `cov`.
pub fn off_diagonal_ratio<T: Scalar>(basis: &Matrix<T>, cov: &Matrix<T>) -> Result<T> {
    let lambda = basis.matmul(cov, None)?.matmul_t(basis, None)?;
    Ok(off_diagonal_ratio_of(&lambda))
}

fn off_diagonal_ratio_of<T: Scalar>(lambda: &Matrix<T>) -> T {
    let total = lambda.frobenius_sq();
    if total == T::zero() {
        return T::zero();
    }
    let diag: T = (0..lambda.rows()).map(|i| lambda[(i, i)] * lambda[(i, i)]).sum();
    (total - diag).max(T::zero()) / total
}

/// How well the DCT approximates the KLT of an AR(1) process.
#[derive(Debug, Clone, Serialize)]
pub struct CompactionReport<T> {
    pub size: usize,
    pub rho: f64,
    /// `diag(D phi D^T)`: variance of each DCT coefficient.
    pub variances: Vec<T>,
    /// Cumulative share of the total coefficient variance.
    pub cumulative_energy: Vec<T>,
    /// Off-diagonal energy share of `D phi D^T`.
    pub off_diagonal_ratio: T,
    /// Same ratio for the KLT basis itself (zero up to round-off).
    pub klt_off_diagonal_ratio: T,
    /// Eigenvalues of `phi`, descending.
    pub klt_eigenvalues: Vec<T>,
    /// `|cos|` between DCT row `k` and the `k`-th KLT eigenvector.
    pub cosines: Vec<T>,
    pub mean_cosine: T,
}

/// Compares the DCT against the exact KLT (eigenvectors of `phi`).
pub fn klt_compare<T: Scalar>(c: usize, rho: f64) -> Result<CompactionReport<T>> {
    let phi = toeplitz_cov::<T>(c, rho)?;
    let d = dct_matrix::<T>(c)?;
    let lambda = d.matrix().matmul(&phi, None)?.matmul_t(d.matrix(), None)?;
    let variances: Vec<T> = (0..c).map(|k| lambda[(k, k)]).collect();
    let total: T = variances.iter().copied().sum();
    let mut running = T::zero();
    let cumulative_energy = variances
        .iter()
        .map(|&v| {
            running += v;
            running / total
        })
        .collect();

    let eig = jacobi_eigh(&phi)?;
    let mut klt = eig.vectors.transpose();
    let mut cosines = Vec::with_capacity(c);
    for k in 0..c {
        let mut ip = dot(d.matrix().row(k), klt.row(k));
        if ip < T::zero() {
            klt.row_mut(k).iter_mut().for_each(|v| *v = -*v);
            ip = -ip;
        }
        cosines.push(ip);
    }
    let mean_cosine = cosines.iter().copied().sum::<T>() / T::of_usize(c);
    Ok(CompactionReport {
        size: c,
        rho,
        variances,
        cumulative_energy,
        off_diagonal_ratio: off_diagonal_ratio_of(&lambda),
        klt_off_diagonal_ratio: off_diagonal_ratio(&klt, &phi)?,
        klt_eigenvalues: eig.values,
        cosines,
        mean_cosine,
    })
}

/// Share of AR(1) variance captured by the first `round(tau * c)` DCT
/// coefficients.
pub fn energy_compaction<T: Scalar>(c: usize, rho: f64, tau: f64) -> Result<T> {
    let kept = kept_count(c, tau)?;
    let phi = toeplitz_cov::<T>(c, rho)?;
    let d = dct_matrix::<T>(c)?;
    let m = d.matrix();
    // diag(D phi D^T)[k] = d_k^T phi d_k
    let pd = m.matmul(&phi, None)?;
    let variances: Vec<T> = (0..c).map(|k| dot(pd.row(k), m.row(k))).collect();
    let total: T = variances.iter().copied().sum();
    let head: T = variances[..kept].iter().copied().sum();
    Ok(if kept == c { T::one() } else { head / total })
}

/// One stationary unit-variance AR(1) sequence of length `c`.
pub fn ar1_sample<T: Scalar>(c: usize, rho: f64, rng: &mut Rng) -> Vec<T> {
    let innovation = (1.0 - rho * rho).sqrt();
    let mut out = Vec::with_capacity(c);
    let mut prev: f64 = StandardNormal.sample(rng);
    out.push(T::of(prev));
    for _ in 1..c {
        let z: f64 = StandardNormal.sample(rng);
        prev = rho * prev + innovation * z;
        out.push(T::of(prev));
    }
    out
}
