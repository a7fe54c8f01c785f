use super::dct::dct_matrix;
use crate::dense::{unitary_dft, ComplexMatrix, Matrix};
use crate::error::{arg_err, Result};
use crate::scalar::Scalar;

/// Frequency coverage of the DCT basis under the unitary DFT.
#[derive(Debug, Clone)]
pub struct CoverageReport<T> {
    /// `coverage[k] = sqrt(sum_l |T_l[k]|^2)`.
    pub coverage: Vec<T>,
    /// Row `l` is the magnitude spectrum `|F T_l|` of basis vector `l`.
    pub spectra: Matrix<T>,
}

/// DFT magnitude spectra of every DCT basis vector and their per-bin
/// root-sum-square.
pub fn spectral_coverage<T: Scalar>(c: usize) -> Result<CoverageReport<T>> {
    let d = dct_matrix::<T>(c)?;
    let f = unitary_dft::<T>(c);
    // column l of F D^T is the spectrum of basis vector l
    let t_hat = f.matmul_real(&d.matrix().transpose())?;
    let mag = t_hat.magnitude();
    let coverage = (0..c)
        .map(|k| mag.row(k).iter().map(|&v| v * v).sum::<T>().sqrt())
        .collect();
    Ok(CoverageReport {
        coverage,
        spectra: mag.transpose(),
    })
}

/// Magnitude-weighted mean normalized frequency (cycles per sample, over
/// `[0, 1/2]`) of each basis vector, from a DFT zero-padded to
/// `oversample * c` points.
///
/// With `oversample = 1` odd-index basis vectors fall between DFT bins and
/// leak, so the centroids are not monotone; any `oversample >= 2` resolves
/// that.
pub fn spectral_centroids<T: Scalar>(c: usize, oversample: usize) -> Result<Vec<T>> {
    if oversample == 0 {
        return arg_err("oversample", "must be at least 1");
    }
    let d = dct_matrix::<T>(c)?;
    let len = c * oversample;
    let step = T::TAU() / T::of_usize(len);
    let re = Matrix::from_fn(len, c, |k, n| (step * T::of_usize((k * n) % len)).cos());
    let im = Matrix::from_fn(len, c, |k, n| -(step * T::of_usize((k * n) % len)).sin());
    let padded = ComplexMatrix::new(re, im)?;
    let mag = padded.matmul_real(&d.matrix().transpose())?.magnitude();
    let half = len / 2;
    Ok((0..c)
        .map(|l| {
            let mut num = T::zero();
            let mut den = T::zero();
            for k in 0..=half {
                let freq = T::of_usize(k) / T::of_usize(len);
                num += freq * mag[(k, l)];
                den += mag[(k, l)];
            }
            num / den
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_coverage_for_all_sizes() {
        for c in 1..=64 {
            let r = spectral_coverage::<f64>(c).unwrap();
            for (k, v) in r.coverage.iter().enumerate() {
                assert!((v - 1.0).abs() < 1e-10, "C={c} k={k}: {v}");
            }
        }
    }

    #[test]
    fn size_one() {
        let r = spectral_coverage::<f64>(1).unwrap();
        assert_eq!(r.coverage.len(), 1);
        assert!((r.coverage[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dc_basis_is_pure_dc() {
        let r = spectral_coverage::<f64>(8).unwrap();
        assert!((r.spectra[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(r.spectra.row(0)[1..].iter().all(|&v| v < 1e-12));
        // even-index basis vectors land on bins l/2 and C - l/2
        assert!((r.spectra[(4, 2)] - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn centroids_at_native_resolution_are_not_monotone() {
        // numpy oracle: [0, 0.2445, 0.125, 0.2803, 0.25, 0.3576, 0.375, 0.4559]
        let c = spectral_centroids::<f64>(8, 1).unwrap();
        let expected = [0.0, 0.2445, 0.125, 0.2803, 0.25, 0.3576, 0.375, 0.4559];
        for (a, b) in c.iter().zip(expected) {
            assert!((a - b).abs() < 1e-4, "{a} vs {b}");
        }
        assert!(c[2] < c[1]);
    }

    #[test]
    fn oversampled_centroids_strictly_increase() {
        for os in [2, 4, 16] {
            let c = spectral_centroids::<f64>(8, os).unwrap();
            assert!(c.windows(2).all(|w| w[1] > w[0]), "oversample {os}: {c:?}");
        }
        // numpy oracle at 4x: 0.1098 0.1748 0.1959 0.2451 0.2804 0.335 0.3744 0.4378
        let c = spectral_centroids::<f64>(8, 4).unwrap();
        assert!((c[0] - 0.1098).abs() < 1e-4 && (c[7] - 0.4378).abs() < 1e-4);
    }
}
