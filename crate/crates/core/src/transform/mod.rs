//! Orthonormal DCT-II bases, truncated transforms, spectral coverage and
//! the AR(1)/Toeplitz decorrelation study.

mod coverage;
mod dct;
mod klt;

pub use coverage::{spectral_centroids, spectral_coverage, CoverageReport};
pub use dct::{dct_matrix, kept_count, sign_changes, truncate, DctBasis, TruncatedDct};
pub use klt::{
    ar1_sample, energy_compaction, klt_compare, off_diagonal_ratio, toeplitz_cov, CompactionReport,
};
