//! Dense linear algebra kernels: matrices, windowed tensors, softmax, the
//! unitary DFT, a Jacobi eigensolver, seeded initialization and the
//! multiplication counter used to audit cost formulas.

mod complex;
mod counter;
mod eigh;
mod init;
mod matrix;
mod ops;
mod tensor;

pub use complex::{unitary_dft, ComplexMatrix};
pub use counter::MulCounter;
pub use eigh::{jacobi_eigh, SymmetricEigen, JACOBI_MAX_SWEEPS};
pub use init::{
    normal_matrix, seeded_rng, trunc_normal_init, trunc_normal_sample, trunc_normal_with, Rng,
    DEFAULT_INIT_STD,
};
pub use matrix::{matmul, Matrix};
pub(crate) use matrix::dot;
pub use ops::softmax_rows;
pub(crate) use ops::softmax_in_place;
pub use tensor::Tensor3;
