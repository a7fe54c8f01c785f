//! DCT-based attention: orthonormal DCT-II bases, windowed multi-head
//! self-attention with relative position bias, DCT initialization and
//! DCT-compressed attention, multiplication/parameter accounting, and a
//! small deterministic training harness.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`, which is what the
//! verification tolerances are written for.

pub mod attention;
pub mod compressed;
pub mod cost;
pub mod dense;
pub mod error;
pub mod scalar;
pub mod train;
pub mod transform;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix64 = dense::Matrix<f64>;
pub type Matrix32 = dense::Matrix<f32>;
pub type Tensor64 = dense::Tensor3<f64>;
pub type Tensor32 = dense::Tensor3<f32>;
