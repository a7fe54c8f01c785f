//! DCT-based initialization and DCT-compressed attention.

mod forward;
mod init;
mod weights;

pub use forward::{
    compressed_backward, compressed_forward, conjugate_tau1, fuse_output, truncate_no_dct_forward,
    truncate_no_dct_forward_cached, CompressedCache,
};
pub use init::{dct_init, InitTarget};
pub use weights::{CompressedVariant, CompressedWeights};
