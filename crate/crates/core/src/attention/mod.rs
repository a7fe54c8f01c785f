//! Vanilla windowed multi-head self-attention with relative position bias.

mod bias;
mod config;
pub(crate) mod core;
mod msa;
mod params;
mod partition;

pub use bias::{relative_bias, relative_index};
pub use config::AttentionConfig;
pub use msa::{msa_backward, msa_forward, MsaCache};
pub(crate) use msa::check_input;
pub use params::{AttentionWeights, Frozen, Gradients, Parameters};
pub use partition::{partition, reverse};
