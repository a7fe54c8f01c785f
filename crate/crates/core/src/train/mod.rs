//! Toy-scale training harness: AR(1) two-class data, a one-block attention
//! classifier, gradient checking and deterministic SGD.

mod data;
mod model;
mod optim;

pub use data::{band_energies, gen_synthetic, ToyDataset, ToyDatasetSpec, MAX_OVERSAMPLING};
pub use model::{grad_check, grad_check_with, ToyCache, ToyMode, ToyModel, ToyModelConfig};
pub use optim::{accuracy, batch_loss, train, Sgd, TrainHistory, DIVERGENCE_LOSS};
