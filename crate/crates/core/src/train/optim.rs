use serde::{Deserialize, Serialize};

use crate::attention::Parameters;
use crate::dense::Tensor3;
use crate::error::{arg_err, Error, Result};
use crate::scalar::Scalar;

use super::data::ToyDataset;
use super::model::ToyModel;

/// Loss above which a run is declared diverged.
pub const DIVERGENCE_LOSS: f64 = 1e6;

/// Full-batch SGD with heavy-ball momentum: `v = mu v + g; p -= lr v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sgd {
    pub lr: f64,
    pub momentum: f64,
}

impl Default for Sgd {
    fn default() -> Self {
        Self { lr: 0.05, momentum: 0.9 }
    }
}

impl Sgd {
    fn validate(&self) -> Result<()> {
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return arg_err("lr", format!("{} must be a non-negative number", self.lr));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return arg_err("momentum", format!("{} is outside [0, 1)", self.momentum));
        }
        Ok(())
    }
}

/// Loss before every update, and the state after the last one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainHistory {
    pub mode: String,
    pub seed: u64,
    pub optimizer: Sgd,
    pub losses: Vec<f64>,
    pub final_loss: f64,
    pub final_accuracy: f64,
}

impl TrainHistory {
    pub fn initial_loss(&self) -> f64 {
        self.losses.first().copied().unwrap_or(self.final_loss)
    }

    /// `#`-prefixed run description, then `step,loss` rows; the final row
    /// (`step = steps`) is the loss after the last update.
    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# mode={} seed={} lr={} momentum={} final_accuracy={:.16e}\nstep,loss\n",
            self.mode, self.seed, self.optimizer.lr, self.optimizer.momentum, self.final_accuracy
        );
        for (i, l) in self.losses.iter().enumerate() {
            out.push_str(&format!("{i},{l:.16e}\n"));
        }
        out.push_str(&format!("{},{:.16e}\n", self.losses.len(), self.final_loss));
        out
    }
}

/// Mean cross-entropy over a stacked batch and, when asked, its gradient.
pub fn batch_loss<T: Scalar>(
    model: &ToyModel<T>,
    x: &Tensor3<T>,
    labels: &[usize],
    with_grad: bool,
) -> Result<(f64, Vec<T>)> {
    if labels.is_empty() {
        return arg_err("dataset", "is empty");
    }
    let cache = model.forward(x)?;
    let losses = cache.losses(labels)?;
    let scale = T::one() / T::of_usize(labels.len());
    let loss = (losses.into_iter().sum::<T>() * scale).to_f64_lossy();
    let grad = if with_grad { model.backward(&cache, labels, scale)? } else { Vec::new() };
    Ok((loss, grad))
}

pub fn accuracy<T: Scalar>(model: &ToyModel<T>, data: &ToyDataset<T>) -> Result<f64> {
    let pred = model.predict(&data.stacked()?)?;
    let hits = pred.iter().zip(&data.labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / data.len().max(1) as f64)
}

/// Trains `model` in place for `steps` full-batch updates. Frozen entries
/// are never written.
pub fn train<T: Scalar>(model: &mut ToyModel<T>, data: &ToyDataset<T>, opt: Sgd, steps: usize) -> Result<TrainHistory> {
    opt.validate()?;
    let frozen = model.frozen_mask();
    let lr = T::of(opt.lr);
    let mu = T::of(opt.momentum);
    let mut velocity = vec![T::zero(); frozen.len()];
    let mut losses = Vec::with_capacity(steps);
    let check = |step: usize, loss: f64| -> Result<()> {
        if !loss.is_finite() || loss > DIVERGENCE_LOSS {
            return Err(Error::Diverged { step, loss });
        }
        Ok(())
    };
    let x = data.stacked()?;
    for step in 0..steps {
        let (loss, grad) = batch_loss(model, &x, &data.labels, true)?;
        check(step, loss)?;
        losses.push(loss);
        let mut params = model.flatten();
        for i in 0..params.len() {
            if frozen[i] {
                continue;
            }
            velocity[i] = mu * velocity[i] + grad[i];
            params[i] -= lr * velocity[i];
        }
        model.assign(&params);
    }
    let (final_loss, _) = batch_loss(model, &x, &data.labels, false)?;
    check(steps, final_loss)?;
    Ok(TrainHistory {
        mode: model.mode().to_string(),
        seed: model.config().seed,
        optimizer: opt,
        losses,
        final_loss,
        final_accuracy: accuracy(model, data)?,
    })
}
