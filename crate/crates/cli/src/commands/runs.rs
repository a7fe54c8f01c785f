use std::path::PathBuf;

use spectral_attention::cost::{model_totals, CostVariant, ModelSpec};
use spectral_attention::train::{gen_synthetic, train as run_training, Sgd, ToyDatasetSpec, ToyMode, ToyModel, ToyModelConfig};

use super::CliError;
use crate::output::Sink;
use crate::CommandResult;

pub fn cost(model: &str, tau: f64, variant: CostVariant, out: Option<PathBuf>) -> Result<CommandResult, CliError> {
    let spec = ModelSpec::resolve(model)?;
    let totals = model_totals(&spec, tau, variant)?;
    let body = serde_json::to_string_pretty(&totals)? + "\n";
    let mut sink = Sink::default();
    sink.emit(out.as_deref(), &body)?;
    Ok(sink.finish(
        format!(
            "{} tau={tau} {variant}: param delta {:.2}M, mult delta {:.2}G",
            totals.model,
            totals.param_delta as f64 / 1e6,
            totals.mult_delta as f64 / 1e9
        ),
        None,
    ))
}

pub struct TrainArgs {
    pub mode: ToyMode,
    pub steps: usize,
    pub seed: u64,
    pub samples: usize,
    pub lr: f64,
    pub momentum: f64,
    pub tau: f64,
    pub rho: f64,
    pub out: Option<PathBuf>,
}

pub fn train(args: TrainArgs) -> Result<CommandResult, CliError> {
    let data = gen_synthetic::<f64>(&ToyDatasetSpec {
        samples: args.samples,
        rho: args.rho,
        seed: args.seed,
        ..Default::default()
    })?;
    let mut model = ToyModel::<f64>::new(
        args.mode,
        ToyModelConfig {
            tau: args.tau,
            seed: args.seed,
            ..Default::default()
        },
    )?;
    let opt = Sgd {
        lr: args.lr,
        momentum: args.momentum,
    };
    let history = run_training(&mut model, &data, opt, args.steps)?;
    let mut sink = Sink::default();
    sink.emit(args.out.as_deref(), &history.to_csv())?;
    Ok(sink.finish(
        format!(
            "{}: loss {:.4} -> {:.4}, accuracy {:.3}",
            args.mode,
            history.initial_loss(),
            history.final_loss,
            history.final_accuracy
        ),
        None,
    ))
}
