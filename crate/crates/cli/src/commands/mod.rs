use std::path::PathBuf;

use thiserror::Error;

use crate::cli::Command;
use crate::CommandResult;

mod checks;
mod runs;
mod tables;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] spectral_attention::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot serialize output: {0}")]
    Json(#[from] serde_json::Error),
}

pub fn dispatch(command: Command) -> Result<CommandResult, CliError> {
    match command {
        Command::DctTable { size, tau, out } => tables::dct_table(size, tau, out),
        Command::Coverage { size, out } => tables::coverage(size, out),
        Command::Klt { size, rho, out } => tables::klt(size, rho, out),
        Command::Equiv {
            seed,
            grid,
            out,
            perturb,
        } => checks::equiv(seed, grid, out, perturb),
        Command::Gradcheck {
            mode,
            seed,
            step,
            tau,
            corrupt_gradient,
        } => checks::gradcheck(mode, seed, step, tau, corrupt_gradient),
        Command::Bench {
            grid,
            seed,
            out,
            perturb,
        } => checks::bench(grid, seed, out, perturb),
        Command::Cost {
            model,
            tau,
            variant,
            out,
        } => runs::cost(&model, tau, variant, out),
        Command::Train {
            mode,
            steps,
            seed,
            samples,
            lr,
            momentum,
            tau,
            rho,
            out,
        } => runs::train(runs::TrainArgs {
            mode,
            steps,
            seed,
            samples,
            lr,
            momentum,
            tau,
            rho,
            out,
        }),
    }
}
