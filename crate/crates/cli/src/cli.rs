use std::path::PathBuf;

use clap::{Parser, Subcommand};
use spectral_attention::cost::CostVariant;
use spectral_attention::train::ToyMode;

#[derive(Debug, Parser)]
#[command(name = "spectral-attention", version, about = "DCT attention analyses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Orthonormal DCT-II matrix, and its truncation when --tau is given.
    DctTable {
        #[arg(long)]
        size: usize,
        #[arg(long)]
        tau: Option<f64>,
        /// With --tau, the truncated matrix goes to `<stem>-dbar.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-frequency coverage of the DCT basis and each basis vector's spectrum.
    Coverage {
        #[arg(long)]
        size: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// DCT versus KLT on an AR(1) covariance, with the energy compaction curve.
    Klt {
        #[arg(long)]
        size: usize,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Naive/simplified agreement and the full-ratio conjugation identity.
    Equiv {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sweep 20 (C, tau, P) configurations instead of one.
        #[arg(long)]
        grid: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true)]
        perturb: bool,
    },
    /// Analytic versus central-difference gradients of a toy model.
    Gradcheck {
        #[arg(long)]
        mode: ToyMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
        #[arg(long, hide = true)]
        corrupt_gradient: bool,
    },
    /// Multiplication and parameter accounting for a model.
    Cost {
        /// `swin-t`, `swin-s`, or a model-spec file.
        #[arg(long)]
        model: String,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value = "simplified")]
        variant: CostVariant,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full-batch SGD on the synthetic two-class task.
    Train {
        #[arg(long)]
        mode: ToyMode,
        #[arg(long, default_value_t = 300)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 512)]
        samples: usize,
        #[arg(long, default_value_t = 0.05)]
        lr: f64,
        #[arg(long, default_value_t = 0.9)]
        momentum: f64,
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
        #[arg(long, default_value_t = 0.2)]
        rho: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form multiplication counts against instrumented forward passes.
    Bench {
        /// Sweep the full shape grid instead of the small worked examples.
        #[arg(long)]
        grid: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true)]
        perturb: bool,
    },
}
