use std::fmt::Write as _;
use std::path::PathBuf;

use spectral_attention::attention::{msa_forward, AttentionConfig};
use spectral_attention::compressed::{compressed_forward, conjugate_tau1, CompressedVariant, CompressedWeights};
use spectral_attention::cost::{block_mults, measured_block_mults, BlockShape, CostVariant};
use spectral_attention::dense::{normal_matrix, seeded_rng};
use spectral_attention::train::{gen_synthetic, grad_check_with, ToyDatasetSpec, ToyMode, ToyModel, ToyModelConfig};
use spectral_attention::transform::{dct_matrix, truncate};
use spectral_attention::Tensor64;

use super::CliError;
use crate::output::{num, Sink};
use crate::CommandResult;

const EQUIV_TOL: f64 = 1e-10;
const GRAD_TOL: f64 = 1e-5;
/// Added to `W_O` of the simplified pass by the hidden `--perturb` flag.
const PERTURBATION: f64 = 1e-3;

fn input(n: usize, m2: usize, c: usize, seed: u64) -> Result<Tensor64, CliError> {
    let mut rng = seeded_rng(seed);
    Ok(Tensor64::from_token_matrix(n, m2, normal_matrix(n * m2, c, 1.0, &mut rng))?)
}

/// `(C, tau, P)` triples checked by `equiv --grid`.
fn equiv_grid() -> Vec<(usize, f64, usize)> {
    let mut grid = Vec::new();
    for c in [4, 8, 16] {
        for tau in [0.25, 0.5, 0.75, 1.0] {
            for p in [1, 2] {
                let kept = (tau * c as f64).round() as usize;
                if kept % p == 0 && grid.len() < 20 {
                    grid.push((c, tau, p));
                }
            }
        }
    }
    grid
}

pub fn equiv(seed: u64, grid: bool, out: Option<PathBuf>, perturb: bool) -> Result<CommandResult, CliError> {
    let configs = if grid { equiv_grid() } else { vec![(8, 0.5, 2)] };
    let mut body = String::from("check,c,tau,p,seed,max_abs_diff\n");
    let mut worst_pair: f64 = 0.0;
    for (i, &(c, tau, p)) in configs.iter().enumerate() {
        let s = seed.wrapping_add(i as u64);
        let cfg = AttentionConfig::new(2, 2, c, p)?;
        let trunc = truncate(&dct_matrix(c)?, tau)?;
        let cw = CompressedWeights::randomized(c, trunc.kept(), p, 2, 0.5, s)?;
        let x = input(2, 4, c, s.wrapping_add(100))?;
        let (yn, _) = compressed_forward(&x, &cw, &cfg, &trunc, CompressedVariant::Naive, None)?;
        let mut fused = cw.clone();
        if perturb {
            fused.wo[(0, 0)] += PERTURBATION;
        }
        let (ys, _) = compressed_forward(&x, &fused, &cfg, &trunc, CompressedVariant::Simplified, None)?;
        let diff = yn.max_abs_diff(&ys);
        worst_pair = worst_pair.max(diff);
        let _ = writeln!(body, "naive-vs-simplified,{c},{tau},{p},{s},{}", num(diff));
    }

    let basis = dct_matrix::<f64>(8)?;
    let trunc = truncate(&basis, 1.0)?;
    let cfg = AttentionConfig::new(2, 2, 8, 2)?;
    let cw = CompressedWeights::randomized(8, 8, 2, 2, 0.5, seed)?;
    let x = input(2, 4, 8, seed.wrapping_add(50))?;
    let (yv, _) = msa_forward(&x, &conjugate_tau1(&cw, &basis)?, &cfg, None)?;
    let mut worst_conj: f64 = 0.0;
    for (v, name) in [(CompressedVariant::Naive, "naive"), (CompressedVariant::Simplified, "simplified")] {
        let (yc, _) = compressed_forward(&x, &cw, &cfg, &trunc, v, None)?;
        let diff = yc.max_abs_diff(&yv);
        worst_conj = worst_conj.max(diff);
        let _ = writeln!(body, "conjugation-{name},8,1,2,{seed},{}", num(diff));
    }

    let mut sink = Sink::default();
    sink.emit(out.as_deref(), &body)?;
    let summary = format!(
        "naive vs simplified {worst_pair:.2e} over {} config(s); tau = 1 conjugation {worst_conj:.2e}",
        configs.len()
    );
    let failed = if worst_pair >= EQUIV_TOL {
        Some(format!("naive-vs-simplified ({worst_pair:e} >= {EQUIV_TOL:e})"))
    } else if worst_conj >= EQUIV_TOL {
        Some(format!("conjugation ({worst_conj:e} >= {EQUIV_TOL:e})"))
    } else {
        None
    };
    Ok(sink.finish(summary, failed))
}

pub fn gradcheck(mode: ToyMode, seed: u64, step: f64, tau: f64, corrupt: bool) -> Result<CommandResult, CliError> {
    let data = gen_synthetic::<f64>(&ToyDatasetSpec {
        samples: 4,
        seed,
        ..Default::default()
    })?;
    let model = ToyModel::<f64>::new(
        mode,
        ToyModelConfig {
            tau,
            seed,
            ..Default::default()
        },
    )?;
    let err = grad_check_with(&model, &data.stacked()?, &data.labels, step, |g| {
        if corrupt {
            // the classifier weights are never frozen
            g[0] += 1e-3;
        }
    })?;
    let mut sink = Sink::default();
    sink.emit(None, &format!("mode,seed,max_relative_error\n{mode},{seed},{}\n", num(err)))?;
    let failed = (err >= GRAD_TOL).then(|| format!("gradient ({err:e} >= {GRAD_TOL:e})"));
    Ok(sink.finish(format!("{mode}: max relative error {err:.2e}"), failed))
}

/// `(N, M)` window layouts and `(C, P)` widths swept by `bench`.
fn bench_shapes(grid: bool) -> (Vec<(usize, usize)>, Vec<(usize, usize)>, Vec<f64>) {
    if grid {
        (
            vec![(1, 2), (2, 2), (1, 3)],
            vec![(4, 1), (8, 1), (8, 2), (16, 2)],
            vec![0.25, 0.5, 0.75, 1.0],
        )
    } else {
        (vec![(1, 2)], vec![(4, 1), (8, 2)], vec![0.5])
    }
}

pub fn bench(grid: bool, seed: u64, out: Option<PathBuf>, perturb: bool) -> Result<CommandResult, CliError> {
    let (layouts, widths, taus) = bench_shapes(grid);
    let mut body = String::from("n,m,c,p,tau,variant,closed_form,measured,match\n");
    let mut rows = 0u64;
    let mut first_mismatch = None;
    for &(n, m) in &layouts {
        for &(c, p) in &widths {
            for &tau in &taus {
                for variant in CostVariant::ALL {
                    let shape = BlockShape::windows(n, m, c, p)?;
                    // heads that do not divide the kept width have no block to measure
                    let Ok(closed) = block_mults(shape, variant, tau) else {
                        continue;
                    };
                    let mut measured = measured_block_mults(shape, variant, tau, seed.wrapping_add(rows))?;
                    if perturb && rows == 0 {
                        measured += 1;
                    }
                    let ok = closed.total == measured;
                    if !ok && first_mismatch.is_none() {
                        first_mismatch = Some(format!(
                            "closed-form count (n={n} m={m} c={c} p={p} tau={tau} {variant}: {} vs {measured})",
                            closed.total
                        ));
                    }
                    let _ = writeln!(body, "{n},{m},{c},{p},{tau},{variant},{},{measured},{ok}", closed.total);
                    rows += 1;
                }
            }
        }
    }
    let mut sink = Sink::default();
    sink.emit(out.as_deref(), &body)?;
    Ok(sink.finish(format!("{rows} combinations compared"), first_mismatch))
}
