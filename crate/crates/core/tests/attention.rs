mod common;

use common::*;
use spectral_attention::attention::{
    msa_backward, msa_forward, AttentionConfig, AttentionWeights, Parameters,
};
use spectral_attention::dense::Tensor3;

#[test]
fn matches_explicit_loop_oracle() {
    for (cfg, seed) in [
        (AttentionConfig::new(1, 2, 4, 2).unwrap(), 1),
        (AttentionConfig::new(3, 2, 6, 3).unwrap(), 2),
        (AttentionConfig::new(2, 3, 4, 1).unwrap(), 3),
    ] {
        let w = AttentionWeights::<f64>::randomized(&cfg, 0.5, seed).unwrap();
        let x = random_input(cfg.n, cfg.m2(), cfg.c, seed + 100);
        let (y, _) = msa_forward(&x, &w, &cfg, None).unwrap();
        let oracle = msa_loop_oracle(&x, &w, &cfg);
        assert!(y.max_abs_diff(&oracle) < 1e-12, "{cfg:?}");
    }
}

fn grad_check(cfg: AttentionConfig, seed: u64) -> (f64, f64, Vec<(usize, f64, f64)>) {
    let w = AttentionWeights::<f64>::randomized(&cfg, 0.5, seed).unwrap();
    let x = random_input(cfg.n, cfg.m2(), cfg.c, seed + 1000);
    let (y, cache) = msa_forward(&x, &w, &cfg, None).unwrap();
    // d sum(Y^2) / dY = 2Y
    let g = msa_backward(&cache, &y.scale(2.0)).unwrap();
    let loss_w = |p: &AttentionWeights<f64>| sum_sq(&msa_forward(&x, p, &cfg, None).unwrap().0);
    let num_w = central_diff(&w, 1e-5, loss_w);
    let loss_x = |xx: &Tensor3<f64>| sum_sq(&msa_forward(xx, &w, &cfg, None).unwrap().0);
    let num_x = central_diff_input(&x, 1e-5, loss_x);
    let a = g.flatten();
    let details = a.iter().zip(&num_w).enumerate().map(|(i, (a, n))| (i, *a, *n)).collect();
    let floor = fd_floor(sum_sq(&y), 1e-5);
    (worst_rel_err(&a, &num_w, floor), worst_rel_err(g.dx.as_slice(), &num_x, floor), details)
}

#[test]
fn gradients_match_central_differences() {
    for p in [1, 2] {
        for seed in 0..5 {
            let cfg = AttentionConfig::new(1, 2, 4, p).unwrap();
            let (ew, ex, details) = grad_check(cfg, seed);
            if ew >= 1e-5 {
                for (i, a, n) in details {
                    eprintln!("{i}: {a:e} {n:e}");
                }
            }
            assert!(ew < 1e-5, "P={p} seed={seed}: weights {ew:e}");
            assert!(ex < 1e-5, "P={p} seed={seed}: input {ex:e}");
        }
    }
}

#[test]
fn attention_rows_are_distributions() {
    let cfg = AttentionConfig::new(3, 3, 6, 2).unwrap();
    let w = AttentionWeights::<f64>::randomized(&cfg, 0.7, 21).unwrap();
    let (_, cache) = msa_forward(&random_input(3, 9, 6, 22), &w, &cfg, None).unwrap();
    for p in cache.attention_probs() {
        for r in 0..p.rows() {
            let s: f64 = p.row(r).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn windows_do_not_interact() {
    let cfg = AttentionConfig::new(4, 2, 4, 2).unwrap();
    let w = AttentionWeights::<f64>::randomized(&cfg, 0.5, 31).unwrap();
    let x = random_input(4, 4, 4, 32);
    let perm = [2, 0, 3, 1];
    let (y, _) = msa_forward(&x, &w, &cfg, None).unwrap();
    let (yp, _) = msa_forward(&x.permute_windows(&perm).unwrap(), &w, &cfg, None).unwrap();
    assert!(yp.max_abs_diff(&y.permute_windows(&perm).unwrap()) < 1e-14);
}

#[test]
fn constant_bias_shift_is_invisible() {
    let cfg = AttentionConfig::new(2, 3, 4, 2).unwrap();
    let w = AttentionWeights::<f64>::randomized(&cfg, 0.5, 41).unwrap();
    let x = random_input(2, 9, 4, 42);
    let (y, _) = msa_forward(&x, &w, &cfg, None).unwrap();
    let mut shifted = w.clone();
    for t in &mut shifted.bhat {
        *t = t.map(|v| v + 3.25);
    }
    let (ys, _) = msa_forward(&x, &shifted, &cfg, None).unwrap();
    assert!(ys.max_abs_diff(&y) < 1e-10);
}
