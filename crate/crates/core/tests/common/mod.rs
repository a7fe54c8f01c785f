#![allow(dead_code)]

use spectral_attention::attention::{AttentionConfig, AttentionWeights, Parameters};
use spectral_attention::dense::{normal_matrix, seeded_rng, Matrix, Tensor3};

pub fn random_input(n: usize, m2: usize, c: usize, seed: u64) -> Tensor3<f64> {
    let mut rng = seeded_rng(seed);
    Tensor3::from_token_matrix(n, m2, normal_matrix(n * m2, c, 1.0, &mut rng)).unwrap()
}

pub fn sum_sq(y: &Tensor3<f64>) -> f64 {
    y.as_slice().iter().map(|v| v * v).sum()
}

/// Central differences of `loss` with respect to every entry of `params`.
pub fn central_diff<P: Parameters<f64> + Clone>(params: &P, step: f64, loss: impl Fn(&P) -> f64) -> Vec<f64> {
    let base = params.flatten();
    let mut probe = params.clone();
    let mut out = Vec::with_capacity(base.len());
    for i in 0..base.len() {
        let mut v = base.clone();
        v[i] = base[i] + step;
        probe.assign(&v);
        let up = loss(&probe);
        v[i] = base[i] - step;
        probe.assign(&v);
        let down = loss(&probe);
        out.push((up - down) / (2.0 * step));
    }
    out
}

pub fn central_diff_input(x: &Tensor3<f64>, step: f64, loss: impl Fn(&Tensor3<f64>) -> f64) -> Vec<f64> {
    let mut probe = x.clone();
    let mut out = Vec::with_capacity(x.as_slice().len());
    for i in 0..x.as_slice().len() {
        let orig = x.as_slice()[i];
        probe.as_mut_slice()[i] = orig + step;
        let up = loss(&probe);
        probe.as_mut_slice()[i] = orig - step;
        let down = loss(&probe);
        probe.as_mut_slice()[i] = orig;
        out.push((up - down) / (2.0 * step));
    }
    out
}

/// Relative-error floor matching the round-off resolution of a central
/// difference of a loss of magnitude `loss` at `step`.
pub fn fd_floor(loss: f64, step: f64) -> f64 {
    (1e6 * f64::EPSILON * loss.abs().max(1.0) / step).max(1e-8)
}

/// Worst `|a - n| / max(|a|, |n|, floor)` over paired entries.
pub fn worst_rel_err(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// Explicit-loop vanilla attention, written independently of the library's
/// matrix kernels.
pub fn msa_loop_oracle(x: &Tensor3<f64>, w: &AttentionWeights<f64>, cfg: &AttentionConfig) -> Tensor3<f64> {
    let (n, m, c, p) = (cfg.n, cfg.m, cfg.c, cfg.p);
    let m2 = m * m;
    let d = c / p;
    let lin = |w: &Matrix<f64>, b: &[f64], win: usize, t: usize, o: usize| -> f64 {
        let mut acc = b[o];
        for i in 0..c {
            acc += x.get(win, t, i) * w[(o, i)];
        }
        acc
    };
    let mut y = Tensor3::zeros(n, m2, c);
    for win in 0..n {
        let mut a = vec![vec![0.0; c]; m2];
        for h in 0..p {
            for i in 0..m2 {
                let mut scores = vec![0.0; m2];
                for j in 0..m2 {
                    let mut s = 0.0;
                    for e in h * d..(h + 1) * d {
                        s += lin(&w.wq, &w.bq, win, i, e) * lin(&w.wk, &w.bk, win, j, e);
                    }
                    let dy = (i / m) as isize - (j / m) as isize + m as isize - 1;
                    let dx = (i % m) as isize - (j % m) as isize + m as isize - 1;
                    scores[j] = s / (d as f64).sqrt() + w.bhat[h][(dy as usize, dx as usize)];
                }
                let mx = scores.iter().cloned().fold(f64::MIN, f64::max);
                let ex: Vec<f64> = scores.iter().map(|s| (s - mx).exp()).collect();
                let z: f64 = ex.iter().sum();
                for e in h * d..(h + 1) * d {
                    a[i][e] = (0..m2).map(|j| ex[j] / z * lin(&w.wv, &w.bv, win, j, e)).sum();
                }
            }
        }
        for t in 0..m2 {
            for o in 0..c {
                let mut acc = w.bo[o];
                for e in 0..c {
                    acc += a[t][e] * w.wo[(o, e)];
                }
                y.set(win, t, o, acc);
            }
        }
    }
    y
}
