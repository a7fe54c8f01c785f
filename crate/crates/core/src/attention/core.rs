//! Projection + windowed multi-head attention shared by the vanilla and the
//! compressed blocks. Inputs have `d_in` features per token, projections
//! produce `d_out` features split evenly across heads.

use crate::dense::{softmax_in_place, Matrix, MulCounter};
use crate::error::{shape_err, Result};
use crate::scalar::Scalar;

use super::bias::{relative_bias, relative_index, scatter_bias_grad};

pub(crate) struct Projections<'a, T> {
    pub wq: &'a Matrix<T>,
    pub wk: &'a Matrix<T>,
    pub wv: &'a Matrix<T>,
    pub bq: &'a [T],
    pub bk: &'a [T],
    pub bv: &'a [T],
    pub bhat: &'a [Matrix<T>],
}

#[derive(Debug, Clone)]
pub(crate) struct AttendCache<T> {
    pub n: usize,
    pub m: usize,
    pub x_in: Matrix<T>,
    pub q: Matrix<T>,
    pub k: Matrix<T>,
    pub v: Matrix<T>,
    /// Softmax probabilities, indexed `window * heads + head`.
    pub probs: Vec<Matrix<T>>,
    /// Concatenated head outputs, `tokens x d_out`.
    pub a: Matrix<T>,
}

pub(crate) struct AttendGrads<T> {
    pub wq: Matrix<T>,
    pub wk: Matrix<T>,
    pub wv: Matrix<T>,
    pub bq: Vec<T>,
    pub bk: Vec<T>,
    pub bv: Vec<T>,
    pub bhat: Vec<Matrix<T>>,
    pub x_in: Matrix<T>,
}

fn linear<T: Scalar>(x: &Matrix<T>, w: &Matrix<T>, b: &[T], counter: &mut Option<&mut MulCounter>) -> Result<Matrix<T>> {
    let mut y = x.matmul_t(w, counter.as_deref_mut())?;
    y.add_row_vector(b)?;
    Ok(y)
}

pub(crate) fn attend_forward<T: Scalar>(
    x_in: Matrix<T>,
    proj: &Projections<'_, T>,
    n: usize,
    m: usize,
    mut counter: Option<&mut MulCounter>,
) -> Result<AttendCache<T>> {
    let m2 = m * m;
    let heads = proj.bhat.len();
    let d_out = proj.wq.rows();
    if x_in.rows() != n * m2 {
        return shape_err("attention", format!("{} tokens for {n} windows of {m2}", x_in.rows()));
    }
    if heads == 0 || d_out % heads != 0 {
        return shape_err("attention", format!("{d_out} features not divisible into {heads} heads"));
    }
    for w in [proj.wk, proj.wv] {
        if w.shape() != proj.wq.shape() {
            return shape_err("attention", format!("projection shapes {:?} vs {:?}", w.shape(), proj.wq.shape()));
        }
    }
    let hd = d_out / heads;
    let scale = T::one() / T::of_usize(hd).sqrt();
    let q = linear(&x_in, proj.wq, proj.bq, &mut counter)?;
    let k = linear(&x_in, proj.wk, proj.bk, &mut counter)?;
    let v = linear(&x_in, proj.wv, proj.bv, &mut counter)?;
    let biases = proj
        .bhat
        .iter()
        .map(|t| relative_bias(t, m))
        .collect::<Result<Vec<_>>>()?;

    let mut a = Matrix::zeros(n * m2, d_out);
    let mut probs = Vec::with_capacity(n * heads);
    for w in 0..n {
        let r0 = w * m2;
        for (h, bias) in biases.iter().enumerate() {
            let c0 = h * hd;
            let qi = q.block(r0, c0, m2, hd);
            let ki = k.block(r0, c0, m2, hd);
            let vi = v.block(r0, c0, m2, hd);
            let mut s = qi.matmul_t(&ki, counter.as_deref_mut())?;
            for (sv, &bv) in s.as_mut_slice().iter_mut().zip(bias.as_slice()) {
                *sv = *sv * scale + bv;
            }
            for r in 0..m2 {
                softmax_in_place(s.row_mut(r));
            }
            let ai = s.matmul(&vi, counter.as_deref_mut())?;
            a.set_block(r0, c0, &ai);
            probs.push(s);
        }
    }
    Ok(AttendCache {
        n,
        m,
        x_in,
        q,
        k,
        v,
        probs,
        a,
    })
}

pub(crate) fn attend_backward<T: Scalar>(
    cache: &AttendCache<T>,
    proj: &Projections<'_, T>,
    da: &Matrix<T>,
) -> Result<AttendGrads<T>> {
    if da.shape() != cache.a.shape() {
        return shape_err("attention backward", format!("{:?} vs {:?}", da.shape(), cache.a.shape()));
    }
    let m2 = cache.m * cache.m;
    let heads = proj.bhat.len();
    let d_out = cache.q.cols();
    let hd = d_out / heads;
    let scale = T::one() / T::of_usize(hd).sqrt();
    let idx = relative_index(cache.m);
    let side = 2 * cache.m - 1;

    let mut dq = Matrix::zeros(cache.q.rows(), d_out);
    let mut dk = Matrix::zeros(cache.q.rows(), d_out);
    let mut dv = Matrix::zeros(cache.q.rows(), d_out);
    let mut dbhat = vec![Matrix::zeros(side, side); heads];

    for w in 0..cache.n {
        let r0 = w * m2;
        for (h, dtable) in dbhat.iter_mut().enumerate() {
            let c0 = h * hd;
            let p = &cache.probs[w * heads + h];
            let dai = da.block(r0, c0, m2, hd);
            let qi = cache.q.block(r0, c0, m2, hd);
            let ki = cache.k.block(r0, c0, m2, hd);
            let vi = cache.v.block(r0, c0, m2, hd);

            let dp = dai.matmul_t(&vi, None)?;
            dv.add_block(r0, c0, &p.t_matmul(&dai)?);
            // softmax adjoint, row by row
            let mut ds = Matrix::zeros(m2, m2);
            for r in 0..m2 {
                let pr = p.row(r);
                let dpr = dp.row(r);
                let inner: T = pr.iter().zip(dpr).map(|(&a, &b)| a * b).sum();
                for ((o, &pv), &dpv) in ds.row_mut(r).iter_mut().zip(pr).zip(dpr) {
                    *o = pv * (dpv - inner);
                }
            }
            scatter_bias_grad(&ds, &idx, dtable);
            let ds = ds.scale(scale);
            dq.add_block(r0, c0, &ds.matmul(&ki, None)?);
            dk.add_block(r0, c0, &ds.t_matmul(&qi)?);
        }
    }

    let mut dx = dq.matmul(proj.wq, None)?;
    dx.axpy(T::one(), &dk.matmul(proj.wk, None)?)?;
    dx.axpy(T::one(), &dv.matmul(proj.wv, None)?)?;
    Ok(AttendGrads {
        wq: dq.t_matmul(&cache.x_in)?,
        wk: dk.t_matmul(&cache.x_in)?,
        wv: dv.t_matmul(&cache.x_in)?,
        bq: dq.col_sums(),
        bk: dk.col_sums(),
        bv: dv.col_sums(),
        bhat: dbhat,
        x_in: dx,
    })
}

/// `x W^T + b` with the product tallied on `counter`.
pub(crate) fn linear_counted<T: Scalar>(
    x: &Matrix<T>,
    w: &Matrix<T>,
    b: &[T],
    mut counter: Option<&mut MulCounter>,
) -> Result<Matrix<T>> {
    linear(x, w, b, &mut counter)
}

