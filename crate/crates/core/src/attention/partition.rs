use crate::dense::Tensor3;
use crate::error::{shape_err, Result};
use crate::scalar::Scalar;

/// Splits an image into non-overlapping `m x m` windows.
///
/// The image is an `H x W x C` tensor (its three axes read as rows, columns,
/// channels). Windows are ordered row-major over the window grid and tokens
/// row-major inside each window.
pub fn partition<T: Scalar>(image: &Tensor3<T>, m: usize) -> Result<Tensor3<T>> {
    let (h, w, c) = image.shape();
    if m == 0 || h % m != 0 || w % m != 0 {
        return shape_err(
            "partition",
            format!("{h}x{w} image is not divisible into {m}x{m} windows"),
        );
    }
    let grid_w = w / m;
    let n = (h / m) * grid_w;
    Ok(Tensor3::from_fn(n, m * m, c, |win, tok, ch| {
        let (wy, wx) = (win / grid_w, win % grid_w);
        let (ty, tx) = (tok / m, tok % m);
        image.get(wy * m + ty, wx * m + tx, ch)
    }))
}

/// Inverse of [`partition`]: reassembles windows into an `h x w x C` image.
pub fn reverse<T: Scalar>(windows: &Tensor3<T>, m: usize, h: usize, w: usize) -> Result<Tensor3<T>> {
    if m == 0 || h % m != 0 || w % m != 0 || windows.m2() != m * m || windows.n() != (h / m) * (w / m) {
        return shape_err(
            "reverse",
            format!(
                "{:?} windows cannot tile a {h}x{w} image with side {m}",
                windows.shape()
            ),
        );
    }
    let grid_w = w / m;
    Ok(Tensor3::from_fn(h, w, windows.c(), |y, x, ch| {
        let win = (y / m) * grid_w + x / m;
        let tok = (y % m) * m + x % m;
        windows.get(win, tok, ch)
    }))
}
