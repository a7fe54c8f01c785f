use super::matrix::Matrix;
use crate::error::{shape_err, Error, Result};
use crate::scalar::Scalar;

/// Windowed activations of shape `n x m2 x c` (windows, tokens per window,
/// channels), stored row-major so the data doubles as an `(n*m2) x c`
/// token matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3<T> {
    n: usize,
    m2: usize,
    c: usize,
    data: Vec<T>,
}

impl<T: Scalar> Tensor3<T> {
    pub fn zeros(n: usize, m2: usize, c: usize) -> Self {
        Self {
            n,
            m2,
            c,
            data: vec![T::zero(); n * m2 * c],
        }
    }

    pub fn from_vec(n: usize, m2: usize, c: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * m2 * c {
            return shape_err(
                "Tensor3::from_vec",
                format!("{} values for {n}x{m2}x{c}", data.len()),
            );
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Tensor3::from_vec"));
        }
        Ok(Self { n, m2, c, data })
    }

    pub fn from_fn(n: usize, m2: usize, c: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * m2 * c);
        for w in 0..n {
            for t in 0..m2 {
                for ch in 0..c {
                    data.push(f(w, t, ch));
                }
            }
        }
        Self { n, m2, c, data }
    }

    /// Reinterprets an `(n*m2) x c` token matrix as `n` windows of `m2` tokens.
    pub fn from_token_matrix(n: usize, m2: usize, tokens: Matrix<T>) -> Result<Self> {
        if tokens.rows() != n * m2 {
            return shape_err(
                "Tensor3::from_token_matrix",
                format!("{} rows for {n} windows of {m2} tokens", tokens.rows()),
            );
        }
        let c = tokens.cols();
        Ok(Self {
            n,
            m2,
            c,
            data: tokens.into_vec(),
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m2(&self) -> usize {
        self.m2
    }

    #[inline]
    pub fn c(&self) -> usize {
        self.c
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n, self.m2, self.c)
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, w: usize, t: usize, ch: usize) -> T {
        self.data[(w * self.m2 + t) * self.c + ch]
    }

    #[inline]
    pub fn set(&mut self, w: usize, t: usize, ch: usize, v: T) {
        self.data[(w * self.m2 + t) * self.c + ch] = v;
    }

    /// All tokens as an `(n*m2) x c` matrix.
    pub fn to_token_matrix(&self) -> Matrix<T> {
        Matrix::from_vec(self.n * self.m2, self.c, self.data.clone())
            .expect("tensor data length is consistent")
    }

    /// Copy of window `w` as an `m2 x c` matrix.
    pub fn window(&self, w: usize) -> Matrix<T> {
        let len = self.m2 * self.c;
        Matrix::from_vec(self.m2, self.c, self.data[w * len..(w + 1) * len].to_vec())
            .expect("window slice length is consistent")
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            data: self.data.iter().map(|&v| v * s).collect(),
            ..self.clone()
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        if self.shape() != other.shape() {
            return T::infinity();
        }
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// Reorders windows so that output window `i` is input window `perm[i]`.
    pub fn permute_windows(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n];
        if perm.len() != self.n
            || perm.iter().any(|&p| p >= self.n || std::mem::replace(&mut seen[p], true))
        {
            return shape_err("permute_windows", "not a permutation of the window indices");
        }
        let len = self.m2 * self.c;
        let mut data = Vec::with_capacity(self.data.len());
        for &p in perm {
            data.extend_from_slice(&self.data[p * len..(p + 1) * len]);
        }
        Ok(Self { data, ..self.clone() })
    }
}
