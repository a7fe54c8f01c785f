use serde::{Deserialize, Serialize};

use crate::dense::{seeded_rng, Tensor3};
use crate::error::{arg_err, Error, Result};
use crate::scalar::Scalar;
use crate::transform::{ar1_sample, dct_matrix};

/// Draw attempts allowed per requested sample before giving up on balance.
pub const MAX_OVERSAMPLING: usize = 100;

/// Synthetic two-class dataset. Every token's channel vector is an AR(1)
/// sequence with coefficient `rho`. Class 1 means the lowest `C/4` DCT
/// coefficients carry more energy than the highest `C/4` (summed over the
/// sample's tokens); samples whose band energies differ by less than
/// `margin * (E_low + E_high)` are discarded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyDatasetSpec {
    pub samples: usize,
    pub n: usize,
    pub m: usize,
    pub c: usize,
    pub rho: f64,
    pub margin: f64,
    pub seed: u64,
}

impl Default for ToyDatasetSpec {
    fn default() -> Self {
        Self {
            samples: 512,
            n: 1,
            m: 2,
            c: 8,
            rho: 0.2,
            margin: 0.4,
            seed: 0,
        }
    }
}

impl ToyDatasetSpec {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return arg_err("samples", "need at least two samples");
        }
        if self.n == 0 || self.m == 0 {
            return arg_err("n", "window count and side must be positive");
        }
        if self.c < 4 {
            return arg_err("c", format!("{} channels leave no C/4 band", self.c));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return arg_err("rho", format!("{} is outside [0, 1)", self.rho));
        }
        if !(0.0..1.0).contains(&self.margin) {
            return arg_err("margin", format!("{} is outside [0, 1)", self.margin));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyDataset<T> {
    pub spec: ToyDatasetSpec,
    pub inputs: Vec<Tensor3<T>>,
    pub labels: Vec<usize>,
}

impl<T: Scalar> ToyDataset<T> {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.len() - ones, ones]
    }

    /// All samples as one tensor, windows of sample `b` at
    /// `b * N .. (b + 1) * N`.
    pub fn stacked(&self) -> Result<Tensor3<T>> {
        let s = &self.spec;
        let m2 = s.m * s.m;
        let mut data = Vec::with_capacity(self.len() * s.n * m2 * s.c);
        for x in &self.inputs {
            data.extend_from_slice(x.as_slice());
        }
        Tensor3::from_vec(self.len() * s.n, m2, s.c, data)
    }

    /// One row per sample: label, then the flattened tokens.
    pub fn to_csv(&self) -> String {
        let width = self.inputs.first().map_or(0, |x| x.as_slice().len());
        let mut out = String::from("label");
        for i in 0..width {
            out.push_str(&format!(",x{i}"));
        }
        out.push('\n');
        for (x, l) in self.inputs.iter().zip(&self.labels) {
            out.push_str(&l.to_string());
            for v in x.as_slice() {
                out.push_str(&format!(",{:.16e}", v.to_f64_lossy()));
            }
            out.push('\n');
        }
        out
    }
}

/// Low-band and high-band DCT energies of one sample.
pub fn band_energies<T: Scalar>(x: &Tensor3<T>, basis: &crate::transform::DctBasis<T>) -> Result<(f64, f64)> {
    let c = x.c();
    let q = c / 4;
    let coeffs = basis.forward_rows(&x.to_token_matrix())?;
    let (mut low, mut high) = (0.0, 0.0);
    for t in 0..coeffs.rows() {
        let row = coeffs.row(t);
        low += row[..q].iter().map(|v| v.to_f64_lossy().powi(2)).sum::<f64>();
        high += row[c - q..].iter().map(|v| v.to_f64_lossy().powi(2)).sum::<f64>();
    }
    Ok((low, high))
}

/// Draws samples until each class holds half of `spec.samples` (class 1
/// takes the odd one out), then interleaves them in draw order.
pub fn gen_synthetic<T: Scalar>(spec: &ToyDatasetSpec) -> Result<ToyDataset<T>> {
    spec.validate()?;
    let basis = dct_matrix::<T>(spec.c)?;
    let m2 = spec.m * spec.m;
    let quota = [spec.samples / 2, spec.samples - spec.samples / 2];
    let mut rng = seeded_rng(spec.seed);
    let mut inputs = Vec::with_capacity(spec.samples);
    let mut labels = Vec::with_capacity(spec.samples);
    let mut counts = [0usize; 2];
    let budget = MAX_OVERSAMPLING * spec.samples;
    let mut draws = 0;
    while counts != quota {
        if draws == budget {
            return Err(Error::Imbalanced(format!(
                "after {draws} draws: {} class-0 and {} class-1 samples of {} each \
                 (rho = {}, margin = {})",
                counts[0], counts[1], quota[1], spec.rho, spec.margin
            )));
        }
        draws += 1;
        let mut data = Vec::with_capacity(spec.n * m2 * spec.c);
        for _ in 0..spec.n * m2 {
            data.extend(ar1_sample::<T>(spec.c, spec.rho, &mut rng));
        }
        let x = Tensor3::from_vec(spec.n, m2, spec.c, data)?;
        let (low, high) = band_energies(&x, &basis)?;
        if (low - high).abs() <= spec.margin * (low + high) {
            continue;
        }
        let label = usize::from(low > high);
        if counts[label] < quota[label] {
            counts[label] += 1;
            inputs.push(x);
            labels.push(label);
        }
    }
    Ok(ToyDataset {
        spec: spec.clone(),
        inputs,
        labels,
    })
}
