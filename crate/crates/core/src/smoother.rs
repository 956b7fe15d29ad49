//! Gaussian Nadaraya–Watson smoother matrices.
//!
//! Row `i` of `S_j` holds the normalized kernel weights
//! `K_h(x_i − x_k) / Σ_m K_h(x_i − x_m)` with `K_h(u) = exp(−u²/(2h²))`,
//! so every row sums to one and `S_j r` is the kernel regression of `r`
//! on covariate `j` evaluated at the training points.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Plug-in bandwidth `0.6 · sd(x) · n^(−1/5)`, with the `n − 1` sample standard deviation.
pub fn plugin_bandwidth(column: &[f64]) -> Result<f64> {
    let n = column.len();
    if n < 2 {
        return Err(Error::InvalidDataset(format!(
            "bandwidth needs at least 2 samples, got {n}"
        )));
    }
    let mean = column.iter().sum::<f64>() / n as f64;
    let var = column.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(Error::DegenerateCovariate(0));
    }
    Ok(0.6 * sd * (n as f64).powf(-0.2))
}

/// Builds the `n × n` row-stochastic Gaussian smoother for one covariate.
pub fn build_smoother(column: &[f64], h: f64) -> DMatrix<f64> {
    let n = column.len();
    let scale = -0.5 / (h * h);
    let mut s = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        s[(k, k)] = 1.0;
        for i in (k + 1)..n {
            let d = column[i] - column[k];
            let w = (scale * d * d).exp();
            s[(i, k)] = w;
            s[(k, i)] = w;
        }
    }
    for i in 0..n {
        let total: f64 = s.row(i).iter().sum();
        s.row_mut(i).iter_mut().for_each(|w| *w /= total);
    }
    s
}

/// `S · r`.
pub fn smooth(s: &DMatrix<f64>, r: &[f64]) -> Result<Vec<f64>> {
    if s.ncols() != r.len() {
        return Err(Error::DimensionMismatch {
            expected: s.ncols(),
            got: r.len(),
        });
    }
    let mut out = vec![0.0; s.nrows()];
    matvec(s, r, &mut out);
    Ok(out)
}

/// `out = S r`, accumulating four columns at a time; the solver spends
/// most of its time here.
pub(crate) fn matvec(s: &DMatrix<f64>, r: &[f64], out: &mut [f64]) {
    let n = s.nrows();
    let out = &mut out[..n];
    out.iter_mut().for_each(|v| *v = 0.0);
    let mut quads = s.as_slice().chunks_exact(4 * n);
    let mut weights = r.chunks_exact(4);
    for (cols, w) in (&mut quads).zip(&mut weights) {
        let (c0, rest) = cols.split_at(n);
        let (c1, rest) = rest.split_at(n);
        let (c2, c3) = rest.split_at(n);
        for i in 0..n {
            out[i] += (c0[i] * w[0] + c1[i] * w[1]) + (c2[i] * w[2] + c3[i] * w[3]);
        }
    }
    for (col, &w) in quads.remainder().chunks_exact(n).zip(weights.remainder()) {
        out.iter_mut().zip(col).for_each(|(o, v)| *o += v * w);
    }
}

/// Kernel-weighted interpolation of `values` (observed at `train`) onto `query`.
///
/// Weights are computed relative to the nearest training point so that
/// queries far outside the training range fall back to nearest-neighbour
/// values instead of `0/0`.
pub fn nadaraya_watson(train: &[f64], values: &[f64], h: f64, query: &[f64]) -> Vec<f64> {
    let scale = -0.5 / (h * h);
    query
        .iter()
        .map(|&x| {
            let nearest = train
                .iter()
                .map(|&t| (t - x) * (t - x))
                .fold(f64::INFINITY, f64::min);
            let (mut num, mut den) = (0.0, 0.0);
            for (&t, &v) in train.iter().zip(values) {
                let d2 = (t - x) * (t - x);
                let w = (scale * (d2 - nearest)).exp();
                num += w * v;
                den += w;
            }
            num / den
        })
        .collect()
}

/// Per-covariate smoother matrices, computed once per fit.
///
/// Matrices are reference counted so that duplicated covariates can share one.
#[derive(Debug, Clone)]
pub struct SmootherSet {
    matrices: Vec<Arc<DMatrix<f64>>>,
    bandwidths: Vec<f64>,
}

impl SmootherSet {
    /// Plug-in bandwidths for every covariate of `data`.
    pub fn from_dataset(data: &Dataset) -> Result<Self> {
        let bandwidths = (0..data.p())
            .map(|j| {
                plugin_bandwidth(data.column(j)).map_err(|e| match e {
                    Error::DegenerateCovariate(_) => Error::DegenerateCovariate(j + 1),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::with_bandwidths(data, bandwidths)
    }

    pub fn with_bandwidths(data: &Dataset, bandwidths: Vec<f64>) -> Result<Self> {
        if bandwidths.len() != data.p() {
            return Err(Error::DimensionMismatch {
                expected: data.p(),
                got: bandwidths.len(),
            });
        }
        if let Some(h) = bandwidths.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidConfig(format!("bandwidth must be positive, got {h}")));
        }
        let matrices = bandwidths
            .iter()
            .enumerate()
            .map(|(j, &h)| Arc::new(build_smoother(data.column(j), h)))
            .collect();
        Ok(Self {
            matrices,
            bandwidths,
        })
    }

    /// A set whose entry `k` is entry `source[k]` of `self`, sharing storage.
    pub fn select(&self, source: &[usize]) -> Self {
        Self {
            matrices: source.iter().map(|&j| Arc::clone(&self.matrices[j])).collect(),
            bandwidths: source.iter().map(|&j| self.bandwidths[j]).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn n(&self) -> usize {
        self.matrices.first().map_or(0, |m| m.nrows())
    }

    pub fn matrix(&self, j: usize) -> &DMatrix<f64> {
        &self.matrices[j]
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn shares_storage(&self, a: usize, b: usize) -> bool {
        Arc::ptr_eq(&self.matrices[a], &self.matrices[b])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn plugin_bandwidth_formula() {
        // n = 150 column with sample sd exactly 1: ±a alternating, a = sqrt(149/150)
        let a = (149.0f64 / 150.0).sqrt();
        let col: Vec<f64> = (0..150).map(|i| if i % 2 == 0 { a } else { -a }).collect();
        assert_abs_diff_eq!(plugin_bandwidth(&col).unwrap(), 0.220_258_662_950_991, epsilon = 1e-12);
        let col2: Vec<f64> = col.iter().map(|v| 2.0 * v).collect();
        assert_abs_diff_eq!(plugin_bandwidth(&col2).unwrap(), 0.440_517_325_901_982, epsilon = 1e-12);
        assert_eq!(plugin_bandwidth(&[3.0; 10]), Err(Error::DegenerateCovariate(0)));
    }

    #[test]
    fn degenerate_covariate_is_named() {
        let ds = Dataset::from_columns(&[vec![1.0, 2.0, 3.0], vec![5.0; 3]], vec![0.0; 3]).unwrap();
        assert_eq!(SmootherSet::from_dataset(&ds).unwrap_err(), Error::DegenerateCovariate(2));
    }

    #[test]
    fn build_smoother_examples() {
        assert_eq!(build_smoother(&[4.2], 0.3), DMatrix::from_element(1, 1, 1.0));
        let s = build_smoother(&[1.0, 1.0], 0.7);
        assert!(s.iter().all(|&w| w == 0.5));
        for h in [0.1, 1.0, 7.5] {
            let s = build_smoother(&[0.0, h], h);
            let w = 1.0 / (1.0 + (-0.5f64).exp());
            assert_abs_diff_eq!(s[(0, 0)], w, epsilon = 1e-14);
            assert_abs_diff_eq!(s[(0, 1)], 1.0 - w, epsilon = 1e-14);
            assert_abs_diff_eq!(s[(0, 0)], 0.622_459_331_201_854_6, epsilon = 1e-12);
        }
    }

    #[test]
    fn blocked_matvec_matches_nalgebra() {
        for n in [1, 3, 4, 5, 8, 13] {
            let s = DMatrix::from_fn(n, n, |i, k| ((i * 7 + k * 3) % 11) as f64 - 4.5);
            let r: Vec<f64> = (0..n).map(|i| 0.25 * i as f64 - 1.0).collect();
            let mut out = vec![f64::NAN; n];
            matvec(&s, &r, &mut out);
            let expect = &s * nalgebra::DVector::from_column_slice(&r);
            for (a, b) in out.iter().zip(expect.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn smooth_examples() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!(smooth(&id, &[1.0, -2.0, 3.0]).unwrap(), vec![1.0, -2.0, 3.0]);
        let s = build_smoother(&[0.0, 0.4, 1.3, 2.0], 0.5);
        for v in smooth(&s, &[2.5; 4]).unwrap() {
            assert_abs_diff_eq!(v, 2.5, epsilon = 1e-12);
        }
        let s = build_smoother(&[1.0, 1.0], 1.0);
        assert_eq!(smooth(&s, &[0.0, 2.0]).unwrap(), vec![1.0, 1.0]);
        assert!(matches!(smooth(&s, &[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn nadaraya_watson_interpolates() {
        let train = [0.0, 1.0, 2.0, 3.0];
        let values = [1.0, -2.0, 0.5, 4.0];
        let at = nadaraya_watson(&train, &values, 0.05, &train);
        for (a, b) in at.iter().zip(&values) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
        let flat = nadaraya_watson(&train, &[3.0; 4], 0.8, &[-1.0, 0.3, 10.0]);
        for v in flat {
            assert_abs_diff_eq!(v, 3.0, epsilon = 1e-12);
        }
        // Far outside the range: nearest training value, not NaN.
        let far = nadaraya_watson(&train, &values, 0.01, &[1e6]);
        assert_eq!(far, vec![4.0]);
    }

    proptest! {
        #[test]
        fn rows_are_stochastic(
            col in prop::collection::vec(-2.5f64..2.5, 2..40),
            h in 0.01f64..3.0,
        ) {
            let s = build_smoother(&col, h);
            for i in 0..col.len() {
                let sum: f64 = s.row(i).iter().sum();
                prop_assert!((sum - 1.0).abs() < 1e-10);
                prop_assert!(s.row(i).iter().all(|&w| w >= 0.0));
            }
            let ones = smooth(&s, &vec![1.0; col.len()]).unwrap();
            prop_assert!(ones.iter().all(|v| (v - 1.0).abs() < 1e-10));
        }

        #[test]
        fn reversal_conjugates_smoother(
            col in prop::collection::vec(-2.5f64..2.5, 2..30),
            h in 0.05f64..2.0,
        ) {
            let n = col.len();
            let s = build_smoother(&col, h);
            let rev: Vec<f64> = col.iter().rev().copied().collect();
            let sr = build_smoother(&rev, h);
            for i in 0..n {
                for k in 0..n {
                    prop_assert!((sr[(i, k)] - s[(n - 1 - i, n - 1 - k)]).abs() < 1e-14);
                }
            }
        }
    }
}
