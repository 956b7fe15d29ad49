use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::norm::center_in_place;
use crate::smoother::matvec;

/// Gauss–Seidel sweeps before falling back to a dense factorization.
const MAX_SWEEPS: usize = 1000;
pub(crate) const SWEEP_TOL: f64 = 1e-13;

/// `S_j v` followed by centering, i.e. the smoother restricted to
/// mean-zero functions.
pub(crate) fn smooth_centered(s: &DMatrix<f64>, v: &[f64], out: &mut [f64]) {
    matvec(s, v, out);
    center_in_place(out);
}

/// The within-group linear system for one group of `d` covariates.
///
/// Block row `j` of `Ĵ` has the identity in block column `j` and the
/// (centered) smoother `S_j` in every other block column; the right-hand
/// side stacks `S_j R_g` for `j` in the group.
#[derive(Debug, Clone)]
pub struct GroupBlockSystem<'a> {
    smoothers: Vec<&'a DMatrix<f64>>,
    rhs: Vec<Vec<f64>>,
}

impl<'a> GroupBlockSystem<'a> {
    pub fn new(smoothers: Vec<&'a DMatrix<f64>>, residual: &[f64]) -> Result<Self> {
        let n = residual.len();
        if smoothers.is_empty() {
            return Err(Error::InvalidGroups("empty group".into()));
        }
        if let Some(s) = smoothers.iter().find(|s| s.nrows() != n || s.ncols() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: s.nrows(),
            });
        }
        let rhs = smoothers
            .iter()
            .map(|s| {
                let mut out = vec![0.0; n];
                smooth_centered(s, residual, &mut out);
                out
            })
            .collect();
        Ok(Self { smoothers, rhs })
    }

    pub(crate) fn from_parts(smoothers: Vec<&'a DMatrix<f64>>, rhs: Vec<Vec<f64>>) -> Self {
        Self { smoothers, rhs }
    }

    pub fn d(&self) -> usize {
        self.smoothers.len()
    }

    pub fn n(&self) -> usize {
        self.rhs[0].len()
    }

    /// Stacked `Q̂ R̂_g`.
    pub fn rhs(&self) -> &[Vec<f64>] {
        &self.rhs
    }

    /// `(Ĵ + shift·I) f`.
    pub fn apply(&self, f: &[Vec<f64>], shift: f64) -> Vec<Vec<f64>> {
        let n = self.n();
        let mut others = vec![0.0; n];
        (0..self.d())
            .map(|j| {
                let mut out = vec![0.0; n];
                if self.d() > 1 {
                    self.sum_others(f, j, &mut others);
                    smooth_centered(self.smoothers[j], &others, &mut out);
                }
                out.iter_mut()
                    .zip(&f[j])
                    .for_each(|(o, v)| *o += (1.0 + shift) * v);
                out
            })
            .collect()
    }

    /// Explicit `(n·d) × (n·d)` matrix `Ĵ`.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let (n, d) = (self.n(), self.d());
        let mut j_hat = DMatrix::<f64>::identity(n * d, n * d);
        for (bj, s) in self.smoothers.iter().enumerate() {
            let col_means: Vec<f64> = (0..n).map(|k| s.column(k).sum() / n as f64).collect();
            for bk in (0..d).filter(|&bk| bk != bj) {
                for i in 0..n {
                    for k in 0..n {
                        j_hat[(bj * n + i, bk * n + k)] = s[(i, k)] - col_means[k];
                    }
                }
            }
        }
        j_hat
    }

    /// Solves `(Ĵ + shift·I) f = Q̂ R̂_g`, starting from `warm`.
    ///
    /// Block Gauss–Seidel (backfitting inside the group) is tried first;
    /// if it stalls or diverges the dense system is factorized instead.
    pub fn solve(&self, shift: f64, warm: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.solve_to(shift, warm, SWEEP_TOL)
    }

    /// [`solve`](Self::solve) with the Gauss–Seidel sweeps stopped once a
    /// sweep changes `f` by at most `tol` relative to its size.
    pub(crate) fn solve_to(&self, shift: f64, warm: &[Vec<f64>], tol: f64) -> Result<Vec<Vec<f64>>> {
        match self.gauss_seidel(shift, warm, tol.max(SWEEP_TOL)) {
            Some(f) => Ok(f),
            None => self.solve_dense(shift),
        }
    }

    pub fn solve_dense(&self, shift: f64) -> Result<Vec<Vec<f64>>> {
        let (n, d) = (self.n(), self.d());
        let mut a = self.to_dense();
        for i in 0..n * d {
            a[(i, i)] += shift;
        }
        let b = nalgebra::DVector::from_iterator(n * d, self.rhs.iter().flatten().copied());
        let x = a.lu().solve(&b).ok_or(Error::SingularSystem)?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem);
        }
        Ok(x.as_slice().chunks(n).map(<[f64]>::to_vec).collect())
    }

    fn gauss_seidel(&self, shift: f64, warm: &[Vec<f64>], tol: f64) -> Option<Vec<Vec<f64>>> {
        let n = self.n();
        let scale = 1.0 / (1.0 + shift);
        if self.d() == 1 {
            return Some(vec![self.rhs[0].iter().map(|v| v * scale).collect()]);
        }
        let mut f = warm.to_vec();
        let mut others = vec![0.0; n];
        let mut smoothed = vec![0.0; n];
        let mut first_delta = None;
        for _ in 0..MAX_SWEEPS {
            let mut delta2 = 0.0;
            for j in 0..self.d() {
                self.sum_others(&f, j, &mut others);
                smooth_centered(self.smoothers[j], &others, &mut smoothed);
                for i in 0..n {
                    let new = (self.rhs[j][i] - smoothed[i]) * scale;
                    delta2 += (new - f[j][i]).powi(2);
                    f[j][i] = new;
                }
            }
            let size2: f64 = f.iter().flatten().map(|v| v * v).sum();
            if !delta2.is_finite() || !size2.is_finite() {
                return None;
            }
            let first = *first_delta.get_or_insert(delta2);
            if delta2 > 1e12 * first.max(f64::MIN_POSITIVE) {
                return None;
            }
            if delta2 <= tol * tol * size2 || size2 == 0.0 {
                return Some(f);
            }
        }
        None
    }

    fn sum_others(&self, f: &[Vec<f64>], j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (k, fk) in f.iter().enumerate() {
            if k != j {
                out.iter_mut().zip(fk).for_each(|(o, v)| *o += v);
            }
        }
    }
}
