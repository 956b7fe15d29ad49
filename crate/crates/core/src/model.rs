use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::groups::GroupStructure;
use crate::norm;
use crate::smoother;

/// Tolerances, iteration caps and the penalty level for one fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub lambda: f64,
    /// Outer sweeps stop once every component moves by at most this much (empirical norm).
    pub outer_tol: f64,
    pub outer_max_iter: usize,
    /// Relative change threshold for the group fixed-point iteration.
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    /// Floor below which a group norm counts as zero.
    pub zero_guard: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            outer_tol: 1e-4,
            outer_max_iter: 100,
            inner_tol: 1e-6,
            inner_max_iter: 100,
            zero_guard: 1e-12,
        }
    }
}

impl SolverConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be finite and nonnegative, got {}",
                self.lambda
            )));
        }
        for (name, v) in [
            ("outer_tol", self.outer_tol),
            ("inner_tol", self.inner_tol),
            ("zero_guard", self.zero_guard),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.outer_max_iter == 0 || self.inner_max_iter == 0 {
            return Err(Error::InvalidConfig("iteration caps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub converged: bool,
    pub outer_iterations: usize,
    /// `(1/2n)‖y_c − Σ f_j‖² + λ Σ_g √d_g ‖f_g‖` after the last sweep.
    pub objective: f64,
    /// Group solves whose fixed-point iteration hit `inner_max_iter`.
    pub inner_failures: usize,
}

/// Everything needed to rebuild a [`FittedModel`], e.g. after loading it from disk.
///
/// `smoothing_inputs[j]` is the vector the final smoother of covariate `j`
/// was applied to, already scaled by the shrinkage factor, and `offsets[j]`
/// the mean that centering removed. Together they give
/// `f̂_j(x) = ℓ_j(x)ᵀ smoothing_inputs[j] − offsets[j]`, where `ℓ_j(x)` is the
/// normalized kernel weight vector of `x` against the training column.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParts {
    pub components: Vec<Vec<f64>>,
    pub smoothing_inputs: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
    pub y_mean: f64,
    pub train_x: DMatrix<f64>,
    pub bandwidths: Vec<f64>,
    pub lambda: f64,
    pub groups: GroupStructure,
    pub diagnostics: Diagnostics,
}

/// Fitted additive model: per-covariate evaluations at the training points
/// plus what prediction needs.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub(crate) components: Vec<Vec<f64>>,
    pub(crate) smoothing_inputs: Vec<Vec<f64>>,
    pub(crate) offsets: Vec<f64>,
    pub(crate) y_mean: f64,
    pub(crate) train_x: DMatrix<f64>,
    pub(crate) bandwidths: Vec<f64>,
    pub(crate) lambda: f64,
    pub(crate) active_set: Vec<usize>,
    pub(crate) groups: GroupStructure,
    pub(crate) diagnostics: Diagnostics,
}

impl FittedModel {
    /// Assembles a model from stored parts. The active set is recomputed
    /// from the components.
    pub fn from_parts(parts: ModelParts) -> Result<Self> {
        let ModelParts {
            components,
            smoothing_inputs,
            offsets,
            y_mean,
            train_x,
            bandwidths,
            lambda,
            groups,
            diagnostics,
        } = parts;
        let (n, p) = train_x.shape();
        for len in [
            components.len(),
            smoothing_inputs.len(),
            offsets.len(),
            bandwidths.len(),
            groups.p(),
        ] {
            if len != p {
                return Err(Error::DimensionMismatch { expected: p, got: len });
            }
        }
        if let Some(c) = components.iter().chain(&smoothing_inputs).find(|c| c.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: c.len(),
            });
        }
        if let Some(h) = bandwidths.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidConfig(format!("bandwidth must be positive, got {h}")));
        }
        let active_set = active_set_of(&components);
        Ok(Self {
            components,
            smoothing_inputs,
            offsets,
            y_mean,
            train_x,
            bandwidths,
            lambda,
            active_set,
            groups,
            diagnostics,
        })
    }

    pub fn into_parts(self) -> ModelParts {
        ModelParts {
            components: self.components,
            smoothing_inputs: self.smoothing_inputs,
            offsets: self.offsets,
            y_mean: self.y_mean,
            train_x: self.train_x,
            bandwidths: self.bandwidths,
            lambda: self.lambda,
            groups: self.groups,
            diagnostics: self.diagnostics,
        }
    }

    pub fn n(&self) -> usize {
        self.train_x.nrows()
    }

    pub fn p(&self) -> usize {
        self.train_x.ncols()
    }

    /// Fitted values `f̂_j(x_ij)` of component `j` at the training points.
    pub fn component(&self, j: usize) -> &[f64] {
        &self.components[j]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    /// Scaled input of the final smoothing step of component `j`.
    pub fn smoothing_input(&self, j: usize) -> &[f64] {
        &self.smoothing_inputs[j]
    }

    pub fn smoothing_inputs(&self) -> &[Vec<f64>] {
        &self.smoothing_inputs
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    pub fn train_x(&self) -> &DMatrix<f64> {
        &self.train_x
    }

    pub fn train_column(&self, j: usize) -> &[f64] {
        let n = self.n();
        &self.train_x.as_slice()[j * n..(j + 1) * n]
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Sorted indices of covariates with a nonzero component.
    pub fn active_set(&self) -> &[usize] {
        &self.active_set
    }

    pub fn groups(&self) -> &GroupStructure {
        &self.groups
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    pub fn is_active(&self, j: usize) -> bool {
        self.active_set.binary_search(&j).is_ok()
    }

    /// Fitted values at the training points, `ȳ + Σ_j f̂_j`.
    pub fn fitted_values(&self) -> Vec<f64> {
        let mut out = vec![self.y_mean; self.n()];
        for &j in &self.active_set {
            for (o, v) in out.iter_mut().zip(&self.components[j]) {
                *o += v;
            }
        }
        out
    }

    /// Evaluates component `j` at new points by applying the smoother row of
    /// each query point to the stored smoothing input, with the training
    /// bandwidth. At a training point this reproduces the fitted value.
    pub fn predict_component(&self, j: usize, x_new: &[f64]) -> Result<Vec<f64>> {
        if j >= self.p() {
            return Err(Error::IndexOutOfRange {
                index: j,
                p: self.p(),
            });
        }
        if !self.is_active(j) {
            return Ok(vec![0.0; x_new.len()]);
        }
        let mut out = smoother::nadaraya_watson(
            self.train_column(j),
            &self.smoothing_inputs[j],
            self.bandwidths[j],
            x_new,
        );
        out.iter_mut().for_each(|v| *v -= self.offsets[j]);
        Ok(out)
    }

    /// Predicts the response for each row of `x_new`.
    pub fn predict(&self, x_new: &DMatrix<f64>) -> Result<Vec<f64>> {
        if x_new.ncols() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                got: x_new.ncols(),
            });
        }
        let m = x_new.nrows();
        let mut out = vec![self.y_mean; m];
        for &j in &self.active_set {
            let col = &x_new.as_slice()[j * m..(j + 1) * m];
            let fj = self.predict_component(j, col)?;
            out.iter_mut().zip(&fj).for_each(|(o, v)| *o += v);
        }
        Ok(out)
    }
}

pub(crate) fn active_set_of(components: &[Vec<f64>]) -> Vec<usize> {
    components
        .iter()
        .enumerate()
        .filter(|(_, c)| c.iter().any(|&v| v != 0.0))
        .map(|(j, _)| j)
        .collect()
}

pub(crate) fn group_norm_of(components: &[Vec<f64>], members: &[usize]) -> f64 {
    members
        .iter()
        .map(|&j| norm::mean_square(&components[j]))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        assert!(SolverConfig::with_lambda(-1.0).validate().is_err());
        assert!(SolverConfig::with_lambda(f64::NAN).validate().is_err());
        let bad = SolverConfig {
            inner_tol: 0.0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            outer_max_iter: 0,
            ..SolverConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn active_set_is_exact_nonzero() {
        let comps = vec![vec![0.0, 0.0], vec![1e-300, -1e-300], vec![0.0, -0.0]];
        assert_eq!(active_set_of(&comps), vec![1]);
    }
}
