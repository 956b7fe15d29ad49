//! Regularization path with warm starts and validation-set selection of λ.

use nalgebra::DMatrix;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::groups::GroupStructure;
use crate::metrics::test_mse;
use crate::model::{FittedModel, SolverConfig};
use crate::smoother::SmootherSet;
use crate::solver::{self, group_threshold_check, Algorithm};

/// Smallest λ at which the all-zero model passes every group's threshold test:
/// `max_g ω̂_g(y_c) / √d_g`.
pub fn lambda_max(data: &Dataset, groups: &GroupStructure, smoothers: &SmootherSet) -> f64 {
    let y_c = data.y_centered();
    groups
        .groups()
        .iter()
        .map(|g| {
            let mats: Vec<&DMatrix<f64>> = g.members.iter().map(|&j| smoothers.matrix(j)).collect();
            group_threshold_check(&y_c, &mats, 0.0).omega / (g.members.len() as f64).sqrt()
        })
        .fold(0.0, f64::max)
}

/// `count` log-spaced values from `lambda_max` down to `ratio · lambda_max`.
pub fn lambda_grid(lambda_max: f64, count: usize, ratio: f64) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::InvalidGrid(format!("count must be at least 2, got {count}")));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidGrid(format!("ratio must lie in (0, 1), got {ratio}")));
    }
    if !(lambda_max >= 0.0 && lambda_max.is_finite()) {
        return Err(Error::InvalidGrid(format!("lambda_max must be finite and nonnegative, got {lambda_max}")));
    }
    let step = ratio.ln() / (count - 1) as f64;
    Ok((0..count)
        .map(|k| match k {
            0 => lambda_max,
            k if k == count - 1 => ratio * lambda_max,
            k => lambda_max * (step * k as f64).exp(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    /// Log-spaced from λ_max over `count` points down to `ratio · λ_max`.
    Geometric { count: usize, ratio: f64 },
    /// Caller-supplied decreasing values.
    Explicit(Vec<f64>),
}

impl Default for Grid {
    fn default() -> Self {
        Grid::Geometric {
            count: 30,
            ratio: 0.01,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PathResult {
    pub lambdas: Vec<f64>,
    pub models: Vec<FittedModel>,
    pub validation_mse: Vec<f64>,
    pub selected_index: usize,
}

impl PathResult {
    pub fn selected(&self) -> &FittedModel {
        &self.models[self.selected_index]
    }
}

/// Fits `algorithm` along a decreasing λ grid on `train`, warm-starting each
/// fit from the previous one, and selects the λ with the lowest validation MSE.
pub fn fit_path(
    train: &Dataset,
    validation: &Dataset,
    groups: &GroupStructure,
    grid: &Grid,
    algorithm: Algorithm,
    config: &SolverConfig,
) -> Result<PathResult> {
    if validation.p() != train.p() {
        return Err(Error::DimensionMismatch {
            expected: train.p(),
            got: validation.p(),
        });
    }
    let smoothers = SmootherSet::from_dataset(train)?;
    fit_path_with(train, validation, groups, &smoothers, grid, algorithm, config)
}

pub fn fit_path_with(
    train: &Dataset,
    validation: &Dataset,
    groups: &GroupStructure,
    smoothers: &SmootherSet,
    grid: &Grid,
    algorithm: Algorithm,
    config: &SolverConfig,
) -> Result<PathResult> {
    let threshold_groups = match algorithm {
        Algorithm::GroupSpam => groups.clone(),
        _ => GroupStructure::singletons(train.p()),
    };
    let lambdas = match grid {
        Grid::Geometric { count, ratio } => {
            lambda_grid(lambda_max(train, &threshold_groups, smoothers), *count, *ratio)?
        }
        Grid::Explicit(values) => {
            if values.is_empty() || values.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
                return Err(Error::InvalidGrid("explicit grid needs finite nonnegative values".into()));
            }
            values.clone()
        }
    };

    let mut models: Vec<FittedModel> = Vec::with_capacity(lambdas.len());
    let mut validation_mse = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let cfg = SolverConfig { lambda, ..*config };
        let warm = models.last().map(|m| m.components());
        let model = solver::fit(algorithm, train, Some(groups), smoothers, &cfg, warm)
            .map_err(|e| Error::PathFit {
                lambda,
                source: Box::new(e),
            })?;
        validation_mse.push(test_mse(&model, validation)?);
        models.push(model);
    }
    let selected_index = select_index(&validation_mse);
    Ok(PathResult {
        lambdas,
        models,
        validation_mse,
        selected_index,
    })
}

/// Index of the smallest value; ties go to the earliest (largest λ). NaN never wins.
fn select_index(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] || values[best].is_nan() && !v.is_nan() {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_examples() {
        assert_eq!(lambda_grid(2.0, 2, 0.25).unwrap(), vec![2.0, 0.5]);
        let g = lambda_grid(1.0, 3, 0.01).unwrap();
        assert_eq!(g[0], 1.0);
        assert_relative_eq!(g[1], 0.1, max_relative = 1e-14);
        assert_eq!(g[2], 0.01);
        assert_eq!(lambda_grid(0.0, 4, 0.1).unwrap(), vec![0.0; 4]);
        assert!(lambda_grid(1.0, 1, 0.1).is_err());
        assert!(lambda_grid(1.0, 5, 1.0).is_err());
        assert!(lambda_grid(1.0, 5, 0.0).is_err());
    }

    #[test]
    fn grid_is_strictly_decreasing() {
        let g = lambda_grid(3.7, 30, 0.01).unwrap();
        assert_eq!(g.len(), 30);
        assert!(g.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn selection_prefers_larger_lambda_on_ties() {
        assert_eq!(select_index(&[3.0, 1.0, 1.0, 2.0]), 1);
        assert_eq!(select_index(&[f64::NAN, 2.0, 2.0]), 1);
        assert_eq!(select_index(&[1.0, f64::NAN]), 0);
    }
}
