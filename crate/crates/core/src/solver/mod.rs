//! Backfitting, SpAM and GroupSpAM fitting by block coordinate descent.
//!
//! All three share one outer loop: visit groups in input order, form the
//! partial residual `R̂_g = y_c − Σ_{j∉g} f̂_j`, update the group, and stop
//! once a full sweep moves no component by more than `outer_tol` in
//! empirical norm. Smoothing is done with the centered smoother
//! `(I − 11ᵀ/n) S_j`, so every update is mean-zero by construction.

mod block;
mod fixed_point;
mod threshold;

pub use block::GroupBlockSystem;
pub use fixed_point::{fixed_point_solve, soft_threshold_init, FixedPointSolution};
pub use threshold::{group_threshold_check, ThresholdCheck};

use nalgebra::DMatrix;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::groups::GroupStructure;
use crate::model::{active_set_of, group_norm_of, Diagnostics, FittedModel, SolverConfig};
use crate::norm::{center_in_place, mean_square};
use crate::smoother::{matvec, SmootherSet};
use block::smooth_centered;
use threshold::{omega_of, threshold_from_omega};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Plain backfitting, no penalty.
    Backfit,
    /// Componentwise soft-thresholding.
    Spam,
    /// Group-level thresholding with the within-group fixed-point solve.
    GroupSpam,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Backfit => "backfit",
            Algorithm::Spam => "spam",
            Algorithm::GroupSpam => "groupspam",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "backfit" => Ok(Algorithm::Backfit),
            "spam" => Ok(Algorithm::Spam),
            "groupspam" => Ok(Algorithm::GroupSpam),
            other => Err(Error::InvalidConfig(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// `y_centered − Σ_{j∉exclude} f̂_j`.
pub fn partial_residual(
    y_centered: &[f64],
    components: &[Vec<f64>],
    exclude: &[usize],
) -> Vec<f64> {
    let mut r = y_centered.to_vec();
    for (j, c) in components.iter().enumerate() {
        if !exclude.contains(&j) {
            r.iter_mut().zip(c).for_each(|(r, v)| *r -= v);
        }
    }
    r
}

pub fn fit_backfit(data: &Dataset, smoothers: &SmootherSet, config: &SolverConfig) -> Result<FittedModel> {
    fit(Algorithm::Backfit, data, None, smoothers, config, None)
}

pub fn fit_spam(data: &Dataset, smoothers: &SmootherSet, config: &SolverConfig) -> Result<FittedModel> {
    fit(Algorithm::Spam, data, None, smoothers, config, None)
}

/// GroupSpAM on a partition of the covariates.
pub fn fit_groupspam(
    data: &Dataset,
    groups: &GroupStructure,
    smoothers: &SmootherSet,
    config: &SolverConfig,
) -> Result<FittedModel> {
    fit(Algorithm::GroupSpam, data, Some(groups), smoothers, config, None)
}

/// Runs `algorithm`, optionally warm-started from `init` (one vector per covariate).
///
/// `groups` is only used by [`Algorithm::GroupSpam`]; the other two treat
/// every covariate as its own group.
pub fn fit(
    algorithm: Algorithm,
    data: &Dataset,
    groups: Option<&GroupStructure>,
    smoothers: &SmootherSet,
    config: &SolverConfig,
    init: Option<&[Vec<f64>]>,
) -> Result<FittedModel> {
    config.validate()?;
    let (n, p) = (data.n(), data.p());
    if smoothers.len() != p || smoothers.n() != n {
        return Err(Error::DimensionMismatch {
            expected: p,
            got: smoothers.len(),
        });
    }
    let groups = match (algorithm, groups) {
        (Algorithm::GroupSpam, Some(g)) => {
            if g.p() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: g.p(),
                });
            }
            g.require_partition()?;
            g.clone()
        }
        (Algorithm::GroupSpam, None) => {
            return Err(Error::InvalidGroups("groupspam needs a group structure".into()))
        }
        _ => GroupStructure::singletons(p),
    };

    let mut components = match init {
        Some(init) => {
            if init.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: init.len(),
                });
            }
            if let Some(c) = init.iter().find(|c| c.len() != n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: c.len(),
                });
            }
            init.to_vec()
        }
        None => vec![vec![0.0; n]; p],
    };

    let y_c = data.y_centered();
    let mut resid = partial_residual(&y_c, &components, &[]);
    let mut inputs = vec![vec![0.0; n]; p];
    let mut partial = vec![0.0; n];
    let mut converged = false;
    let mut sweeps = 0;
    let mut inner_failures = 0;
    let lambda = match algorithm {
        Algorithm::Backfit => 0.0,
        _ => config.lambda,
    };

    let mut last_change = f64::INFINITY;
    while sweeps < config.outer_max_iter {
        sweeps += 1;
        // Group solves need not be much more accurate than the outer sweep.
        let target = (1e-3 * last_change).clamp(fixed_point::POLISH_TOL, config.inner_tol);
        let mut max_change: f64 = 0.0;
        for group in groups.groups() {
            let members = &group.members;
            group_residual(&resid, &components, members, &mut partial);
            let mats: Vec<&DMatrix<f64>> = members.iter().map(|&j| smoothers.matrix(j)).collect();
            let update = match algorithm {
                Algorithm::Backfit => backfit_update(&partial, &mats),
                Algorithm::Spam => spam_update(&partial, &mats, lambda),
                Algorithm::GroupSpam => {
                    let old: Vec<Vec<f64>> = members.iter().map(|&j| components[j].clone()).collect();
                    let update = groupspam_update(&partial, &mats, &old, config, target)?;
                    inner_failures += usize::from(!update.inner_converged);
                    update
                }
            };
            resid.copy_from_slice(&partial);
            for ((&j, new), input) in members.iter().zip(update.components).zip(update.inputs) {
                let diff: f64 = components[j]
                    .iter()
                    .zip(&new)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    / n as f64;
                max_change = max_change.max(diff.sqrt());
                resid.iter_mut().zip(&new).for_each(|(r, v)| *r -= v);
                components[j] = new;
                inputs[j] = input;
            }
        }
        // Small steps alone can hide a group that is still far from its
        // optimality condition, so the optimality conditions are checked too.
        if max_change <= config.outer_tol
            && optimality_holds(&groups, &components, &resid, smoothers, lambda, config)
        {
            converged = true;
            break;
        }
        last_change = max_change;
    }

    let offsets = inputs
        .iter()
        .enumerate()
        .map(|(j, w)| {
            if w.iter().all(|&v| v == 0.0) {
                return 0.0;
            }
            let mut out = vec![0.0; n];
            matvec(smoothers.matrix(j), w, &mut out);
            out.iter().sum::<f64>() / n as f64
        })
        .collect();
    let objective = objective(&resid, &components, &groups, lambda);
    let active_set = active_set_of(&components);
    Ok(FittedModel {
        components,
        smoothing_inputs: inputs,
        offsets,
        y_mean: data.y_mean(),
        train_x: data.x().clone(),
        bandwidths: smoothers.bandwidths().to_vec(),
        lambda,
        active_set,
        groups,
        diagnostics: Diagnostics {
            converged,
            outer_iterations: sweeps,
            objective,
            inner_failures,
        },
    })
}

/// `resid + Σ_{j∈members} f̂_j` into `out`.
fn group_residual(resid: &[f64], components: &[Vec<f64>], members: &[usize], out: &mut [f64]) {
    out.copy_from_slice(resid);
    for &j in members {
        out.iter_mut().zip(&components[j]).for_each(|(r, v)| *r += v);
    }
}

fn centered_rhs(partial: &[f64], mats: &[&DMatrix<f64>]) -> Vec<Vec<f64>> {
    mats.iter()
        .map(|s| {
            let mut out = vec![0.0; partial.len()];
            smooth_centered(s, partial, &mut out);
            out
        })
        .collect()
}

/// Every zero group passes the threshold test on its partial residual, and
/// every nonzero group fails it and meets its stationary condition to
/// within `inner_tol`.
fn optimality_holds(
    groups: &GroupStructure,
    components: &[Vec<f64>],
    resid: &[f64],
    smoothers: &SmootherSet,
    lambda: f64,
    config: &SolverConfig,
) -> bool {
    let mut partial = vec![0.0; resid.len()];
    groups.groups().iter().all(|group| {
        let members = &group.members;
        group_residual(resid, components, members, &mut partial);
        let mats: Vec<&DMatrix<f64>> = members.iter().map(|&j| smoothers.matrix(j)).collect();
        let rhs = centered_rhs(&partial, &mats);
        let is_zero = threshold_from_omega(omega_of(&rhs), members.len(), lambda).is_zero;
        let norm = group_norm_of(components, members);
        if norm == 0.0 || is_zero {
            return norm == 0.0 && is_zero;
        }
        let f: Vec<Vec<f64>> = members.iter().map(|&j| components[j].clone()).collect();
        let kappa = lambda * (members.len() as f64).sqrt();
        let system = GroupBlockSystem::from_parts(mats, rhs);
        relative_violation(&system, &f, kappa / norm, config.zero_guard) <= config.inner_tol
    })
}

/// `‖(Ĵ + shift·I) f − Q̂ R̂_g‖ / ‖Q̂ R̂_g‖`.
fn relative_violation(system: &GroupBlockSystem<'_>, f: &[Vec<f64>], shift: f64, zero_guard: f64) -> f64 {
    let lhs = system.apply(f, shift);
    let violation: f64 = lhs
        .iter()
        .flatten()
        .zip(system.rhs().iter().flatten())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let scale: f64 = system.rhs().iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    violation / scale.max(zero_guard)
}

/// New components of one group and the scaled vectors their smoothers were
/// applied to.
struct GroupUpdate {
    components: Vec<Vec<f64>>,
    inputs: Vec<Vec<f64>>,
    inner_converged: bool,
}

impl GroupUpdate {
    fn zero(d: usize, n: usize) -> Self {
        Self {
            components: vec![vec![0.0; n]; d],
            inputs: vec![vec![0.0; n]; d],
            inner_converged: true,
        }
    }
}

fn backfit_update(partial: &[f64], mats: &[&DMatrix<f64>]) -> GroupUpdate {
    let mut f = vec![0.0; partial.len()];
    smooth_centered(mats[0], partial, &mut f);
    GroupUpdate {
        components: vec![f],
        inputs: vec![partial.to_vec()],
        inner_converged: true,
    }
}

fn spam_update(partial: &[f64], mats: &[&DMatrix<f64>], lambda: f64) -> GroupUpdate {
    let mut f = vec![0.0; partial.len()];
    smooth_centered(mats[0], partial, &mut f);
    let omega = mean_square(&f).sqrt();
    if threshold_from_omega(omega, 1, lambda).is_zero {
        return GroupUpdate::zero(1, partial.len());
    }
    let factor = 1.0 - lambda / omega;
    f.iter_mut().for_each(|v| *v *= factor);
    center_in_place(&mut f);
    GroupUpdate {
        components: vec![f],
        inputs: vec![partial.iter().map(|v| v * factor).collect()],
        inner_converged: true,
    }
}

fn groupspam_update(
    partial: &[f64],
    mats: &[&DMatrix<f64>],
    old: &[Vec<f64>],
    config: &SolverConfig,
    target: f64,
) -> Result<GroupUpdate> {
    let n = partial.len();
    let rhs = centered_rhs(partial, mats);
    let check = threshold_from_omega(omega_of(&rhs), mats.len(), config.lambda);
    if check.is_zero {
        return Ok(GroupUpdate::zero(mats.len(), n));
    }
    let system = GroupBlockSystem::from_parts(mats.to_vec(), rhs);
    let warm_is_zero = old.iter().all(|c| c.iter().all(|&v| v == 0.0));
    let init = if warm_is_zero && config.lambda > 0.0 {
        soft_threshold_init(system.rhs(), config.lambda)
    } else {
        old.to_vec()
    };
    let sol = fixed_point::solve_system(&system, config.lambda, &init, config, target)?;
    // Block row j reads f_j = S̃_j (R̂_g − Σ_{k≠j} f_k) / (1 + shift).
    let scale = 1.0 / (1.0 + sol.shift);
    let total: Vec<f64> = (0..n).map(|i| sol.components.iter().map(|c| c[i]).sum()).collect();
    let inputs = sol
        .components
        .iter()
        .map(|fj| {
            (0..n)
                .map(|i| (partial[i] - (total[i] - fj[i])) * scale)
                .collect()
        })
        .collect();
    Ok(GroupUpdate {
        components: sol.components,
        inputs,
        inner_converged: sol.converged,
    })
}

/// `(1/2n)‖r‖² + λ Σ_g √d_g ‖f_g‖`, tracked as a diagnostic only.
pub fn objective(resid: &[f64], components: &[Vec<f64>], groups: &GroupStructure, lambda: f64) -> f64 {
    let penalty: f64 = groups
        .groups()
        .iter()
        .map(|g| (g.members.len() as f64).sqrt() * group_norm_of(components, &g.members))
        .sum();
    0.5 * mean_square(resid) + lambda * penalty
}

/// Objective of `model` on its training data.
pub fn model_objective(model: &FittedModel, data: &Dataset) -> f64 {
    let resid = partial_residual(&data.y_centered(), model.components(), &[]);
    objective(&resid, model.components(), model.groups(), model.lambda())
}

/// Final partial residual of group `group` in `model`.
pub fn group_partial_residual(model: &FittedModel, data: &Dataset, group: usize) -> Vec<f64> {
    let members = &model.groups().groups()[group].members;
    partial_residual(&data.y_centered(), model.components(), members)
}

/// Threshold test for group `group` of `model` on its final partial residual.
pub fn model_threshold_check(
    model: &FittedModel,
    data: &Dataset,
    smoothers: &SmootherSet,
    group: usize,
) -> ThresholdCheck {
    let members = &model.groups().groups()[group].members;
    let r = group_partial_residual(model, data, group);
    let mats: Vec<&DMatrix<f64>> = members.iter().map(|&j| smoothers.matrix(j)).collect();
    group_threshold_check(&r, &mats, model.lambda())
}

/// Relative violation of the nonzero-group stationary condition
/// `‖Ĵ f̂_g + (λ√d_g/‖f̂_g‖) f̂_g − Q̂ R̂_g‖ / ‖Q̂ R̂_g‖` at the fitted model.
pub fn stationarity_residual(
    model: &FittedModel,
    data: &Dataset,
    smoothers: &SmootherSet,
    group: usize,
    lambda: f64,
    zero_guard: f64,
) -> Result<f64> {
    let members = &model.groups().groups()[group].members;
    let f: Vec<Vec<f64>> = members.iter().map(|&j| model.component(j).to_vec()).collect();
    let norm = group_norm_of(model.components(), members);
    if norm == 0.0 {
        return Err(Error::ZeroGroup(group));
    }
    let r = group_partial_residual(model, data, group);
    let mats: Vec<&DMatrix<f64>> = members.iter().map(|&j| smoothers.matrix(j)).collect();
    let system = GroupBlockSystem::new(mats, &r)?;
    let kappa = lambda * (members.len() as f64).sqrt();
    Ok(relative_violation(&system, &f, kappa / norm, zero_guard))
}
