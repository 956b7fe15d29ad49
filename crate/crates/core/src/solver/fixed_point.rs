use nalgebra::DMatrix;

use super::block::{GroupBlockSystem, SWEEP_TOL};
use super::threshold::omega_of;
use crate::error::{Error, Result};
use crate::model::SolverConfig;
use crate::norm::{center_in_place, mean_square};

/// Smallest relative change the group iteration aims for.
pub(crate) const POLISH_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointSolution {
    pub components: Vec<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
    /// Shift `λ√d/s` of the last linear solve, so that
    /// `(Ĵ + shift·I) components = Q̂ R̂_g` up to solver tolerance.
    pub shift: f64,
}

/// Solves the nonzero-group stationary condition
/// `Ĵ f + (λ√d / ‖f‖) f = Q̂ R̂_g` by iterating
/// `f ← (Ĵ + λ√d/‖f‖ · I)⁻¹ Q̂ R̂_g`.
///
/// The iteration is one-dimensional in the scalar `s = ‖f‖`: each step
/// solves the shifted system at the current `s`, and `s` is advanced by a
/// secant step on `φ(s) − s` (plain substitution `s ← φ(s)` when the secant
/// step is unusable). `init` must have nonzero group norm.
pub fn fixed_point_solve(
    residual: &[f64],
    smoothers: &[&DMatrix<f64>],
    lambda: f64,
    init: &[Vec<f64>],
    config: &SolverConfig,
) -> Result<FixedPointSolution> {
    let system = GroupBlockSystem::new(smoothers.to_vec(), residual)?;
    if init.len() != system.d() {
        return Err(Error::DimensionMismatch {
            expected: system.d(),
            got: init.len(),
        });
    }
    if let Some(c) = init.iter().find(|c| c.len() != residual.len()) {
        return Err(Error::DimensionMismatch {
            expected: residual.len(),
            got: c.len(),
        });
    }
    solve_system(&system, lambda, init, config, POLISH_TOL)
}

/// Soft-thresholded start `[1 − λ√d/ω̂]₊ S_j R̂_g`, exact when the
/// within-group cross-smoothing terms vanish.
pub fn soft_threshold_init(rhs: &[Vec<f64>], lambda: f64) -> Vec<Vec<f64>> {
    let kappa = lambda * (rhs.len() as f64).sqrt();
    let omega = omega_of(rhs);
    let factor = if omega > 0.0 { (1.0 - kappa / omega).max(0.0) } else { 0.0 };
    rhs.iter()
        .map(|b| b.iter().map(|v| factor * v).collect())
        .collect()
}

/// Solves one group. Iteration stops once the relative change drops to
/// `target` (floored at roundoff); `converged` reports whether it got
/// below `inner_tol` on the way.
pub(crate) fn solve_system(
    system: &GroupBlockSystem<'_>,
    lambda: f64,
    init: &[Vec<f64>],
    config: &SolverConfig,
    target: f64,
) -> Result<FixedPointSolution> {
    let kappa = lambda * (system.d() as f64).sqrt();
    let guard = config.zero_guard;

    if kappa == 0.0 {
        let mut f = system.solve(0.0, init)?;
        f.iter_mut().for_each(|c| center_in_place(c));
        return Ok(FixedPointSolution {
            components: f,
            iterations: 1,
            converged: true,
            shift: 0.0,
        });
    }

    let mut s = stacked_norm(init);
    if !(s >= guard) {
        return Err(Error::GroupNormCollapsed { guard });
    }
    if system.d() == 1 {
        // Ĵ = I, so ‖f‖ = ω̂ − κ and f = (1 − κ/ω̂) Q̂R̂ in closed form.
        let omega = omega_of(system.rhs());
        if !(omega - kappa >= guard) {
            return Err(Error::GroupNormCollapsed { guard });
        }
        let factor = 1.0 - kappa / omega;
        let mut f: Vec<f64> = system.rhs()[0].iter().map(|v| v * factor).collect();
        center_in_place(&mut f);
        return Ok(FixedPointSolution {
            components: vec![f],
            iterations: 1,
            converged: true,
            shift: kappa / (omega - kappa),
        });
    }

    let target = target.max(POLISH_TOL);
    let mut prev = init.to_vec();
    let mut history: Option<(f64, f64)> = None;
    let mut last_change = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut shift = kappa / s;

    // Linear solves only need to be a little more accurate than the current
    // step. Iterating past `inner_tol` keeps warm starts near the threshold
    // from stopping after one plain step.
    while iterations < config.inner_max_iter {
        iterations += 1;
        shift = kappa / s;
        let sweep_tol = (1e-2 * last_change).clamp(SWEEP_TOL, 1e-4);
        let next = system.solve_to(shift, &prev, sweep_tol)?;
        let phi = stacked_norm(&next);
        if !(phi >= guard) {
            return Err(Error::GroupNormCollapsed { guard });
        }
        let change = stacked_distance(&next, &prev) / stacked_norm(&prev).max(guard);
        prev = next;
        converged |= change <= config.inner_tol;
        if change <= target || (converged && change >= last_change) {
            break;
        }
        last_change = change;
        let gap = phi - s;
        let mut s_next = match history {
            Some((s_old, gap_old)) if gap != gap_old => s - gap * (s - s_old) / (gap - gap_old),
            _ => phi,
        };
        if !(s_next.is_finite() && s_next >= guard) {
            s_next = phi;
        }
        history = Some((s, gap));
        s = s_next;
    }

    prev.iter_mut().for_each(|c| center_in_place(c));
    Ok(FixedPointSolution {
        components: prev,
        iterations,
        converged,
        shift,
    })
}

/// Group norm `‖f_g‖ = sqrt(Σ_j (1/n)‖f_j‖²)`.
fn stacked_norm(f: &[Vec<f64>]) -> f64 {
    f.iter().map(|c| mean_square(c)).sum::<f64>().sqrt()
}

fn stacked_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let n = a[0].len() as f64;
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
        / n.sqrt()
}
