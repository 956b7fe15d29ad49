use nalgebra::DMatrix;

use super::block::smooth_centered;
use crate::norm::mean_square;

/// Outcome of the group-level thresholding test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdCheck {
    /// `ω̂_g = sqrt((1/n) Σ_{j∈g} ‖S_j R̂_g‖²)`.
    pub omega: f64,
    /// `ω̂_g ≤ λ√d_g`: the whole group is set to zero.
    pub is_zero: bool,
}

/// Decides whether a group of smoothers zeroes out on partial residual `residual`.
pub fn group_threshold_check(
    residual: &[f64],
    smoothers: &[&DMatrix<f64>],
    lambda: f64,
) -> ThresholdCheck {
    let n = residual.len();
    let mut buf = vec![0.0; n];
    let omega = smoothers
        .iter()
        .map(|s| {
            smooth_centered(s, residual, &mut buf);
            mean_square(&buf)
        })
        .sum::<f64>()
        .sqrt();
    threshold_from_omega(omega, smoothers.len(), lambda)
}

/// Compares in the `ω̂_g / √d_g ≤ λ` form so that `λ = max_g ω̂_g/√d_g`
/// zeroes the maximizing group exactly.
pub(crate) fn threshold_from_omega(omega: f64, d: usize, lambda: f64) -> ThresholdCheck {
    ThresholdCheck {
        omega,
        is_zero: omega / (d as f64).sqrt() <= lambda,
    }
}

pub(crate) fn omega_of(rhs: &[Vec<f64>]) -> f64 {
    rhs.iter().map(|b| mean_square(b)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smoother::build_smoother;

    #[test]
    fn zero_residual_is_zero() {
        let s = build_smoother(&[0.0, 0.5, 1.1, 2.0], 0.4);
        let c = group_threshold_check(&[0.0; 4], &[&s, &s], 1e-9);
        assert_eq!(c.omega, 0.0);
        assert!(c.is_zero);
    }

    #[test]
    fn zero_lambda_keeps_nonzero_signal() {
        let s = build_smoother(&[0.0, 0.5, 1.1, 2.0], 0.4);
        let c = group_threshold_check(&[1.0, -1.0, 2.0, -2.0], &[&s], 0.0);
        assert!(c.omega > 0.0);
        assert!(!c.is_zero);
    }

    #[test]
    fn singleton_reduces_to_smoothed_norm() {
        let x = [0.0, 0.3, 0.9, 1.4, 2.2];
        let r = [0.5, -1.0, 0.25, 1.5, -1.25];
        let s = build_smoother(&x, 0.5);
        let mut sr = vec![0.0; 5];
        smooth_centered(&s, &r, &mut sr);
        let norm = mean_square(&sr).sqrt();
        let c = group_threshold_check(&r, &[&s], norm);
        assert_eq!(c.omega, norm);
        assert!(c.is_zero);
        assert!(!group_threshold_check(&r, &[&s], norm * (1.0 - 1e-12)).is_zero);
    }
}
