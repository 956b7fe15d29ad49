//! Empirical norms and centering.
//!
//! All norms use the `1/n` convention: `‖v‖ = sqrt(mean(v²))`.

use crate::error::{Error, Result};

/// Empirical L2 norm `sqrt((1/n) Σ v_i²)`.
pub fn empirical_norm(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::EmptyVector);
    }
    Ok(mean_square(v).sqrt())
}

/// Norm of a group of components, `sqrt(Σ_j ‖f_j‖²)`.
pub fn group_norm<V: AsRef<[f64]>>(components: &[V]) -> Result<f64> {
    let first = components.first().ok_or(Error::EmptyVector)?;
    let n = first.as_ref().len();
    if n == 0 {
        return Err(Error::EmptyVector);
    }
    let mut acc = 0.0;
    for c in components {
        let c = c.as_ref();
        if c.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: c.len(),
            });
        }
        acc += mean_square(c);
    }
    Ok(acc.sqrt())
}

pub fn mean(v: &[f64]) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::EmptyVector);
    }
    Ok(v.iter().sum::<f64>() / v.len() as f64)
}

/// Returns `v - mean(v)`.
pub fn center(v: &[f64]) -> Result<Vec<f64>> {
    let m = mean(v)?;
    Ok(v.iter().map(|x| x - m).collect())
}

pub(crate) fn center_in_place(v: &mut [f64]) {
    if v.is_empty() {
        return;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

pub(crate) fn mean_square(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn empirical_norm_examples() {
        assert_eq!(empirical_norm(&[0.0; 5]).unwrap(), 0.0);
        assert_eq!(empirical_norm(&[2.0; 4]).unwrap(), 2.0);
        assert_abs_diff_eq!(
            empirical_norm(&[3.0, 4.0]).unwrap(),
            3.535_533_905_932_737_6,
            epsilon = 1e-12
        );
        assert_eq!(empirical_norm(&[]), Err(Error::EmptyVector));
    }

    #[test]
    fn group_norm_examples() {
        let v = vec![1.0, -2.0, 0.5];
        assert_eq!(group_norm(std::slice::from_ref(&v)).unwrap(), empirical_norm(&v).unwrap());
        assert_abs_diff_eq!(
            group_norm(&[v.clone(), v.clone()]).unwrap(),
            2f64.sqrt() * empirical_norm(&v).unwrap(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            group_norm(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap(),
            5f64.sqrt(),
            epsilon = 1e-12
        );
        assert!(matches!(
            group_norm(&[vec![1.0, 1.0], vec![2.0]]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn center_examples() {
        assert_eq!(center(&[1.0, 2.0, 3.0]).unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(center(&[-1.0, 0.0, 1.0]).unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(center(&[5.0, 5.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(center(&[]), Err(Error::EmptyVector));
    }

    proptest! {
        #[test]
        fn center_is_idempotent(v in prop::collection::vec(-1e3f64..1e3, 1..40)) {
            let once = center(&v).unwrap();
            let twice = center(&once).unwrap();
            for (a, b) in once.iter().zip(&twice) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
            prop_assert!(mean(&once).unwrap().abs() <= 1e-10);
        }

        #[test]
        fn group_norm_permutation_invariant(
            parts in prop::collection::vec(prop::collection::vec(-10f64..10.0, 6), 1..5),
        ) {
            let forward = group_norm(&parts).unwrap();
            let mut reversed = parts.clone();
            reversed.reverse();
            prop_assert!((forward - group_norm(&reversed).unwrap()).abs() <= 1e-12);
        }
    }
}
