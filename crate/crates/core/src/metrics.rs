use crate::data::Dataset;
use crate::error::Result;
use crate::model::FittedModel;

#[derive(Debug, Clone, PartialEq)]
pub struct SupportMetrics {
    pub precision: f64,
    pub recall: f64,
    pub size: usize,
    pub per_covariate_selected: Vec<bool>,
}

/// Precision, recall and size of the estimated support against `true_support`.
///
/// An empty estimate has precision 1 when the truth is also empty and 0 otherwise.
pub fn support_metrics(model: &FittedModel, true_support: &[usize]) -> SupportMetrics {
    support_metrics_of(model.active_set(), true_support, model.p())
}

pub fn support_metrics_of(estimated: &[usize], true_support: &[usize], p: usize) -> SupportMetrics {
    let mut per_covariate_selected = vec![false; p];
    for &j in estimated {
        per_covariate_selected[j] = true;
    }
    let mut truth = true_support.to_vec();
    truth.sort_unstable();
    truth.dedup();
    let hits = truth.iter().filter(|&&j| per_covariate_selected[j]).count();
    let size = per_covariate_selected.iter().filter(|&&s| s).count();
    let precision = match (size, truth.len()) {
        (0, 0) => 1.0,
        (0, _) => 0.0,
        (s, _) => hits as f64 / s as f64,
    };
    let recall = if truth.is_empty() {
        1.0
    } else {
        hits as f64 / truth.len() as f64
    };
    SupportMetrics {
        precision,
        recall,
        size,
        per_covariate_selected,
    }
}

/// Mean squared prediction error on `test`.
pub fn test_mse(model: &FittedModel, test: &Dataset) -> Result<f64> {
    let pred = model.predict(test.x())?;
    Ok(pred
        .iter()
        .zip(test.y())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / test.n() as f64)
}
