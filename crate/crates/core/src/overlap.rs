//! Overlapping groups via latent copies.
//!
//! Each covariate is duplicated once per group containing it. The copies of
//! one group form a block, so the expanded problem has a partition and the
//! ordinary GroupSpAM solver applies. Collapsing sums a covariate's latent
//! components back into one function; the resulting support is a union of
//! groups.

use nalgebra::DMatrix;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::groups::{Group, GroupStructure};
use crate::model::{group_norm_of, FittedModel, SolverConfig};
use crate::smoother::SmootherSet;
use crate::solver;

/// Source of one expanded column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatentColumn {
    pub covariate: usize,
    pub group: usize,
}

#[derive(Debug, Clone)]
pub struct OverlapExpansion {
    pub expanded_dataset: Dataset,
    pub expanded_groups: GroupStructure,
    pub column_map: Vec<LatentColumn>,
    pub original_groups: GroupStructure,
}

pub fn expand_overlap(data: &Dataset, groups: &GroupStructure) -> Result<OverlapExpansion> {
    if groups.p() != data.p() {
        return Err(Error::DimensionMismatch {
            expected: data.p(),
            got: groups.p(),
        });
    }
    let n = data.n();
    let mut column_map = Vec::new();
    let mut expanded = Vec::with_capacity(groups.len());
    for (gi, g) in groups.groups().iter().enumerate() {
        let start = column_map.len();
        column_map.extend(g.members.iter().map(|&j| LatentColumn {
            covariate: j,
            group: gi,
        }));
        expanded.push(Group {
            name: g.name.clone(),
            members: (start..column_map.len()).collect(),
        });
    }
    let total = column_map.len();
    let x = DMatrix::from_iterator(
        n,
        total,
        column_map.iter().flat_map(|c| data.column(c.covariate).iter().copied()),
    );
    let names = column_map
        .iter()
        .map(|c| format!("x{}@{}", c.covariate + 1, groups.groups()[c.group].name))
        .collect();
    Ok(OverlapExpansion {
        expanded_dataset: Dataset::with_names(x, data.y().to_vec(), Some(names))?,
        expanded_groups: GroupStructure::new(expanded, total)?,
        column_map,
        original_groups: groups.clone(),
    })
}

impl OverlapExpansion {
    /// Smoothers for the expanded columns, sharing the original matrices.
    pub fn smoothers(&self, original: &SmootherSet) -> SmootherSet {
        let source: Vec<usize> = self.column_map.iter().map(|c| c.covariate).collect();
        original.select(&source)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatentComponent {
    pub covariate: usize,
    pub group: usize,
    pub values: Vec<f64>,
}

/// Per-covariate model recovered from a fit on the expansion, plus the
/// latent decomposition it came from.
#[derive(Debug, Clone)]
pub struct CollapsedModel {
    pub model: FittedModel,
    pub latent: Vec<LatentComponent>,
    /// Indices (into the original groups) of groups with a nonzero latent block.
    pub active_groups: Vec<usize>,
}

/// Sums latent components per original covariate.
pub fn collapse_latent(expanded_model: &FittedModel, expansion: &OverlapExpansion) -> Result<CollapsedModel> {
    let map = &expansion.column_map;
    if expanded_model.p() != map.len() {
        return Err(Error::DimensionMismatch {
            expected: map.len(),
            got: expanded_model.p(),
        });
    }
    let groups = &expansion.original_groups;
    let p = groups.p();
    let n = expanded_model.n();
    if map.iter().any(|c| c.covariate >= p || c.group >= groups.len()) {
        return Err(Error::InvalidGroups("column map refers outside the original groups".into()));
    }

    // Copies share one smoother, so summing smoothing inputs and offsets
    // sums their predictions as well.
    let mut components = vec![vec![0.0; n]; p];
    let mut inputs = vec![vec![0.0; n]; p];
    let mut offsets = vec![0.0; p];
    let mut first_copy = vec![None; p];
    for (k, c) in map.iter().enumerate() {
        let j = c.covariate;
        components[j]
            .iter_mut()
            .zip(expanded_model.component(k))
            .for_each(|(a, b)| *a += b);
        inputs[j]
            .iter_mut()
            .zip(expanded_model.smoothing_input(k))
            .for_each(|(a, b)| *a += b);
        offsets[j] += expanded_model.offsets()[k];
        first_copy[j].get_or_insert(k);
    }
    let first_copy: Vec<usize> = first_copy
        .into_iter()
        .map(|k| k.ok_or_else(|| Error::InvalidGroups("covariate without a latent copy".into())))
        .collect::<Result<_>>()?;

    let active_groups: Vec<usize> = expansion
        .expanded_groups
        .groups()
        .iter()
        .enumerate()
        .filter(|(_, g)| group_norm_of(expanded_model.components(), &g.members) > 0.0)
        .map(|(gi, _)| gi)
        .collect();
    let mut active_set: Vec<usize> = active_groups
        .iter()
        .flat_map(|&gi| groups.groups()[gi].members.iter().copied())
        .collect();
    active_set.sort_unstable();
    active_set.dedup();

    let train_x = DMatrix::from_iterator(
        n,
        p,
        first_copy.iter().flat_map(|&k| expanded_model.train_column(k).iter().copied()),
    );
    let model = FittedModel {
        components,
        smoothing_inputs: inputs,
        offsets,
        y_mean: expanded_model.y_mean(),
        train_x,
        bandwidths: first_copy.iter().map(|&k| expanded_model.bandwidths()[k]).collect(),
        lambda: expanded_model.lambda(),
        active_set,
        groups: groups.clone(),
        diagnostics: *expanded_model.diagnostics(),
    };
    let latent = map
        .iter()
        .enumerate()
        .map(|(k, c)| LatentComponent {
            covariate: c.covariate,
            group: c.group,
            values: expanded_model.component(k).to_vec(),
        })
        .collect();
    Ok(CollapsedModel {
        model,
        latent,
        active_groups,
    })
}

/// GroupSpAM with possibly overlapping groups: expand, fit, collapse.
pub fn fit_groupspam_overlap(
    data: &Dataset,
    groups: &GroupStructure,
    smoothers: &SmootherSet,
    config: &SolverConfig,
) -> Result<(CollapsedModel, FittedModel, OverlapExpansion)> {
    let expansion = expand_overlap(data, groups)?;
    let expanded_smoothers = expansion.smoothers(smoothers);
    let expanded_model = solver::fit_groupspam(
        &expansion.expanded_dataset,
        &expansion.expanded_groups,
        &expanded_smoothers,
        config,
    )?;
    let collapsed = collapse_latent(&expanded_model, &expansion)?;
    Ok((collapsed, expanded_model, expansion))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Diagnostics, ModelParts};

    fn toy(p: usize) -> Dataset {
        let cols: Vec<Vec<f64>> = (0..p)
            .map(|j| (0..6).map(|i| ((i * (j + 2)) % 7) as f64 * 0.3 - 1.0).collect())
            .collect();
        Dataset::from_columns(&cols, (0..6).map(|i| i as f64).collect()).unwrap()
    }

    fn group(name: &str, members: &[usize]) -> Group {
        Group {
            name: name.into(),
            members: members.to_vec(),
        }
    }

    #[test]
    fn overlapping_pair_expands_to_four_columns() {
        let data = toy(3);
        let groups = GroupStructure::new(vec![group("a", &[0, 1]), group("b", &[1, 2])], 3).unwrap();
        let exp = expand_overlap(&data, &groups).unwrap();
        assert_eq!(exp.expanded_dataset.p(), 4);
        assert!(exp.expanded_groups.is_partition());
        let copies: Vec<usize> = exp.column_map.iter().map(|c| c.covariate).collect();
        assert_eq!(copies, vec![0, 1, 1, 2]);
        for (k, c) in exp.column_map.iter().enumerate() {
            assert_eq!(exp.expanded_dataset.column(k), data.column(c.covariate));
        }
        let sm = SmootherSet::from_dataset(&data).unwrap();
        let esm = exp.smoothers(&sm);
        assert!(esm.shares_storage(1, 2));
    }

    #[test]
    fn partition_and_single_group_expansions() {
        let data = toy(4);
        let part = GroupStructure::new(vec![group("a", &[0, 1]), group("b", &[2, 3])], 4).unwrap();
        let exp = expand_overlap(&data, &part).unwrap();
        assert_eq!(exp.expanded_dataset.x(), data.x());
        let one = GroupStructure::new(vec![group("all", &[0, 1, 2, 3])], 4).unwrap();
        let exp = expand_overlap(&data, &one).unwrap();
        assert_eq!(exp.expanded_dataset.p(), 4);
        assert_eq!(exp.expanded_groups.len(), 1);
    }

    fn expanded_model(exp: &OverlapExpansion, comps: Vec<Vec<f64>>) -> FittedModel {
        let p = exp.expanded_dataset.p();
        FittedModel::from_parts(ModelParts {
            smoothing_inputs: comps.clone(),
            components: comps,
            offsets: vec![0.0; p],
            y_mean: 0.0,
            train_x: exp.expanded_dataset.x().clone(),
            bandwidths: vec![0.5; p],
            lambda: 0.1,
            groups: exp.expanded_groups.clone(),
            diagnostics: Diagnostics {
                converged: true,
                outer_iterations: 1,
                objective: 0.0,
                inner_failures: 0,
            },
        })
        .unwrap()
    }

    #[test]
    fn collapse_sums_latent_copies() {
        let data = toy(3);
        let groups = GroupStructure::new(vec![group("a", &[0, 1]), group("b", &[1, 2])], 3).unwrap();
        let exp = expand_overlap(&data, &groups).unwrap();

        let zero = expanded_model(&exp, vec![vec![0.0; 6]; 4]);
        let c = collapse_latent(&zero, &exp).unwrap();
        assert!(c.model.components().iter().flatten().all(|&v| v == 0.0));
        assert!(c.model.active_set().is_empty());

        // Group "a" zeroed: covariate 1 equals its copy in "b" exactly.
        let h = vec![0.5, -0.25, 1.0, -1.0, 0.125, -0.375];
        let m = expanded_model(&exp, vec![vec![0.0; 6], vec![0.0; 6], h.clone(), h.clone()]);
        let c = collapse_latent(&m, &exp).unwrap();
        assert_eq!(c.model.component(1), h.as_slice());
        assert_eq!(c.active_groups, vec![1]);
        assert_eq!(c.model.active_set(), &[1, 2]);

        let wrong = expanded_model(
            &expand_overlap(&data, &GroupStructure::singletons(3)).unwrap(),
            vec![vec![0.0; 6]; 3],
        );
        assert!(collapse_latent(&wrong, &exp).is_err());
    }
}
