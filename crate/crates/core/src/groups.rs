use std::collections::BTreeSet;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub name: String,
    /// Zero-based covariate indices, in the order given.
    pub members: Vec<usize>,
}

/// Named groups of covariates over `p` covariates.
///
/// Every covariate must belong to at least one group. Groups may overlap;
/// [`GroupStructure::is_partition`] reports whether they do not.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupStructure {
    groups: Vec<Group>,
    p: usize,
    is_partition: bool,
}

impl GroupStructure {
    pub fn new(groups: Vec<Group>, p: usize) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidGroups("no groups given".into()));
        }
        let mut covered = vec![0usize; p];
        for g in &groups {
            if g.members.is_empty() {
                return Err(Error::InvalidGroups(format!("group {:?} is empty", g.name)));
            }
            let mut seen = BTreeSet::new();
            for &j in &g.members {
                if j >= p {
                    return Err(Error::IndexOutOfRange { index: j, p });
                }
                if !seen.insert(j) {
                    return Err(Error::InvalidGroups(format!(
                        "group {:?} lists covariate {} twice",
                        g.name,
                        j + 1
                    )));
                }
                covered[j] += 1;
            }
        }
        if let Some(j) = covered.iter().position(|&c| c == 0) {
            return Err(Error::InvalidGroups(format!(
                "covariate {} is not in any group",
                j + 1
            )));
        }
        let is_partition = covered.iter().all(|&c| c == 1);
        Ok(Self {
            groups,
            p,
            is_partition,
        })
    }

    /// One group per covariate, named `x1`, `x2`, ...
    pub fn singletons(p: usize) -> Self {
        let groups = (0..p)
            .map(|j| Group {
                name: format!("x{}", j + 1),
                members: vec![j],
            })
            .collect();
        Self::new(groups, p).expect("singletons cover every covariate")
    }

    /// Consecutive blocks of `block` neighbouring covariates, named `g1`, `g2`, ...
    pub fn blocks(p: usize, block: usize) -> Result<Self> {
        if block == 0 || !p.is_multiple_of(block) {
            return Err(Error::InvalidGroups(format!(
                "p = {p} is not divisible into blocks of {block}"
            )));
        }
        let groups = (0..p / block)
            .map(|g| Group {
                name: format!("g{}", g + 1),
                members: (g * block..(g + 1) * block).collect(),
            })
            .collect();
        Self::new(groups, p)
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn is_partition(&self) -> bool {
        self.is_partition
    }

    /// Errors with the first overlapping pair when the groups are not a partition.
    pub fn require_partition(&self) -> Result<()> {
        if self.is_partition {
            return Ok(());
        }
        let mut owner: Vec<Option<usize>> = vec![None; self.p];
        for (gi, g) in self.groups.iter().enumerate() {
            for &j in &g.members {
                if let Some(prev) = owner[j] {
                    return Err(Error::OverlappingGroups {
                        first: self.groups[prev].name.clone(),
                        second: g.name.clone(),
                        covariate: j + 1,
                    });
                }
                owner[j] = Some(gi);
            }
        }
        unreachable!("coverage is checked at construction")
    }
}
