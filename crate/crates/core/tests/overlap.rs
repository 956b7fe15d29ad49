use gspam::overlap::{collapse_latent, expand_overlap, fit_groupspam_overlap};
use gspam::path::lambda_max;
use gspam::sim::{make_scenario, Scenario};
use gspam::solver::fit_groupspam;
use gspam::{Group, GroupStructure, SmootherSet, SolverConfig};

fn group(name: &str, members: &[usize]) -> Group {
    Group {
        name: name.into(),
        members: members.to_vec(),
    }
}

fn overlapping(p: usize) -> GroupStructure {
    // windows of 4 that share two covariates with the next window
    let mut groups = Vec::new();
    let mut start = 0;
    while start + 4 <= p {
        groups.push(group(&format!("w{start}"), &(start..start + 4).collect::<Vec<_>>()));
        start += 2;
    }
    GroupStructure::new(groups, p).unwrap()
}

#[test]
fn collapsed_support_is_a_union_of_groups() {
    for seed in 0..3 {
        let sim = make_scenario(&Scenario {
            n: 80,
            p: 16,
            t: 1.0,
            seed,
            ..Scenario::default()
        })
        .unwrap();
        let groups = overlapping(16);
        assert!(!groups.is_partition());
        let sm = SmootherSet::from_dataset(&sim.train).unwrap();
        let expansion = expand_overlap(&sim.train, &groups).unwrap();
        let lmax = lambda_max(
            &expansion.expanded_dataset,
            &expansion.expanded_groups,
            &expansion.smoothers(&sm),
        );
        for frac in [0.9, 0.5, 0.2] {
            let cfg = SolverConfig::with_lambda(frac * lmax);
            let (collapsed, _, _) = fit_groupspam_overlap(&sim.train, &groups, &sm, &cfg).unwrap();
            let mut union: Vec<usize> = collapsed
                .active_groups
                .iter()
                .flat_map(|&g| groups.groups()[g].members.iter().copied())
                .collect();
            union.sort_unstable();
            union.dedup();
            assert_eq!(collapsed.model.active_set(), union.as_slice(), "seed {seed}, fraction {frac}");
        }
    }
}

#[test]
fn partition_round_trip_matches_direct_fit() {
    let sim = make_scenario(&Scenario {
        n: 70,
        p: 12,
        t: 0.5,
        seed: 5,
        ..Scenario::default()
    })
    .unwrap();
    let sm = SmootherSet::from_dataset(&sim.train).unwrap();
    let lmax = lambda_max(&sim.train, &sim.groups, &sm);
    for frac in [0.0, 0.1, 0.4] {
        let cfg = SolverConfig::with_lambda(frac * lmax);
        let direct = fit_groupspam(&sim.train, &sim.groups, &sm, &cfg).unwrap();
        let (collapsed, expanded, expansion) = fit_groupspam_overlap(&sim.train, &sim.groups, &sm, &cfg).unwrap();
        assert_eq!(direct.active_set(), collapsed.model.active_set());
        for (a, b) in direct
            .components()
            .iter()
            .flatten()
            .zip(collapsed.model.components().iter().flatten())
        {
            assert!((a - b).abs() < 1e-8);
        }
        // collapsing again is a no-op
        let again = collapse_latent(&expanded, &expansion).unwrap();
        assert_eq!(again.model.components(), collapsed.model.components());
        let pred_direct = direct.predict(sim.test.x()).unwrap();
        let pred_collapsed = collapsed.model.predict(sim.test.x()).unwrap();
        for (a, b) in pred_direct.iter().zip(&pred_collapsed) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
