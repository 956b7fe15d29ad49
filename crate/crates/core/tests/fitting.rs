use gspam::path::{fit_path, lambda_max, Grid};
use gspam::sim::{make_scenario, Scenario, SimulatedData};
use gspam::solver::{self, model_objective, model_threshold_check, stationarity_residual};
use gspam::{Algorithm, GroupStructure, SmootherSet, SolverConfig};
use proptest::prelude::*;

fn scenario(n: usize, p: usize, t: f64, seed: u64) -> SimulatedData {
    make_scenario(&Scenario {
        n,
        p,
        t,
        seed,
        ..Scenario::default()
    })
    .unwrap()
}

#[test]
fn prediction_at_training_points_reproduces_fit() {
    for algorithm in [Algorithm::Backfit, Algorithm::Spam, Algorithm::GroupSpam] {
        let sim = scenario(80, 12, 1.0, 21);
        let sm = SmootherSet::from_dataset(&sim.train).unwrap();
        let lmax = lambda_max(&sim.train, &sim.groups, &sm);
        let cfg = SolverConfig::with_lambda(0.2 * lmax);
        let model = solver::fit(algorithm, &sim.train, Some(&sim.groups), &sm, &cfg, None).unwrap();
        let pred = model.predict(sim.train.x()).unwrap();
        for (a, b) in pred.iter().zip(model.fitted_values()) {
            assert!((a - b).abs() < 1e-10, "{}: {a} vs {b}", algorithm.name());
        }
        for j in 0..12 {
            let curve = model.predict_component(j, sim.train.column(j)).unwrap();
            for (a, b) in curve.iter().zip(model.component(j)) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn warm_and_cold_starts_reach_the_same_objective() {
    let sim = scenario(100, 16, 0.0, 22);
    let sm = SmootherSet::from_dataset(&sim.train).unwrap();
    let lmax = lambda_max(&sim.train, &sim.groups, &sm);
    let cfg = SolverConfig {
        outer_tol: 1e-8,
        outer_max_iter: 2000,
        ..SolverConfig::with_lambda(0.15 * lmax)
    };
    let cold = solver::fit_groupspam(&sim.train, &sim.groups, &sm, &cfg).unwrap();
    let warm_from = solver::fit_groupspam(&sim.train, &sim.groups, &sm, &SolverConfig { lambda: 0.3 * lmax, ..cfg })
        .unwrap();
    let warm = solver::fit(
        Algorithm::GroupSpam,
        &sim.train,
        Some(&sim.groups),
        &sm,
        &cfg,
        Some(warm_from.components()),
    )
    .unwrap();
    assert!(cold.diagnostics().converged && warm.diagnostics().converged);
    let (a, b) = (model_objective(&cold, &sim.train), model_objective(&warm, &sim.train));
    assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    assert_eq!(cold.active_set(), warm.active_set());
}

#[test]
fn path_starts_empty_and_selects_minimum() {
    let sim = scenario(60, 12, 0.0, 23);
    let grid = Grid::Geometric { count: 8, ratio: 0.05 };
    let path = fit_path(
        &sim.train,
        &sim.validation,
        &sim.groups,
        &grid,
        Algorithm::GroupSpam,
        &SolverConfig::default(),
    )
    .unwrap();
    assert!(path.models[0].active_set().is_empty());
    let min = path.validation_mse.iter().copied().fold(f64::INFINITY, f64::min);
    assert_eq!(path.validation_mse[path.selected_index], min);
    assert!(path.lambdas.windows(2).all(|w| w[0] > w[1]));
}

#[test]
fn singleton_and_group_fits_share_a_path() {
    let sim = scenario(60, 8, 1.0, 24);
    let grid = Grid::Geometric { count: 6, ratio: 0.1 };
    let cfg = SolverConfig::default();
    let singletons = GroupStructure::singletons(8);
    let g = fit_path(&sim.train, &sim.validation, &singletons, &grid, Algorithm::GroupSpam, &cfg).unwrap();
    let s = fit_path(&sim.train, &sim.validation, &singletons, &grid, Algorithm::Spam, &cfg).unwrap();
    for (a, b) in g.models.iter().zip(&s.models) {
        assert_eq!(a.active_set(), b.active_set());
        for (x, y) in a.components().iter().flatten().zip(b.components().iter().flatten()) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn converged_fits_satisfy_optimality(seed in 0u64..1000, frac in 0.02f64..0.9, t in 0.0f64..2.0) {
        let sim = scenario(50, 12, t, seed);
        let sm = SmootherSet::from_dataset(&sim.train).unwrap();
        let lambda = frac * lambda_max(&sim.train, &sim.groups, &sm);
        let cfg = SolverConfig::with_lambda(lambda);
        let model = solver::fit_groupspam(&sim.train, &sim.groups, &sm, &cfg).unwrap();
        prop_assume!(model.diagnostics().converged);
        for (gi, g) in sim.groups.groups().iter().enumerate() {
            let check = model_threshold_check(&model, &sim.train, &sm, gi);
            let zero = g.members.iter().all(|&j| !model.is_active(j));
            let scaled = check.omega / (g.members.len() as f64).sqrt();
            if zero {
                prop_assert!(scaled <= lambda + 1e-8, "group {gi}: {scaled} > {lambda}");
            } else {
                prop_assert!(scaled > lambda - 1e-8, "group {gi}: {scaled} <= {lambda}");
                let r = stationarity_residual(&model, &sim.train, &sm, gi, lambda, cfg.zero_guard).unwrap();
                prop_assert!(r <= 10.0 * cfg.inner_tol, "group {gi}: stationarity {r}");
            }
        }
    }
}
