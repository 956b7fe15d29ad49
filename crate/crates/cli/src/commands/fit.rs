use std::fmt::Write as _;

use gspam::overlap::{collapse_latent, expand_overlap, fit_groupspam_overlap};
use gspam::path::{fit_path_with, Grid};
use gspam::solver::{self, Algorithm};
use gspam::{Dataset, FittedModel, GroupStructure, SmootherSet, SolverConfig};

use super::{create_dir, csv_text, grid, one_based, read_dataset, read_groups, read_model, read_table, write_text};
use crate::args::{FitArgs, PathArgs, PredictArgs};
use crate::error::{CliError, Result};
use crate::formats::save_model;

enum Lambda {
    Value(f64),
    Auto,
}

fn parse_lambda(text: &str) -> Result<Lambda> {
    if text.trim() == "auto" {
        return Ok(Lambda::Auto);
    }
    match text.trim().parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(Lambda::Value(v)),
        _ => Err(CliError::Usage(format!(
            "--lambda must be a nonnegative number or \"auto\", got {text:?}"
        ))),
    }
}

/// Groups for `algorithm`: required for groupspam, singletons otherwise.
fn resolve_groups(
    algorithm: Algorithm,
    groups: Option<&std::path::Path>,
    overlap: bool,
    p: usize,
) -> Result<GroupStructure> {
    if overlap && algorithm != Algorithm::GroupSpam {
        return Err(CliError::Usage("--overlap only applies to groupspam".into()));
    }
    match (algorithm, groups) {
        (Algorithm::GroupSpam, None) => Err(CliError::Usage("groupspam needs --groups".into())),
        (Algorithm::GroupSpam, Some(path)) => {
            let g = read_groups(path, p)?;
            if !overlap {
                g.require_partition().map_err(|e| {
                    CliError::Usage(format!("{e}; pass --overlap to fit overlapping groups"))
                })?;
            }
            Ok(g)
        }
        _ => Ok(GroupStructure::singletons(p)),
    }
}

fn warn_if_unconverged(model: &FittedModel) {
    let d = model.diagnostics();
    if !d.converged {
        eprintln!(
            "warning: lambda = {} did not converge within {} sweeps",
            model.lambda(),
            d.outer_iterations
        );
    }
    if d.inner_failures > 0 {
        eprintln!(
            "warning: lambda = {}: {} group solves hit the inner iteration cap",
            model.lambda(),
            d.inner_failures
        );
    }
}

fn describe(model: &FittedModel, algorithm: Algorithm) -> String {
    let d = model.diagnostics();
    format!(
        "algorithm: {}\nlambda: {}\nactive set ({}): {}\nconverged: {} after {} sweeps, objective {}\n",
        algorithm.name(),
        model.lambda(),
        model.active_set().len(),
        one_based(model.active_set()),
        d.converged,
        d.outer_iterations,
        d.objective
    )
}

/// One row per λ of a fitted path.
pub(crate) struct PathRow {
    pub lambda: f64,
    pub validation_mse: f64,
    pub support_size: usize,
    pub converged: bool,
}

pub(crate) struct PathFit {
    pub rows: Vec<PathRow>,
    pub selected_index: usize,
    pub selected: FittedModel,
}

/// Fits the path on `train` and selects λ on `validation`. With `overlap`
/// the path runs on the latent expansion and every model is collapsed.
pub(crate) fn run_path(
    train: &Dataset,
    validation: &Dataset,
    groups: &GroupStructure,
    algorithm: Algorithm,
    overlap: bool,
    grid: &Grid,
    config: &SolverConfig,
) -> Result<PathFit> {
    if validation.p() != train.p() {
        return Err(gspam::Error::DimensionMismatch {
            expected: train.p(),
            got: validation.p(),
        }
        .into());
    }
    let smoothers = SmootherSet::from_dataset(train)?;
    if !overlap {
        let path = fit_path_with(train, validation, groups, &smoothers, grid, algorithm, config)?;
        let rows = path
            .models
            .iter()
            .zip(&path.validation_mse)
            .map(|(m, &mse)| PathRow {
                lambda: m.lambda(),
                validation_mse: mse,
                support_size: m.active_set().len(),
                converged: m.diagnostics().converged,
            })
            .collect();
        return Ok(PathFit {
            rows,
            selected_index: path.selected_index,
            selected: path.selected().clone(),
        });
    }

    let expansion = expand_overlap(train, groups)?;
    let expanded_validation = expand_overlap(validation, groups)?.expanded_dataset;
    let path = fit_path_with(
        &expansion.expanded_dataset,
        &expanded_validation,
        &expansion.expanded_groups,
        &expansion.smoothers(&smoothers),
        grid,
        algorithm,
        config,
    )?;
    let mut rows = Vec::with_capacity(path.models.len());
    for (m, &mse) in path.models.iter().zip(&path.validation_mse) {
        let collapsed = collapse_latent(m, &expansion)?;
        rows.push(PathRow {
            lambda: m.lambda(),
            validation_mse: mse,
            support_size: collapsed.model.active_set().len(),
            converged: m.diagnostics().converged,
        });
    }
    let selected = collapse_latent(path.selected(), &expansion)?.model;
    Ok(PathFit {
        rows,
        selected_index: path.selected_index,
        selected,
    })
}

pub fn fit(args: &FitArgs) -> Result<String> {
    let train = read_dataset(&args.data)?;
    let algorithm: Algorithm = args.algorithm.into();
    let groups = resolve_groups(algorithm, args.groups.as_deref(), args.overlap, train.p())?;
    let lambda = parse_lambda(&args.lambda)?;
    let mut out = String::new();

    let model = match lambda {
        Lambda::Value(lambda) => {
            let smoothers = SmootherSet::from_dataset(&train)?;
            let config = args.solver.config(lambda);
            if args.overlap {
                fit_groupspam_overlap(&train, &groups, &smoothers, &config)?.0.model
            } else {
                solver::fit(algorithm, &train, Some(&groups), &smoothers, &config, None)?
            }
        }
        Lambda::Auto => {
            let validation_path = args
                .validation
                .as_deref()
                .ok_or_else(|| CliError::Usage("--lambda auto needs --validation".into()))?;
            let validation = read_dataset(validation_path)?;
            let fitted = run_path(
                &train,
                &validation,
                &groups,
                algorithm,
                args.overlap,
                &grid(&args.grid),
                &args.solver.config(0.0),
            )?;
            let row = &fitted.rows[fitted.selected_index];
            writeln!(
                out,
                "selected lambda {} of {} (validation MSE {})",
                fitted.selected_index + 1,
                fitted.rows.len(),
                row.validation_mse
            )
            .unwrap();
            fitted.selected
        }
    };
    warn_if_unconverged(&model);
    write_text(&args.out, &save_model(&model))?;
    out.push_str(&describe(&model, algorithm));
    writeln!(out, "wrote {}", args.out.display()).unwrap();
    Ok(out)
}

pub fn predict(args: &PredictArgs) -> Result<String> {
    let model = read_model(&args.model)?;
    let table = read_table(&args.data)?;
    let pred = model.predict(&table.x)?;
    let text = csv_text(&["prediction"], pred.iter().map(|v| vec![v.to_string()]));
    match &args.out {
        Some(path) => {
            write_text(path, &text)?;
            Ok(format!("wrote {} predictions to {}\n", pred.len(), path.display()))
        }
        None => Ok(text),
    }
}

pub fn path(args: &PathArgs) -> Result<String> {
    let train = read_dataset(&args.data)?;
    let validation = read_dataset(&args.validation)?;
    let algorithm: Algorithm = args.algorithm.into();
    let groups = resolve_groups(algorithm, args.groups.as_deref(), args.overlap, train.p())?;
    let fitted = run_path(
        &train,
        &validation,
        &groups,
        algorithm,
        args.overlap,
        &grid(&args.grid),
        &args.solver.config(0.0),
    )?;

    let unconverged = fitted.rows.iter().filter(|r| !r.converged).count();
    if unconverged > 0 {
        eprintln!(
            "warning: {unconverged} of {} fits did not converge",
            fitted.rows.len()
        );
    }
    let summary = csv_text(
        &["lambda", "validation_mse", "support_size", "converged"],
        fitted.rows.iter().map(|r| {
            vec![
                r.lambda.to_string(),
                r.validation_mse.to_string(),
                r.support_size.to_string(),
                r.converged.to_string(),
            ]
        }),
    );
    create_dir(&args.out)?;
    write_text(&args.out.join("path.csv"), &summary)?;
    write_text(&args.out.join("model.json"), &save_model(&fitted.selected))?;

    let mut out = format!(
        "selected lambda {} of {} (validation MSE {})\n",
        fitted.selected_index + 1,
        fitted.rows.len(),
        fitted.rows[fitted.selected_index].validation_mse
    );
    out.push_str(&describe(&fitted.selected, algorithm));
    writeln!(out, "wrote path.csv and model.json to {}", args.out.display()).unwrap();
    Ok(out)
}
