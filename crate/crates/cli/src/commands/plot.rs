use gspam::solver::partial_residual;

use super::{create_dir, csv_text, read_model, read_table, write_text};
use crate::args::PlotArgs;
use crate::error::{CliError, Result};

/// Writes `curves.csv` (covariate, x, fitted) on an even grid over each
/// covariate's training range and, given the training data,
/// `residuals.csv` (covariate, x, partial_residual) at the training points.
pub fn plot_components(args: &PlotArgs) -> Result<String> {
    let model = read_model(&args.model)?;
    let p = model.p();
    if args.resolution < 2 {
        return Err(CliError::Usage(format!(
            "--resolution must be at least 2, got {}",
            args.resolution
        )));
    }
    let covariates: Vec<usize> = if args.covariates.is_empty() {
        model.active_set().to_vec()
    } else {
        args.covariates
            .iter()
            .map(|&j| {
                if j == 0 || j > p {
                    Err(gspam::Error::IndexOutOfRange { index: j, p })
                } else {
                    Ok(j - 1)
                }
            })
            .collect::<std::result::Result<_, _>>()?
    };

    let range = |j: usize| {
        let col = model.train_column(j);
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let shown = |x: f64, (lo, hi): (f64, f64)| {
        if args.rescale && hi > lo {
            (x - lo) / (hi - lo)
        } else {
            x
        }
    };

    let mut curve_rows = Vec::new();
    for &j in &covariates {
        let (lo, hi) = range(j);
        let last = args.resolution - 1;
        let xs: Vec<f64> = (0..args.resolution)
            .map(|k| match k {
                0 => lo,
                k if k == last => hi,
                k => lo + (hi - lo) * k as f64 / last as f64,
            })
            .collect();
        let fitted = model.predict_component(j, &xs)?;
        for (x, f) in xs.iter().zip(&fitted) {
            curve_rows.push(vec![(j + 1).to_string(), shown(*x, (lo, hi)).to_string(), f.to_string()]);
        }
    }
    create_dir(&args.out)?;
    write_text(
        &args.out.join("curves.csv"),
        &csv_text(&["covariate", "x", "fitted"], curve_rows),
    )?;
    let mut written = "curves.csv";

    if let Some(path) = &args.data {
        let table = read_table(path)?;
        let y = table
            .y
            .as_ref()
            .ok_or_else(|| CliError::Usage(format!("{} has no \"y\" column", path.display())))?;
        if table.x.shape() != model.train_x().shape() {
            return Err(CliError::Usage(format!(
                "{} is {}x{} but the model was trained on {}x{}",
                path.display(),
                table.n(),
                table.p(),
                model.n(),
                model.p()
            )));
        }
        let y_c: Vec<f64> = y.iter().map(|v| v - model.y_mean()).collect();
        let mut rows = Vec::new();
        for &j in &covariates {
            let bounds = range(j);
            let r = partial_residual(&y_c, model.components(), &[j]);
            for (x, v) in model.train_column(j).iter().zip(&r) {
                rows.push(vec![(j + 1).to_string(), shown(*x, bounds).to_string(), v.to_string()]);
            }
        }
        write_text(
            &args.out.join("residuals.csv"),
            &csv_text(&["covariate", "x", "partial_residual"], rows),
        )?;
        written = "curves.csv and residuals.csv";
    }
    Ok(format!(
        "wrote {written} for {} covariates to {}\n",
        covariates.len(),
        args.out.display()
    ))
}
