use std::fmt::Write as _;

use gspam::metrics::{support_metrics, test_mse};
use gspam::path::{fit_path_with, Grid};
use gspam::sim::{make_scenario, Scenario, SnrReading, N_COMPONENTS};
use gspam::{Algorithm, GroupStructure, SmootherSet, SolverConfig};
use rayon::prelude::*;

use super::{create_dir, csv_text, grid, write_text};
use crate::args::ReproduceArgs;
use crate::error::{CliError, Result};

const BLOCK_SIZE: usize = 4;
const THREADS_VAR: &str = "GSPAM_THREADS";

/// Worker count from `GSPAM_THREADS`; unset or 0 means one per core.
pub fn threads_from_env() -> Result<usize> {
    match std::env::var(THREADS_VAR) {
        Err(_) => Ok(0),
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::Usage(format!("{THREADS_VAR} must be a nonnegative integer, got {v:?}"))
        }),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub n: usize,
    pub ps: Vec<usize>,
    pub ts: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub snr: SnrReading,
    pub grid: Grid,
    pub methods: Vec<Algorithm>,
    /// 0 uses one worker per core.
    pub threads: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            n: 150,
            ps: vec![200],
            ts: vec![0.0, 1.0, 2.0],
            replicates: 10,
            seed: 0,
            snr: SnrReading::Standard,
            grid: Grid::default(),
            methods: vec![Algorithm::GroupSpam, Algorithm::Spam],
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateMetrics {
    pub precision: f64,
    pub recall: f64,
    pub size: usize,
    pub mse: f64,
    pub lambda: f64,
    pub converged: bool,
    /// Whether each of the relevant covariates was selected.
    pub selected: [bool; N_COMPONENTS],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    pub p: usize,
    pub t: f64,
    pub method: Algorithm,
    pub replicate: usize,
    /// The error message when the replicate failed.
    pub outcome: std::result::Result<ReplicateMetrics, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub p: usize,
    pub t: f64,
    pub method: Algorithm,
    pub replicates: usize,
    pub failed: usize,
    pub precision: (f64, f64),
    pub recall: (f64, f64),
    pub size: (f64, f64),
    pub mse: (f64, f64),
    /// How many replicates selected each relevant covariate.
    pub counts: [usize; N_COMPONENTS],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub rows: Vec<TableRow>,
    pub records: Vec<ReplicateRecord>,
}

impl Summary {
    pub fn row(&self, p: usize, t: f64, method: Algorithm) -> Option<&TableRow> {
        self.rows
            .iter()
            .find(|r| r.p == p && r.t == t && r.method == method)
    }
}

fn run_replicate(
    config: &StudyConfig,
    p: usize,
    t: f64,
    replicate: usize,
) -> Vec<std::result::Result<ReplicateMetrics, String>> {
    let scenario = Scenario {
        n: config.n,
        p,
        t,
        seed: config.seed,
        replicate: replicate as u64,
        block_size: BLOCK_SIZE,
        snr: config.snr,
    };
    let prepared = make_scenario(&scenario)
        .and_then(|sim| SmootherSet::from_dataset(&sim.train).map(|s| (sim, s)));
    let (sim, smoothers) = match prepared {
        Ok(v) => v,
        Err(e) => return vec![Err(e.to_string()); config.methods.len()],
    };
    let singletons = GroupStructure::singletons(p);
    let solver_config = SolverConfig::default();
    config
        .methods
        .iter()
        .map(|&method| {
            let groups = match method {
                Algorithm::GroupSpam => &sim.groups,
                _ => &singletons,
            };
            let path = fit_path_with(
                &sim.train,
                &sim.validation,
                groups,
                &smoothers,
                &config.grid,
                method,
                &solver_config,
            )
            .map_err(|e| e.to_string())?;
            let model = path.selected();
            let support = support_metrics(model, &sim.true_support);
            let mse = test_mse(model, &sim.test).map_err(|e| e.to_string())?;
            let mut selected = [false; N_COMPONENTS];
            for (s, &j) in selected.iter_mut().zip(&sim.true_support) {
                *s = support.per_covariate_selected[j];
            }
            Ok(ReplicateMetrics {
                precision: support.precision,
                recall: support.recall,
                size: support.size,
                mse,
                lambda: model.lambda(),
                converged: model.diagnostics().converged,
                selected,
            })
        })
        .collect()
}

/// Mean and sample standard deviation; the deviation is 0 for fewer than two values.
fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn summarize(records: &[ReplicateRecord], p: usize, t: f64, method: Algorithm) -> TableRow {
    let cell: Vec<&ReplicateRecord> = records
        .iter()
        .filter(|r| r.p == p && r.t == t && r.method == method)
        .collect();
    let ok: Vec<&ReplicateMetrics> = cell.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
    let stat = |f: fn(&ReplicateMetrics) -> f64| mean_sd(&ok.iter().map(|m| f(m)).collect::<Vec<_>>());
    let mut counts = [0; N_COMPONENTS];
    for m in &ok {
        for (c, &s) in counts.iter_mut().zip(&m.selected) {
            *c += s as usize;
        }
    }
    TableRow {
        p,
        t,
        method,
        replicates: cell.len(),
        failed: cell.len() - ok.len(),
        precision: stat(|m| m.precision),
        recall: stat(|m| m.recall),
        size: stat(|m| m.size as f64),
        mse: stat(|m| m.mse),
        counts,
    }
}

/// Runs every (p, t, replicate) cell in parallel. A failed replicate is
/// recorded and the study carries on. Output order does not depend on
/// the thread count.
pub fn run_study(config: &StudyConfig) -> Result<Summary> {
    if config.methods.is_empty() {
        return Err(CliError::Usage("no methods to run".into()));
    }
    let jobs: Vec<(usize, f64, usize)> = config
        .ps
        .iter()
        .flat_map(|&p| {
            config
                .ts
                .iter()
                .flat_map(move |&t| (0..config.replicates).map(move |r| (p, t, r)))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} worker threads: {e}", config.threads)))?;
    let results: Vec<_> = pool.install(|| {
        jobs.par_iter()
            .map(|&(p, t, r)| run_replicate(config, p, t, r))
            .collect()
    });

    let mut records = Vec::new();
    for (&(p, t, replicate), outcomes) in jobs.iter().zip(results) {
        for (&method, outcome) in config.methods.iter().zip(outcomes) {
            records.push(ReplicateRecord {
                p,
                t,
                method,
                replicate,
                outcome,
            });
        }
    }
    let mut rows = Vec::new();
    for &p in &config.ps {
        for &t in &config.ts {
            for &method in &config.methods {
                rows.push(summarize(&records, p, t, method));
            }
        }
    }
    Ok(Summary { rows, records })
}

pub fn table_csv(summary: &Summary) -> String {
    let mut header: Vec<String> = [
        "p",
        "t",
        "method",
        "replicates",
        "failed",
        "precision_mean",
        "precision_sd",
        "recall_mean",
        "recall_sd",
        "size_mean",
        "size_sd",
        "mse_mean",
        "mse_sd",
    ]
    .map(String::from)
    .to_vec();
    header.extend((1..=N_COMPONENTS).map(|j| format!("#f_{j}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    csv_text(
        &header,
        summary.rows.iter().map(|r| {
            let mut row = vec![
                r.p.to_string(),
                r.t.to_string(),
                r.method.name().to_string(),
                r.replicates.to_string(),
                r.failed.to_string(),
            ];
            for (mean, sd) in [r.precision, r.recall, r.size, r.mse] {
                row.push(mean.to_string());
                row.push(sd.to_string());
            }
            row.extend(r.counts.iter().map(|c| c.to_string()));
            row
        }),
    )
}

pub fn replicates_csv(summary: &Summary) -> String {
    let header = [
        "p",
        "t",
        "method",
        "replicate",
        "precision",
        "recall",
        "size",
        "mse",
        "lambda",
        "converged",
        "error",
    ];
    csv_text(
        &header,
        summary.records.iter().map(|r| {
            let mut row = vec![
                r.p.to_string(),
                r.t.to_string(),
                r.method.name().to_string(),
                r.replicate.to_string(),
            ];
            match &r.outcome {
                Ok(m) => row.extend([
                    m.precision.to_string(),
                    m.recall.to_string(),
                    m.size.to_string(),
                    m.mse.to_string(),
                    m.lambda.to_string(),
                    m.converged.to_string(),
                    String::new(),
                ]),
                Err(e) => {
                    row.extend(std::iter::repeat_n(String::new(), 6));
                    row.push(e.clone());
                }
            }
            row
        }),
    )
}

pub fn reproduce(args: &ReproduceArgs) -> Result<String> {
    if args.replicates == 0 {
        return Err(CliError::Usage("--replicates must be at least 1".into()));
    }
    if let Some(p) = args.p.iter().find(|&&p| !p.is_multiple_of(BLOCK_SIZE)) {
        return Err(CliError::Usage(format!(
            "p = {p} is not a multiple of the group size {BLOCK_SIZE}"
        )));
    }
    let config = StudyConfig {
        n: args.n,
        ps: args.p.clone(),
        ts: args.t.clone(),
        replicates: args.replicates,
        seed: args.seed,
        snr: args.snr.into(),
        grid: grid(&args.grid),
        methods: args.methods.iter().map(|&m| m.into()).collect(),
        threads: threads_from_env()?,
    };
    let summary = run_study(&config)?;
    create_dir(&args.out)?;
    write_text(&args.out.join("table.csv"), &table_csv(&summary))?;
    write_text(&args.out.join("replicates.csv"), &replicates_csv(&summary))?;

    let mut out = String::new();
    for r in &summary.rows {
        writeln!(
            out,
            "p={} t={} {:<9} precision {:.2} ({:.2}) recall {:.2} ({:.2}) size {:.1} ({:.1}) mse {:.2} ({:.2}) failed {}",
            r.p,
            r.t,
            r.method.name(),
            r.precision.0,
            r.precision.1,
            r.recall.0,
            r.recall.1,
            r.size.0,
            r.size.1,
            r.mse.0,
            r.mse.1,
            r.failed
        )
        .unwrap();
    }
    writeln!(out, "wrote table.csv and replicates.csv to {}", args.out.display()).unwrap();
    Ok(out)
}
