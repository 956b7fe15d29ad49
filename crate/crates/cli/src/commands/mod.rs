//! One function per subcommand. Each returns the text meant for standard
//! output; warnings go to standard error directly.

mod eval;
mod fit;
mod plot;
mod reproduce;
mod simulate;

use std::fs;
use std::path::Path;

use gspam::path::Grid;
use gspam::{Dataset, FittedModel, GroupStructure};

use crate::args::GridArgs;
use crate::error::{CliError, Result};
use crate::formats::{self, ParseError, Table};

pub use eval::eval;
pub use fit::{fit, path, predict};
pub use plot::plot_components;
pub use reproduce::{
    reproduce, run_study, table_csv, replicates_csv, threads_from_env, ReplicateMetrics, ReplicateRecord,
    StudyConfig, Summary, TableRow,
};
pub use simulate::simulate;

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_error(path: &Path, source: ParseError) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn read_table(path: &Path) -> Result<Table> {
    let bytes = fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    formats::parse_table(&bytes).map_err(|e| parse_error(path, e))
}

pub(crate) fn read_dataset(path: &Path) -> Result<Dataset> {
    read_table(path)?
        .into_dataset()
        .map_err(|e| parse_error(path, e))
}

pub(crate) fn read_groups(path: &Path, p: usize) -> Result<GroupStructure> {
    formats::parse_groups(&read_text(path)?, p).map_err(|e| parse_error(path, e))
}

pub(crate) fn read_model(path: &Path) -> Result<FittedModel> {
    formats::load_model(&read_text(path)?).map_err(|e| parse_error(path, e))
}

pub(crate) fn grid(args: &GridArgs) -> Grid {
    Grid::Geometric {
        count: args.grid_count,
        ratio: args.grid_ratio,
    }
}

/// `1,2,5` style rendering of 0-based indices.
pub(crate) fn one_based(indices: &[usize]) -> String {
    indices
        .iter()
        .map(|j| (j + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub(crate) fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(&row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("fields are UTF-8")
}
