use std::io::Write;

use gspam::Dataset;
use nalgebra::DMatrix;

use super::ParseError;

/// A data CSV: covariate columns in file order plus the optional `y` column.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub x: DMatrix<f64>,
    pub y: Option<Vec<f64>>,
}

impl Table {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Converts to a dataset; the file must have had a `y` column.
    pub fn into_dataset(self) -> Result<Dataset, ParseError> {
        let y = self
            .y
            .ok_or_else(|| ParseError::at(1, "header has no \"y\" column"))?;
        Dataset::with_names(self.x, y, Some(self.names)).map_err(|e| ParseError::whole(e.to_string()))
    }
}

/// Parses a CSV with a header row. The column named `y` (if any) is the
/// response; every other column is a covariate.
pub fn parse_table(bytes: &[u8]) -> Result<Table, ParseError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let header = reader.headers().map_err(csv_error)?.clone();
    if header.is_empty() || header.iter().all(str::is_empty) {
        return Err(ParseError::at(1, "missing header row"));
    }
    let mut y_col = None;
    let mut names = Vec::new();
    for (k, name) in header.iter().enumerate() {
        if name.is_empty() {
            return Err(ParseError::at(1, format!("column {} has an empty name", k + 1)));
        }
        if name == "y" {
            if y_col.replace(k).is_some() {
                return Err(ParseError::at(1, "more than one \"y\" column"));
            }
        } else {
            names.push(name.to_string());
        }
    }
    if names.is_empty() {
        return Err(ParseError::at(1, "no covariate columns"));
    }

    let p = names.len();
    let mut values = Vec::new();
    let mut y = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |pos| pos.line() as usize);
        for (k, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| ParseError::at(line, format!("column {}: invalid number {field:?}", k + 1)))?;
            if !v.is_finite() {
                return Err(ParseError::at(line, format!("column {}: non-finite value {field:?}", k + 1)));
            }
            if Some(k) == y_col {
                y.push(v);
            } else {
                values.push(v);
            }
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(ParseError::whole("no data rows"));
    }
    // `values` is row-major; DMatrix wants column-major.
    let x = DMatrix::from_row_slice(rows, p, &values);
    Ok(Table {
        names,
        x,
        y: y_col.map(|_| y),
    })
}

fn csv_error(err: csv::Error) -> ParseError {
    let line = err.position().map(|pos| pos.line() as usize);
    let message = match err.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            format!("expected {expected_len} fields, found {len}")
        }
        csv::ErrorKind::Utf8 { .. } => "invalid UTF-8".to_string(),
        _ => err.to_string(),
    };
    ParseError { line, message }
}

/// Writes `data` with a header of its column names (`x1..xp` when unnamed) and `y`.
pub fn write_dataset<W: Write>(out: W, data: &Dataset) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let names: Vec<String> = match data.column_names() {
        Some(names) => names.to_vec(),
        None => (1..=data.p()).map(|j| format!("x{j}")).collect(),
    };
    w.write_record(names.iter().map(String::as_str).chain(["y"]))?;
    let mut row = Vec::with_capacity(data.p() + 1);
    for i in 0..data.n() {
        row.clear();
        row.extend((0..data.p()).map(|j| data.x()[(i, j)].to_string()));
        row.push(data.y()[i].to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
