use gspam::metrics::{support_metrics, test_mse};

use super::{read_dataset, read_model, read_text, write_text};
use crate::args::EvalArgs;
use crate::error::{CliError, Result};
use crate::formats::parse_truth;

/// Prints one JSON record: `mse` and `n`, plus `precision`, `recall` and
/// `size` when a truth file is given.
pub fn eval(args: &EvalArgs) -> Result<String> {
    let model = read_model(&args.model)?;
    let test = read_dataset(&args.data)?;
    let mse = test_mse(&model, &test)?;
    let mut record = serde_json::Map::new();
    record.insert("mse".into(), mse.into());
    record.insert("n".into(), test.n().into());
    if let Some(path) = &args.truth {
        let truth = parse_truth(&read_text(path)?).map_err(|source| CliError::Parse {
            path: path.clone(),
            source,
        })?;
        if let Some(&j) = truth.support.iter().find(|&&j| j >= model.p()) {
            return Err(gspam::Error::IndexOutOfRange {
                index: j + 1,
                p: model.p(),
            }
            .into());
        }
        let m = support_metrics(&model, &truth.support);
        record.insert("precision".into(), m.precision.into());
        record.insert("recall".into(), m.recall.into());
        record.insert("size".into(), m.size.into());
    }
    let mut line = serde_json::Value::Object(record).to_string();
    line.push('\n');
    if let Some(out) = &args.out {
        write_text(out, &line)?;
    }
    Ok(line)
}
