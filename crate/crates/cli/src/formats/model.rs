use gspam::{Diagnostics, FittedModel, Group, GroupStructure, ModelParts};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::ParseError;

/// Bumped whenever a field is added, removed or reinterpreted.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    schema_version: u32,
    y_mean: f64,
    lambda: f64,
    bandwidths: Vec<f64>,
    groups: Vec<GroupEntry>,
    diagnostics: DiagnosticsEntry,
    /// Training covariates, one array per column.
    train_x: Vec<Vec<f64>>,
    /// Fitted values at the training points, one array per covariate.
    components: Vec<Vec<f64>>,
    smoothing_inputs: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupEntry {
    name: String,
    /// 1-based, like the groups file.
    members: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagnosticsEntry {
    converged: bool,
    outer_iterations: usize,
    objective: f64,
    inner_failures: usize,
}

/// Serializes `model` as pretty-printed JSON. Numbers are written in
/// shortest round-trip form, so loading restores every value bitwise.
pub fn save_model(model: &FittedModel) -> String {
    let n = model.n();
    let file = ModelFile {
        schema_version: SCHEMA_VERSION,
        y_mean: model.y_mean(),
        lambda: model.lambda(),
        bandwidths: model.bandwidths().to_vec(),
        groups: model
            .groups()
            .groups()
            .iter()
            .map(|g| GroupEntry {
                name: g.name.clone(),
                members: g.members.iter().map(|j| j + 1).collect(),
            })
            .collect(),
        diagnostics: DiagnosticsEntry {
            converged: model.diagnostics().converged,
            outer_iterations: model.diagnostics().outer_iterations,
            objective: model.diagnostics().objective,
            inner_failures: model.diagnostics().inner_failures,
        },
        train_x: model.train_x().as_slice().chunks(n.max(1)).map(<[f64]>::to_vec).collect(),
        components: model.components().to_vec(),
        smoothing_inputs: model.smoothing_inputs().to_vec(),
        offsets: model.offsets().to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("model fields are finite");
    text.push('\n');
    text
}

pub fn load_model(text: &str) -> Result<FittedModel, ParseError> {
    // Check the version first so that old files get a clear message rather
    // than a complaint about some renamed field.
    #[derive(Deserialize)]
    struct Version {
        schema_version: u32,
    }
    let version: Version = serde_json::from_str(text).map_err(json_error)?;
    if version.schema_version != SCHEMA_VERSION {
        return Err(ParseError::whole(format!(
            "unsupported schema version {} (expected {SCHEMA_VERSION})",
            version.schema_version
        )));
    }
    let file: ModelFile = serde_json::from_str(text).map_err(json_error)?;

    let p = file.train_x.len();
    let n = file.train_x.first().map_or(0, Vec::len);
    if p == 0 || n == 0 {
        return Err(ParseError::whole("model has no training data"));
    }
    if file.train_x.iter().any(|c| c.len() != n) {
        return Err(ParseError::whole("training columns differ in length"));
    }
    let mut groups = Vec::with_capacity(file.groups.len());
    for g in file.groups {
        if g.members.iter().any(|&j| j == 0 || j > p) {
            return Err(ParseError::whole(format!("group {:?} has an index outside 1..={p}", g.name)));
        }
        groups.push(Group {
            name: g.name,
            members: g.members.into_iter().map(|j| j - 1).collect(),
        });
    }
    let groups = GroupStructure::new(groups, p).map_err(|e| ParseError::whole(e.to_string()))?;
    let train_x = DMatrix::from_iterator(n, p, file.train_x.into_iter().flatten());
    FittedModel::from_parts(ModelParts {
        components: file.components,
        smoothing_inputs: file.smoothing_inputs,
        offsets: file.offsets,
        y_mean: file.y_mean,
        train_x,
        bandwidths: file.bandwidths,
        lambda: file.lambda,
        groups,
        diagnostics: Diagnostics {
            converged: file.diagnostics.converged,
            outer_iterations: file.diagnostics.outer_iterations,
            objective: file.diagnostics.objective,
            inner_failures: file.diagnostics.inner_failures,
        },
    })
    .map_err(|e| ParseError::whole(e.to_string()))
}

fn json_error(err: serde_json::Error) -> ParseError {
    ParseError {
        line: (err.line() > 0).then(|| err.line()),
        message: err.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_model() -> FittedModel {
        let x = DMatrix::from_column_slice(3, 2, &[0.1, 0.7, -1.3, 2.0, 1.0 / 3.0, 5e-310]);
        FittedModel::from_parts(ModelParts {
            components: vec![vec![0.25, -0.5, 0.25], vec![0.0; 3]],
            smoothing_inputs: vec![vec![1.0 / 7.0, -0.0, 3.5], vec![0.0; 3]],
            offsets: vec![0.1 + 0.2, 0.0],
            y_mean: -1.0 / 3.0,
            train_x: x,
            bandwidths: vec![0.3, 0.45],
            lambda: 0.125,
            groups: GroupStructure::singletons(2),
            diagnostics: Diagnostics {
                converged: false,
                outer_iterations: 100,
                objective: 1.5,
                inner_failures: 2,
            },
        })
        .unwrap()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let m = tiny_model();
        let text = save_model(&m);
        let back = load_model(&text).unwrap();
        assert_eq!(back, m);
        let bits = |m: &FittedModel| -> Vec<u64> {
            m.smoothing_inputs().iter().flatten().map(|v| v.to_bits()).collect()
        };
        assert_eq!(bits(&back), bits(&m));
        assert_eq!(save_model(&back), text);
    }

    #[test]
    fn rejects_other_versions_and_fields() {
        let text = save_model(&tiny_model());
        let old = text.replacen("\"schema_version\": 1", "\"schema_version\": 0", 1);
        assert!(load_model(&old).unwrap_err().message.contains("schema version 0"));
        let extra = text.replacen('{', "{\"colour\": 1,", 1);
        assert!(load_model(&extra).is_err());
        let err = load_model("{\n\"schema_version\": 1,\n oops").unwrap_err();
        assert_eq!(err.line, Some(3));
    }

    #[test]
    fn rejects_inconsistent_shapes() {
        let text = save_model(&tiny_model());
        let short = text.replacen("\"offsets\": [", "\"offsets\": [1.0,", 1);
        assert!(load_model(&short).is_err());
        let bad_group = text.replacen("\"members\": [\n        2\n      ]", "\"members\": [\n        3\n      ]", 1);
        assert_ne!(bad_group, text);
        assert!(load_model(&bad_group).is_err());
    }
}
