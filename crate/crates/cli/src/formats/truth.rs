use std::collections::HashSet;

use super::{parse_index_list, ParseError};

/// Known support (0-based) and, optionally, the noise level a dataset was drawn with.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub support: Vec<usize>,
    pub sigma: Option<f64>,
}

/// Parses `key: value` lines with keys `support` (1-based indices, required)
/// and `sigma`.
pub fn parse_truth(text: &str) -> Result<Truth, ParseError> {
    let mut support = None;
    let mut sigma = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once(':')
            .ok_or_else(|| ParseError::at(line, "expected \"key: value\""))?;
        match key.trim() {
            "support" => {
                if support.is_some() {
                    return Err(ParseError::at(line, "support given twice"));
                }
                let value = value.trim();
                let list = if value.is_empty() {
                    Vec::new()
                } else {
                    parse_index_list(value).map_err(|m| ParseError::at(line, m))?
                };
                let mut seen = HashSet::new();
                if let Some(dup) = list.iter().find(|&&j| !seen.insert(j)) {
                    return Err(ParseError::at(line, format!("index {} listed twice", dup + 1)));
                }
                support = Some(list);
            }
            "sigma" => {
                if sigma.is_some() {
                    return Err(ParseError::at(line, "sigma given twice"));
                }
                let v: f64 = value
                    .trim()
                    .parse()
                    .map_err(|_| ParseError::at(line, format!("invalid sigma {:?}", value.trim())))?;
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(ParseError::at(line, "sigma must be finite and nonnegative"));
                }
                sigma = Some(v);
            }
            other => return Err(ParseError::at(line, format!("unknown key {other:?}"))),
        }
    }
    Ok(Truth {
        support: support.ok_or_else(|| ParseError::whole("missing \"support\" line"))?,
        sigma,
    })
}

pub fn write_truth(truth: &Truth) -> String {
    let support: Vec<String> = truth.support.iter().map(|j| (j + 1).to_string()).collect();
    let mut out = format!("support: {}\n", support.join(","));
    if let Some(sigma) = truth.sigma {
        out.push_str(&format!("sigma: {sigma}\n"));
    }
    out
}
