use std::collections::HashSet;

use gspam::{Group, GroupStructure};

use super::{parse_index_list, ParseError};

/// Parses group lines `name: i,j,...` (1-based indices) without checking
/// them against a covariate count. Blank lines and `#` comments are skipped.
pub fn parse_group_lines(text: &str) -> Result<Vec<(usize, Group)>, ParseError> {
    let mut groups = Vec::new();
    let mut names = HashSet::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (name, list) = content
            .split_once(':')
            .ok_or_else(|| ParseError::at(line, "expected \"name: i,j,...\""))?;
        let name = name.trim();
        if name.is_empty() {
            return Err(ParseError::at(line, "empty group name"));
        }
        if !names.insert(name.to_string()) {
            return Err(ParseError::at(line, format!("duplicate group name {name:?}")));
        }
        let members = parse_index_list(list).map_err(|m| ParseError::at(line, m))?;
        let mut seen = HashSet::new();
        if let Some(dup) = members.iter().find(|&&j| !seen.insert(j)) {
            return Err(ParseError::at(line, format!("index {} listed twice", dup + 1)));
        }
        groups.push((
            line,
            Group {
                name: name.to_string(),
                members,
            },
        ));
    }
    if groups.is_empty() {
        return Err(ParseError::whole("no groups defined"));
    }
    Ok(groups)
}

/// Parses a groups file for `p` covariates. Groups must cover every
/// covariate; they may overlap.
pub fn parse_groups(text: &str, p: usize) -> Result<GroupStructure, ParseError> {
    let lines = parse_group_lines(text)?;
    for (line, g) in &lines {
        if let Some(j) = g.members.iter().find(|&&j| j >= p) {
            return Err(ParseError::at(*line, format!("index {} out of range 1..={p}", j + 1)));
        }
    }
    let groups = lines.into_iter().map(|(_, g)| g).collect();
    GroupStructure::new(groups, p).map_err(|e| ParseError::whole(e.to_string()))
}

pub fn write_groups(groups: &GroupStructure) -> String {
    let mut out = String::new();
    for g in groups.groups() {
        let members: Vec<String> = g.members.iter().map(|j| (j + 1).to_string()).collect();
        out.push_str(&format!("{}: {}\n", g.name, members.join(",")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_converts_to_zero_based() {
        let g = parse_groups("# blocks\na: 1, 2\n\nb:3,4  # tail\n", 4).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.groups()[0].name, "a");
        assert_eq!(g.groups()[1].members, vec![2, 3]);
        assert!(g.is_partition());
    }

    #[test]
    fn overlap_is_allowed_here() {
        let g = parse_groups("a: 1,2\nb: 2,3\n", 3).unwrap();
        assert!(!g.is_partition());
    }

    #[test]
    fn line_numbered_errors() {
        let cases = [
            ("a: 1\nb 2\n", Some(2), "expected"),
            ("a: 1\n: 2\n", Some(2), "empty group name"),
            ("a: 1\na: 2\n", Some(2), "duplicate"),
            ("a: 1,0\n", Some(1), "1-based"),
            ("a: 1,x\n", Some(1), "invalid index"),
            ("a: 1,,2\n", Some(1), "empty index"),
            ("a: 1,1\n", Some(1), "twice"),
            ("a: 1\nb: 5\n", Some(2), "out of range"),
            ("a: 1\n", None, "not in any group"),
            ("# nothing\n", None, "no groups"),
        ];
        for (text, line, needle) in cases {
            let err = parse_groups(text, 2).unwrap_err();
            assert_eq!(err.line, line, "{text:?}");
            assert!(err.to_string().contains(needle), "{text:?}: {err}");
        }
    }

    #[test]
    fn write_round_trips() {
        let g = GroupStructure::blocks(8, 4).unwrap();
        let text = write_groups(&g);
        assert_eq!(text, "g1: 1,2,3,4\ng2: 5,6,7,8\n");
        assert_eq!(parse_groups(&text, 8).unwrap(), g);
    }
}
