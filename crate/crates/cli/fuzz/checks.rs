//! Properties shared by the fuzz targets and the corpus replay test.
//! Every parser must return instead of panicking, and whatever parses must
//! survive a write/parse round trip.

#![allow(dead_code)]

use gspam_cli::formats::{
    load_model, parse_group_lines, parse_groups, parse_table, parse_truth, save_model, write_groups,
    write_truth,
};

pub fn table(data: &[u8]) {
    if let Ok(table) = parse_table(data) {
        assert_eq!(table.names.len(), table.p());
        assert!(table.x.iter().all(|v| v.is_finite()));
        let _ = table.into_dataset();
    }
}

pub fn groups(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(lines) = parse_group_lines(text) else {
        assert!(parse_groups(text, 4).is_err());
        return;
    };
    let p = lines
        .iter()
        .flat_map(|(_, g)| g.members.iter().map(|j| j + 1))
        .max()
        .unwrap_or(0);
    if let Ok(structure) = parse_groups(text, p) {
        let again = parse_groups(&write_groups(&structure), p).expect("written groups parse");
        assert_eq!(again, structure);
    }
}

pub fn truth(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(truth) = parse_truth(text) {
        let again = parse_truth(&write_truth(&truth)).expect("written truth parses");
        assert_eq!(again, truth);
    }
}

pub fn model(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(model) = load_model(text) {
        let again = load_model(&save_model(&model)).expect("written model loads");
        assert_eq!(again, model);
    }
}
