//! Replays the checked-in fuzz corpus through the fuzz target bodies so the
//! parsers are exercised on stable toolchains too.

use std::fs;
use std::path::Path;

#[path = "../fuzz/checks.rs"]
mod checks;

fn replay(target: &str, check: fn(&[u8])) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut seen = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        check(&fs::read(&path).unwrap());
        seen += 1;
    }
    assert!(seen > 0, "empty corpus in {}", dir.display());
}

#[test]
fn parse_table_corpus() {
    replay("parse_table", checks::table);
}

#[test]
fn parse_groups_corpus() {
    replay("parse_groups", checks::groups);
}

#[test]
fn parse_truth_corpus() {
    replay("parse_truth", checks::truth);
}

#[test]
fn load_model_corpus() {
    replay("load_model", checks::model);
}

#[test]
fn truncated_inputs_do_not_panic() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus");
    for (target, check) in [
        ("parse_table", checks::table as fn(&[u8])),
        ("parse_groups", checks::groups),
        ("parse_truth", checks::truth),
        ("load_model", checks::model),
    ] {
        for entry in fs::read_dir(dir.join(target)).unwrap() {
            let bytes = fs::read(entry.unwrap().path()).unwrap();
            for cut in 0..bytes.len() {
                check(&bytes[..cut]);
            }
        }
    }
}
