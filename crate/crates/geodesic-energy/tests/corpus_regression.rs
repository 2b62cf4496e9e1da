//! Run the checked-in fuzz corpus through the parser entry points on the
//! stable toolchain: every seed must be handled without a panic, valid or not.

use std::fs;
use std::path::PathBuf;

use geodesic_energy::config::{parse_config, parse_n_list};
use geodesic_energy::curve::PointSequence;

fn corpus_dir(target: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target)
}

fn corpus_files(target: &str) -> Vec<PathBuf> {
    let dir = corpus_dir(target);
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("missing corpus dir {}: {e}", dir.display()))
        .map(|entry| entry.unwrap().path())
        .collect();
    files.sort();
    assert!(!files.is_empty(), "corpus {target} has no seeds");
    files
}

#[test]
fn config_corpus_parses_without_panicking() {
    let mut accepted = 0;
    for path in corpus_files("parse_config") {
        let bytes = fs::read(&path).unwrap();
        if let Ok(text) = std::str::from_utf8(&bytes) {
            if let Ok(config) = parse_config(text) {
                if config.build().is_ok() {
                    accepted += 1;
                }
            }
        }
    }
    // the corpus mixes valid and invalid seeds
    assert!(
        accepted >= 3,
        "expected several valid config seeds, got {accepted}"
    );
}

#[test]
fn curve_corpus_parses_without_panicking() {
    let mut accepted = 0;
    for path in corpus_files("parse_curve") {
        let bytes = fs::read(&path).unwrap();
        if let Ok(text) = std::str::from_utf8(&bytes) {
            if PointSequence::from_json(text).is_ok() {
                accepted += 1;
            }
        }
    }
    assert!(accepted >= 1);
}

#[test]
fn n_list_corpus_parses_without_panicking() {
    let mut accepted = 0;
    for path in corpus_files("parse_n_list") {
        let bytes = fs::read(&path).unwrap();
        if let Ok(text) = std::str::from_utf8(&bytes) {
            if parse_n_list(text).is_ok() {
                accepted += 1;
            }
        }
    }
    assert!(accepted >= 2);
}
