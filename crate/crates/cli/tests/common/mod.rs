#![allow(dead_code)]

use std::path::{Path, PathBuf};

use serde_json::Value;

pub const HEADER: &str =
    "record_id\tsmiles\tace\tnce\tinstrument_type\tprecursor_type\tion_mode\tprecursor_mz\tpeaks";

/// Native dataset text from (id, smiles, peaks) rows with empty metadata.
pub fn dataset(rows: &[(&str, &str, &str)]) -> String {
    let mut s = format!("{HEADER}\n");
    for (id, smiles, peaks) in rows {
        s.push_str(&format!("{id}\t{smiles}\t\t\t\t\t\t\t{peaks}\n"));
    }
    s
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

pub fn run(args: &[&str]) -> i32 {
    msbench::run(std::iter::once("msbench").chain(args.iter().copied()))
}

pub fn run_ok(args: &[&str]) {
    assert_eq!(run(args), 0, "msbench {}", args.join(" "));
}

pub fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub const TEN: [&str; 10] = [
    "CCO",
    "CCCO",
    "CCN",
    "c1ccccc1",
    "c1ccncc1",
    "CC(=O)O",
    "C1CCCCC1",
    "c1ccc2ccccc2c1",
    "CCOC(=O)C",
    "O=C1CCCCC1",
];
