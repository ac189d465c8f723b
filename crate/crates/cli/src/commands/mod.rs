pub mod baseline;
pub mod bin;
pub mod compare;
pub mod diagnose;
pub mod embed;
pub mod import;
pub mod retrieve;
pub mod score;
pub mod split;

use std::collections::BTreeMap;
use std::path::Path;

use msbench_core::fingerprint::{morgan_fingerprint, murcko_scaffold, FingerprintBits, ScaffoldKey};
use msbench_core::mol::Molecule;
use msbench_core::splits::{read_assignment_tsv, Partition};
use rayon::prelude::*;

use crate::args::FingerprintArgs;
use crate::dataset::Dataset;
use crate::error::{CliError, Result};

/// First molecule per canonical key, in key order.
pub fn unique_molecules(ds: &Dataset) -> BTreeMap<&str, &Molecule> {
    let mut out = BTreeMap::new();
    for r in &ds.records {
        out.entry(r.canonical.as_str()).or_insert(&r.molecule);
    }
    out
}

pub fn fingerprint(mol: &Molecule, fp: &FingerprintArgs) -> Result<FingerprintBits> {
    morgan_fingerprint(mol, fp.radius, fp.bits).map_err(CliError::usage)
}

/// Fingerprint and scaffold key per molecule, computed in parallel.
pub fn featurize(
    mols: &BTreeMap<&str, &Molecule>,
    fp: &FingerprintArgs,
) -> Result<BTreeMap<String, (FingerprintBits, ScaffoldKey)>> {
    let items: Vec<(&str, &Molecule)> = mols.iter().map(|(k, m)| (*k, *m)).collect();
    items
        .par_iter()
        .map(|(k, m)| Ok((k.to_string(), (fingerprint(m, fp)?, murcko_scaffold(m)))))
        .collect()
}

pub fn load_split(path: &Path) -> Result<BTreeMap<String, Partition>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::in_file(path, e))?;
    read_assignment_tsv(std::io::BufReader::new(file)).map_err(|e| CliError::in_file(path, e))
}

/// Fails when dataset molecules are absent from the split.
pub fn require_covered(ds: &Dataset, split: &BTreeMap<String, Partition>, split_path: &Path) -> Result<()> {
    let mut missing: Vec<(&str, &str)> = ds
        .records
        .iter()
        .filter(|r| !split.contains_key(&r.canonical))
        .map(|r| (r.record_id.as_str(), r.canonical.as_str()))
        .collect();
    if missing.is_empty() {
        return Ok(());
    }
    missing.sort();
    let shown: Vec<String> =
        missing.iter().take(5).map(|(id, key)| format!("{id} ({key})")).collect();
    Err(CliError::in_file(
        split_path,
        format!(
            "{} dataset records have molecules missing from the split, e.g. {}",
            missing.len(),
            shown.join(", ")
        ),
    ))
}

/// Ensures at least one usable record.
pub fn require_records(ds: &Dataset) -> Result<()> {
    if ds.is_empty() {
        return Err(CliError::in_file(&ds.path, "no usable records"));
    }
    Ok(())
}
