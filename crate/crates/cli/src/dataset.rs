use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use msbench_core::metadata::MetadataRecord;
use msbench_core::mol::{canonical_form, parse_smiles, Molecule};
use msbench_core::spectra::io::{parse_tsv, Skipped};
use msbench_core::spectra::Spectrum;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::report::{write_file, Output};

#[derive(Debug, Clone)]
pub struct DatasetRecord {
    pub record_id: String,
    pub smiles: String,
    /// Canonical form of the parsed structure; the molecule key.
    pub canonical: String,
    pub molecule: Molecule,
    pub metadata: MetadataRecord,
    pub spectrum: Spectrum,
    /// Extra columns beyond the native nine, empty cells omitted.
    pub extra: BTreeMap<String, String>,
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectKind {
    /// Unparseable structure.
    Quarantined,
    /// Any other row-level problem.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reject {
    pub line: usize,
    pub record_id: Option<String>,
    pub kind: RejectKind,
    pub reason: String,
}

/// `parsed + quarantined + skipped == total`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Accounting {
    pub total: usize,
    pub parsed: usize,
    pub quarantined: usize,
    pub skipped: usize,
}

impl Accounting {
    pub fn from_rejects(parsed: usize, rejects: &[Reject]) -> Accounting {
        let quarantined = rejects.iter().filter(|r| r.kind == RejectKind::Quarantined).count();
        let skipped = rejects.len() - quarantined;
        Accounting { total: parsed + rejects.len(), parsed, quarantined, skipped }
    }
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub path: PathBuf,
    pub records: Vec<DatasetRecord>,
    pub rejects: Vec<Reject>,
    pub accounting: Accounting,
}

const NATIVE_FIELDS: [&str; 6] =
    ["ace", "nce", "instrument_type", "precursor_type", "ion_mode", "precursor_mz"];

impl Dataset {
    pub fn load(path: &Path) -> Result<Dataset> {
        let file = File::open(path).map_err(|e| CliError::in_file(path, e))?;
        let outcome = parse_tsv(BufReader::new(file)).map_err(|e| CliError::in_file(path, e))?;
        let mut rejects: Vec<Reject> = outcome
            .skipped
            .iter()
            .map(|Skipped { line, reason }| Reject {
                line: *line,
                record_id: None,
                kind: RejectKind::Skipped,
                reason: reason.clone(),
            })
            .collect();
        let converted: Vec<std::result::Result<DatasetRecord, Reject>> =
            outcome.records.into_par_iter().map(convert).collect();
        let mut records = Vec::with_capacity(converted.len());
        for c in converted {
            match c {
                Ok(r) => records.push(r),
                Err(r) => rejects.push(r),
            }
        }
        rejects.sort_by_key(|r| r.line);
        let accounting = Accounting::from_rejects(records.len(), &rejects);
        Ok(Dataset { path: path.to_path_buf(), records, rejects, accounting })
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Writes `<out stem>.rejects.tsv` when an output path is set, and
    /// otherwise reports the rejects on stderr.
    pub fn emit_rejects(&self, out: &Output) -> Result<()> {
        emit_rejects(&self.rejects, out, &self.path)
    }
}

pub fn emit_rejects(rejects: &[Reject], out: &Output, source: &Path) -> Result<()> {
    match out.sidecar("rejects.tsv") {
        Some(p) => write_file(&p, &rejects_tsv(rejects)),
        None => {
            for r in rejects {
                eprintln!(
                    "{}:{}: {}: {}",
                    source.display(),
                    r.line,
                    if r.kind == RejectKind::Quarantined { "quarantined" } else { "skipped" },
                    r.reason
                );
            }
            Ok(())
        }
    }
}

pub fn rejects_tsv(rejects: &[Reject]) -> String {
    let mut s = String::from("line\trecord_id\tkind\treason\n");
    for r in rejects {
        let kind = match r.kind {
            RejectKind::Quarantined => "quarantined",
            RejectKind::Skipped => "skipped",
        };
        let reason = r.reason.replace(['\t', '\n'], " ");
        s.push_str(&format!(
            "{}\t{}\t{kind}\t{reason}\n",
            r.line,
            r.record_id.as_deref().unwrap_or("")
        ));
    }
    s
}

fn convert(t: msbench_core::spectra::io::TsvRecord) -> std::result::Result<DatasetRecord, Reject> {
    let reject = |kind, reason: String| Reject {
        line: t.line,
        record_id: Some(t.record_id.clone()),
        kind,
        reason,
    };
    let metadata = MetadataRecord::from_fields(&t.fields)
        .map_err(|e| reject(RejectKind::Skipped, e.to_string()))?;
    if t.smiles.is_empty() {
        return Err(reject(RejectKind::Quarantined, "empty SMILES".into()));
    }
    let molecule = parse_smiles(&t.smiles)
        .map_err(|e| reject(RejectKind::Quarantined, format!("SMILES {:?}: {e}", t.smiles)))?;
    let extra = t
        .fields
        .iter()
        .filter(|(k, _)| !NATIVE_FIELDS.contains(&k.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    Ok(DatasetRecord {
        canonical: canonical_form(&molecule),
        molecule,
        record_id: t.record_id,
        smiles: t.smiles,
        metadata,
        spectrum: t.spectrum,
        extra,
        line: t.line,
    })
}
