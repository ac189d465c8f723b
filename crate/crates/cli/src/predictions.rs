//! Prediction files: one row per record, `record_id<TAB>payload`.
//!
//! The payload is either a dense comma-separated bin vector or sparse
//! space-separated `bin:value` pairs, detected per row. An optional comment
//! `# resolution=<r> max_mz=<m>` pins the binning the file was written for.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{CliError, Result};

/// Nonzero bins in ascending order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    pub entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn from_dense(values: &[f64]) -> SparseVector {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i as u32, *v))
            .collect();
        SparseVector { entries }
    }

    /// Overwrites `buf` with the dense form.
    pub fn fill_dense(&self, buf: &mut [f64]) {
        buf.fill(0.0);
        for &(i, v) in &self.entries {
            buf[i as usize] += v;
        }
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        self.fill_dense(&mut v);
        v
    }
}

#[derive(Debug, Clone, Default)]
pub struct Predictions {
    pub by_id: HashMap<String, SparseVector>,
    /// Ids in file order.
    pub order: Vec<String>,
}

impl Predictions {
    pub fn get(&self, id: &str) -> Option<&SparseVector> {
        self.by_id.get(id)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

fn mismatch(path: &Path, line: usize, msg: String) -> CliError {
    CliError::Data(format!("{}:{line}: resolution mismatch: {msg}", path.display()))
}

pub fn read_predictions(path: &Path, resolution: f64, max_mz: f64, n_bins: usize) -> Result<Predictions> {
    let file = File::open(path).map_err(|e| CliError::in_file(path, e))?;
    let mut out = Predictions::default();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| CliError::in_file(path, e))?;
        let at = |msg: String| CliError::Data(format!("{}:{lineno}: {msg}", path.display()));
        if let Some(comment) = line.strip_prefix('#') {
            check_binning_comment(comment, resolution, max_mz)
                .map_err(|m| mismatch(path, lineno, m))?;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (id, payload) = line.split_once('\t').unwrap_or((line.as_str(), ""));
        let id = id.trim();
        if id.is_empty() {
            return Err(at("empty record_id".into()));
        }
        if id == "record_id" && out.order.is_empty() {
            continue;
        }
        let vector = parse_payload(payload.trim(), n_bins).map_err(|e| match e {
            PayloadError::Shape(m) => mismatch(path, lineno, m),
            PayloadError::Value(m) => at(format!("{id}: {m}")),
        })?;
        if out.by_id.insert(id.to_string(), vector).is_some() {
            return Err(at(format!("duplicate record_id {id:?}")));
        }
        out.order.push(id.to_string());
    }
    Ok(out)
}

fn check_binning_comment(comment: &str, resolution: f64, max_mz: f64) -> std::result::Result<(), String> {
    for tok in comment.split_whitespace() {
        let Some((k, v)) = tok.split_once('=') else { continue };
        let expected = match k {
            "resolution" => resolution,
            "max_mz" => max_mz,
            _ => continue,
        };
        let found: f64 = v.parse().map_err(|_| format!("unreadable {k}={v}"))?;
        if found != expected {
            return Err(format!("file has {k}={v}, run uses {expected}"));
        }
    }
    Ok(())
}

enum PayloadError {
    Shape(String),
    Value(String),
}

fn parse_value(s: &str) -> std::result::Result<f64, PayloadError> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x >= 0.0 => Ok(x),
        _ => Err(PayloadError::Value(format!("bad intensity {s:?}"))),
    }
}

fn parse_payload(payload: &str, n_bins: usize) -> std::result::Result<SparseVector, PayloadError> {
    if payload.is_empty() {
        return Ok(SparseVector::default());
    }
    if payload.contains(':') {
        let mut entries: Vec<(u32, f64)> = Vec::new();
        for tok in payload.split_whitespace() {
            let (b, v) = tok
                .split_once(':')
                .ok_or_else(|| PayloadError::Value(format!("malformed pair {tok:?}")))?;
            let bin: usize =
                b.parse().map_err(|_| PayloadError::Value(format!("bad bin index {b:?}")))?;
            if bin >= n_bins {
                return Err(PayloadError::Shape(format!(
                    "bin {bin} outside the {n_bins} bins of the run configuration"
                )));
            }
            entries.push((bin as u32, parse_value(v)?));
        }
        entries.sort_by_key(|e| e.0);
        entries.dedup_by(|later, earlier| {
            let same = later.0 == earlier.0;
            if same {
                earlier.1 += later.1;
            }
            same
        });
        entries.retain(|e| e.1 != 0.0);
        return Ok(SparseVector { entries });
    }
    let values: Vec<f64> = payload.split(',').map(|s| parse_value(s.trim())).collect::<std::result::Result<_, _>>()?;
    if values.len() != n_bins {
        return Err(PayloadError::Shape(format!(
            "dense row has {} bins, run configuration expects {n_bins}",
            values.len()
        )));
    }
    Ok(SparseVector::from_dense(&values))
}

/// Writes the sparse form with round-trip exact values.
pub fn write_predictions<'a>(
    mut w: impl Write,
    resolution: f64,
    max_mz: f64,
    rows: impl IntoIterator<Item = (&'a str, &'a SparseVector)>,
) -> std::io::Result<()> {
    writeln!(w, "# resolution={resolution} max_mz={max_mz}")?;
    for (id, v) in rows {
        let payload: Vec<String> = v.entries.iter().map(|(i, x)| format!("{i}:{x}")).collect();
        writeln!(w, "{id}\t{}", payload.join(" "))?;
    }
    Ok(())
}

/// Dense comma-separated form.
pub fn write_dense_predictions<'a>(
    mut w: impl Write,
    resolution: f64,
    max_mz: f64,
    rows: impl IntoIterator<Item = (&'a str, &'a [f64])>,
) -> std::io::Result<()> {
    writeln!(w, "# resolution={resolution} max_mz={max_mz}")?;
    for (id, v) in rows {
        let payload: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
        writeln!(w, "{id}\t{}", payload.join(","))?;
    }
    Ok(())
}
