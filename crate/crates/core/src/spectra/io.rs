//! Readers for MGF, MSP and the native tab-separated dataset layout, plus the
//! TSV writer used by the importers.
//!
//! Malformed records are skipped and reported with their line number; only
//! structural problems (I/O failure, an MGF block that never ends, a missing
//! TSV column) abort a read.

use std::collections::{BTreeMap, HashSet};
use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{Peak, Spectrum};
use crate::numfmt::sig9;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("read failed: {0}")]
    Io(#[from] io::Error),
    #[error("line {start_line}: BEGIN IONS block is never closed")]
    Unterminated { start_line: usize },
    #[error("line {line}: nested BEGIN IONS inside the block opened at line {start_line}")]
    NestedBlock { line: usize, start_line: usize },
    #[error("header lacks required column {0:?}")]
    MissingColumn(String),
    #[error("line {line}: column {name:?} appears twice in the header")]
    DuplicateColumn { line: usize, name: String },
    #[error("no header line found")]
    NoHeader,
}

/// A record that could not be read, with the line where it starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Skipped {
    pub line: usize,
    pub reason: String,
}

/// A spectrum plus every header field of its block, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRecord {
    pub spectrum: Spectrum,
    pub fields: Vec<(String, String)>,
    pub line: usize,
}

impl RawRecord {
    /// First field whose key matches one of `keys`, ignoring ASCII case.
    pub fn field(&self, keys: &[&str]) -> Option<&str> {
        self.fields
            .iter()
            .find(|(k, _)| keys.iter().any(|want| k.eq_ignore_ascii_case(want)))
            .map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseOutcome<T> {
    pub records: Vec<T>,
    pub skipped: Vec<Skipped>,
}

impl<T> Default for ParseOutcome<T> {
    fn default() -> Self {
        ParseOutcome {
            records: Vec::new(),
            skipped: Vec::new(),
        }
    }
}

impl<T> ParseOutcome<T> {
    pub fn total(&self) -> usize {
        self.records.len() + self.skipped.len()
    }
}

fn parse_pair(a: &str, b: &str) -> Option<Peak> {
    let mz: f64 = a.parse().ok()?;
    let intensity: f64 = b.parse().ok()?;
    Some(Peak::new(mz, intensity))
}

struct Block {
    start: usize,
    fields: Vec<(String, String)>,
    peaks: Vec<Peak>,
    error: Option<String>,
}

impl Block {
    fn new(start: usize) -> Block {
        Block {
            start,
            fields: Vec::new(),
            peaks: Vec::new(),
            error: None,
        }
    }

    fn fail(&mut self, reason: String) {
        self.error.get_or_insert(reason);
    }

    fn finish(self, id: String, precursor: Option<f64>, out: &mut ParseOutcome<RawRecord>) {
        if let Some(reason) = self.error {
            out.skipped.push(Skipped { line: self.start, reason });
            return;
        }
        match Spectrum::new(id, self.peaks, precursor) {
            Ok(spectrum) => out.records.push(RawRecord {
                spectrum,
                fields: self.fields,
                line: self.start,
            }),
            Err(e) => out.skipped.push(Skipped {
                line: self.start,
                reason: e.to_string(),
            }),
        }
    }
}

fn first_number(v: &str) -> Option<f64> {
    v.split_whitespace().next()?.parse().ok()
}

/// Reads `BEGIN IONS` / `END IONS` blocks. `TITLE` becomes the record id
/// (falling back to `scan<N>`), the first token of `PEPMASS` the precursor.
pub fn parse_mgf(reader: impl BufRead) -> Result<ParseOutcome<RawRecord>, ParseError> {
    let mut out = ParseOutcome::default();
    let mut block: Option<Block> = None;
    let mut ordinal = 0;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with(['#', ';', '!']) {
            continue;
        }
        if t.eq_ignore_ascii_case("BEGIN IONS") {
            if let Some(b) = &block {
                return Err(ParseError::NestedBlock { line: lineno, start_line: b.start });
            }
            block = Some(Block::new(lineno));
            continue;
        }
        let Some(b) = block.as_mut() else {
            continue;
        };
        if t.eq_ignore_ascii_case("END IONS") {
            let b = block.take().expect("open block");
            ordinal += 1;
            let id = field_value(&b.fields, "TITLE")
                .map(str::to_string)
                .unwrap_or_else(|| format!("scan{ordinal}"));
            let precursor = field_value(&b.fields, "PEPMASS").and_then(first_number);
            b.finish(id, precursor, &mut out);
            continue;
        }
        if let Some((k, v)) = t.split_once('=') {
            if !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                b.fields.push((k.to_string(), v.trim().to_string()));
                continue;
            }
        }
        let tokens: Vec<&str> = t.split_whitespace().collect();
        match (tokens.len() >= 2).then(|| parse_pair(tokens[0], tokens[1])).flatten() {
            Some(p) => b.peaks.push(p),
            None => b.fail(format!("line {lineno}: non-numeric peak line {t:?}")),
        }
    }
    if let Some(b) = block {
        return Err(ParseError::Unterminated { start_line: b.start });
    }
    Ok(out)
}

fn field_value<'a>(fields: &'a [(String, String)], key: &str) -> Option<&'a str> {
    fields
        .iter()
        .find(|(k, _)| k.eq_ignore_ascii_case(key))
        .map(|(_, v)| v.as_str())
}

/// Reads NIST-style MSP records: `Name:` opens a record, `Num Peaks:` is
/// followed by that many pairs (several per line allowed, `;` separated,
/// trailing annotations ignored).
pub fn parse_msp(reader: impl BufRead) -> Result<ParseOutcome<RawRecord>, ParseError> {
    let mut out = ParseOutcome::default();
    let mut block: Option<(Block, Option<usize>)> = None;

    fn close(block: Option<(Block, Option<usize>)>, out: &mut ParseOutcome<RawRecord>) {
        let Some((mut b, expected)) = block else {
            return;
        };
        match expected {
            None => b.fail("missing Num Peaks".into()),
            Some(n) if n != b.peaks.len() => {
                b.fail(format!("Num Peaks says {n} but {} pairs were read", b.peaks.len()))
            }
            _ => {}
        }
        let id = field_value(&b.fields, "Name").unwrap_or_default().to_string();
        let precursor = ["PrecursorMZ", "PRECURSOR_MZ", "PEPMASS"]
            .iter()
            .find_map(|k| field_value(&b.fields, k))
            .and_then(first_number);
        b.finish(id, precursor, out);
    }

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let t = line.trim();
        if t.is_empty() {
            close(block.take(), &mut out);
            continue;
        }
        if t.starts_with('#') {
            continue;
        }
        let in_peaks = matches!(&block, Some((_, Some(_))));
        if !in_peaks {
            if let Some((k, v)) = t.split_once(':') {
                let (k, v) = (k.trim(), v.trim());
                if k.eq_ignore_ascii_case("Name") {
                    close(block.take(), &mut out);
                    block = Some((Block::new(lineno), None));
                }
                let (b, expected) = block.get_or_insert_with(|| {
                    let mut b = Block::new(lineno);
                    b.fail("record has no Name".into());
                    (b, None)
                });
                if k.eq_ignore_ascii_case("Num Peaks") || k.eq_ignore_ascii_case("NumPeaks") {
                    match v.parse::<usize>() {
                        Ok(n) => *expected = Some(n),
                        Err(_) => {
                            b.fail(format!("line {lineno}: bad peak count {v:?}"));
                            *expected = Some(0);
                        }
                    }
                }
                b.fields.push((k.to_string(), v.to_string()));
                continue;
            }
        }
        let Some((b, _)) = block.as_mut() else {
            out.skipped.push(Skipped {
                line: lineno,
                reason: format!("peak line {t:?} outside a record"),
            });
            continue;
        };
        if !in_peaks {
            b.fail(format!("line {lineno}: peak data before Num Peaks"));
            continue;
        }
        for chunk in t.split(';').map(str::trim).filter(|c| !c.is_empty()) {
            let tokens: Vec<&str> = chunk.split_whitespace().collect();
            match (tokens.len() >= 2).then(|| parse_pair(tokens[0], tokens[1])).flatten() {
                Some(p) => b.peaks.push(p),
                None => b.fail(format!("line {lineno}: non-numeric peak {chunk:?}")),
            }
        }
    }
    close(block, &mut out);
    Ok(out)
}

/// Column order of the native dataset file.
pub const TSV_COLUMNS: [&str; 9] = [
    "record_id",
    "smiles",
    "ace",
    "nce",
    "instrument_type",
    "precursor_type",
    "ion_mode",
    "precursor_mz",
    "peaks",
];

const REQUIRED: [&str; 3] = ["record_id", "smiles", "peaks"];

/// One dataset row. `fields` holds every column other than `record_id`,
/// `smiles` and `peaks`, with empty cells omitted.
#[derive(Debug, Clone, PartialEq)]
pub struct TsvRecord {
    pub record_id: String,
    pub smiles: String,
    pub fields: BTreeMap<String, String>,
    pub spectrum: Spectrum,
    pub line: usize,
}

/// Maps the canonical column names to the header names used by a file.
#[derive(Debug, Clone, Default)]
pub struct ColumnMap {
    renames: BTreeMap<String, String>,
}

impl ColumnMap {
    pub fn rename(mut self, canonical: &str, header: &str) -> Self {
        self.renames.insert(header.to_string(), canonical.to_string());
        self
    }

    fn canonical<'a>(&'a self, header: &'a str) -> &'a str {
        self.renames.get(header).map(String::as_str).unwrap_or(header)
    }
}

/// Space-separated `mz:intensity` pairs.
pub fn parse_peak_list(text: &str) -> Result<Vec<Peak>, String> {
    text.split_whitespace()
        .map(|tok| {
            tok.split_once(':')
                .and_then(|(a, b)| parse_pair(a, b))
                .ok_or_else(|| format!("malformed peak {tok:?}, expected mz:intensity"))
        })
        .collect()
}

pub fn format_peak_list(peaks: &[Peak]) -> String {
    peaks
        .iter()
        .map(|p| format!("{}:{}", sig9(p.mz), sig9(p.intensity)))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_tsv(reader: impl BufRead) -> Result<ParseOutcome<TsvRecord>, ParseError> {
    parse_tsv_with(reader, &ColumnMap::default())
}

/// Reads the native dataset layout. Lines starting with `#` are comments;
/// the first other line is the header. Rows with the wrong cell count, bad
/// peaks, invalid precursor m/z or a repeated record id are skipped.
pub fn parse_tsv_with(
    reader: impl BufRead,
    columns: &ColumnMap,
) -> Result<ParseOutcome<TsvRecord>, ParseError> {
    let mut out = ParseOutcome::default();
    let mut header: Option<Vec<String>> = None;
    let mut seen = HashSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        let Some(names) = &header else {
            let names: Vec<String> =
                cells.iter().map(|c| columns.canonical(c.trim()).to_string()).collect();
            for (i, n) in names.iter().enumerate() {
                if names[..i].contains(n) {
                    return Err(ParseError::DuplicateColumn { line: lineno, name: n.clone() });
                }
            }
            for req in REQUIRED {
                if !names.iter().any(|n| n == req) {
                    return Err(ParseError::MissingColumn(req.to_string()));
                }
            }
            header = Some(names);
            continue;
        };
        let skip = |reason: String| Skipped { line: lineno, reason };
        if cells.len() != names.len() {
            out.skipped.push(skip(format!(
                "expected {} cells, found {}",
                names.len(),
                cells.len()
            )));
            continue;
        }
        let mut record_id = String::new();
        let mut smiles = String::new();
        let mut peaks_text = "";
        let mut fields = BTreeMap::new();
        for (name, cell) in names.iter().zip(&cells) {
            match name.as_str() {
                "record_id" => record_id = cell.trim().to_string(),
                "smiles" => smiles = cell.trim().to_string(),
                "peaks" => peaks_text = cell,
                _ if cell.trim().is_empty() => {}
                _ => {
                    fields.insert(name.clone(), cell.trim().to_string());
                }
            }
        }
        if record_id.is_empty() {
            out.skipped.push(skip("empty record_id".into()));
            continue;
        }
        if !seen.insert(record_id.clone()) {
            out.skipped.push(skip(format!("duplicate record_id {record_id:?}")));
            continue;
        }
        let peaks = match parse_peak_list(peaks_text) {
            Ok(p) => p,
            Err(e) => {
                out.skipped.push(skip(format!("{record_id}: {e}")));
                continue;
            }
        };
        let precursor = match fields.get("precursor_mz") {
            None => None,
            Some(v) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() && x > 0.0 => Some(x),
                _ => {
                    out.skipped.push(skip(format!("{record_id}: bad precursor_mz {v:?}")));
                    continue;
                }
            },
        };
        match Spectrum::new(record_id.clone(), peaks, precursor) {
            Ok(spectrum) => out.records.push(TsvRecord {
                record_id,
                smiles,
                fields,
                spectrum,
                line: lineno,
            }),
            Err(e) => out.skipped.push(skip(format!("{record_id}: {e}"))),
        }
    }
    if header.is_none() {
        return Err(ParseError::NoHeader);
    }
    Ok(out)
}

/// Writes records in the native layout with the standard header.
pub fn write_tsv<'a>(
    mut w: impl Write,
    records: impl IntoIterator<Item = &'a TsvRecord>,
) -> io::Result<()> {
    writeln!(w, "{}", TSV_COLUMNS.join("\t"))?;
    for r in records {
        let cells: Vec<String> = TSV_COLUMNS
            .iter()
            .map(|&c| match c {
                "record_id" => r.record_id.clone(),
                "smiles" => r.smiles.clone(),
                "peaks" => format_peak_list(r.spectrum.peaks()),
                other => r.fields.get(other).cloned().unwrap_or_default(),
            })
            .collect();
        writeln!(w, "{}", cells.join("\t"))?;
    }
    Ok(())
}
