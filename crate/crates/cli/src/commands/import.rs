use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::BufReader;

use msbench_core::mol::parse_smiles;
use msbench_core::numfmt::sig9;
use msbench_core::spectra::io::{parse_mgf, parse_msp, write_tsv, RawRecord, TsvRecord};
use msbench_core::spectra::Spectrum;
use serde_json::json;

use crate::args::ImportArgs;
use crate::dataset::{emit_rejects, Accounting, Reject, RejectKind};
use crate::error::{CliError, Result};
use crate::report::Report;
use crate::Ctx;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Mgf,
    Msp,
}

const SMILES_KEYS: &[&str] = &["smiles"];
const ENERGY_KEYS: &[&str] = &["collision_energy", "collisionenergy", "ce", "ace"];
const NCE_KEYS: &[&str] = &["nce", "normalized_collision_energy"];
const INSTRUMENT_KEYS: &[&str] = &["instrument_type", "instrument"];
const ADDUCT_KEYS: &[&str] = &["precursor_type", "adduct", "ion_type"];
const ION_MODE_KEYS: &[&str] = &["ionmode", "ion_mode"];

/// Leading number of `text`, ignoring a unit suffix such as `eV` or `%`.
fn leading_number(text: &str) -> Option<f64> {
    let t = text.trim();
    let end = t
        .char_indices()
        .find(|(_, c)| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
        .map_or(t.len(), |(i, _)| i);
    t[..end].parse::<f64>().ok().filter(|x| x.is_finite())
}

fn ion_mode(text: &str) -> Option<&'static str> {
    match text.trim().chars().next()?.to_ascii_lowercase() {
        'p' | '+' => Some("positive"),
        'n' | '-' => Some("negative"),
        _ => None,
    }
}

/// Maps header fields of an MGF/MSP block onto native columns. A collision
/// energy written in percent or tagged NCE is taken as normalized.
pub fn native_fields(raw: &RawRecord) -> BTreeMap<String, String> {
    let mut f = BTreeMap::new();
    let mut put = |k: &str, v: String| {
        if !v.is_empty() {
            f.insert(k.to_string(), v);
        }
    };
    if let Some(e) = raw.field(ENERGY_KEYS) {
        let normalized = e.contains('%') || e.to_ascii_lowercase().contains("nce");
        let digits = e.trim_start_matches(|c: char| c.is_ascii_alphabetic() || c == '=' || c.is_whitespace());
        if let Some(x) = leading_number(digits) {
            put(if normalized { "nce" } else { "ace" }, sig9(x));
        }
    }
    if let Some(x) = raw.field(NCE_KEYS).and_then(leading_number) {
        put("nce", sig9(x));
    }
    if let Some(v) = raw.field(INSTRUMENT_KEYS) {
        put("instrument_type", v.trim().to_string());
    }
    if let Some(v) = raw.field(ADDUCT_KEYS) {
        put("precursor_type", v.trim().to_string());
    }
    if let Some(v) = raw.field(ION_MODE_KEYS).and_then(ion_mode) {
        put("ion_mode", v.to_string());
    }
    if let Some(mz) = raw.spectrum.precursor_mz {
        put("precursor_mz", sig9(mz));
    }
    f
}

/// `id`, or `id_2`, `id_3`, ... when taken.
fn unique_id(id: &str, taken: &mut HashSet<String>) -> String {
    let base = if id.is_empty() { "record" } else { id };
    let mut candidate = base.to_string();
    let mut n = 1;
    while taken.contains(&candidate) {
        n += 1;
        candidate = format!("{base}_{n}");
    }
    taken.insert(candidate.clone());
    candidate
}

pub fn run(ctx: &Ctx, args: &ImportArgs, format: Format) -> Result<()> {
    let path = &args.input;
    let file = File::open(path).map_err(|e| CliError::in_file(path, e))?;
    let reader = BufReader::new(file);
    let outcome = match format {
        Format::Mgf => parse_mgf(reader),
        Format::Msp => parse_msp(reader),
    }
    .map_err(|e| CliError::in_file(path, e))?;

    let mut rejects: Vec<Reject> = outcome
        .skipped
        .iter()
        .map(|s| Reject { line: s.line, record_id: None, kind: RejectKind::Skipped, reason: s.reason.clone() })
        .collect();
    let mut taken = HashSet::new();
    let mut renamed = 0;
    let mut out = Vec::new();
    for raw in &outcome.records {
        let id = &raw.spectrum.record_id;
        let quarantine = |reason: String| Reject {
            line: raw.line,
            record_id: Some(id.clone()),
            kind: RejectKind::Quarantined,
            reason,
        };
        let smiles = raw.field(SMILES_KEYS).map(str::trim).unwrap_or("");
        if smiles.is_empty() {
            rejects.push(quarantine("no SMILES field".into()));
            continue;
        }
        if let Err(e) = parse_smiles(smiles) {
            rejects.push(quarantine(format!("SMILES {smiles:?}: {e}")));
            continue;
        }
        let new_id = unique_id(id, &mut taken);
        if new_id != *id {
            renamed += 1;
        }
        let spectrum = Spectrum::new(new_id.clone(), raw.spectrum.peaks().to_vec(), raw.spectrum.precursor_mz)
            .expect("peaks already validated");
        out.push(TsvRecord {
            record_id: new_id,
            smiles: smiles.to_string(),
            fields: native_fields(raw),
            spectrum,
            line: raw.line,
        });
    }
    rejects.sort_by_key(|r| r.line);
    let accounting = Accounting::from_rejects(out.len(), &rejects);
    debug_assert_eq!(accounting.total, outcome.total());

    let mut buf = Vec::new();
    write_tsv(&mut buf, &out).map_err(CliError::data)?;
    ctx.out.write_main(&String::from_utf8(buf).expect("utf-8"))?;
    emit_rejects(&rejects, &ctx.out, path)?;
    eprintln!(
        "import: {} records: {} written, {} quarantined, {} skipped, {renamed} ids renamed",
        accounting.total, accounting.parsed, accounting.quarantined, accounting.skipped
    );

    let name = match format {
        Format::Mgf => "import-mgf",
        Format::Msp => "import-msp",
    };
    let mut report = Report::new(name, &ctx.settings, json!({}), &[("input", path)])?;
    report.set("accounting", accounting);
    report.set("counters", json!({ "renamed_ids": renamed }));
    report.write_sidecar(&ctx.out)
}
