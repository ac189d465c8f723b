use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use msbench_core::metrics::{cosine_from_sums, rank_candidates, top_k, top_k_percent, RankResult};
use msbench_core::mol::{canonical_form, parse_smiles, Molecule};
use msbench_core::spectra::bin_spectrum;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::require_records;
use crate::args::{MergeArg, RetrieveArgs};
use crate::dataset::{Dataset, DatasetRecord};
use crate::error::{CliError, Result};
use crate::mass::{adduct, monoisotopic_mass, ppm_error};
use crate::predictions::{read_predictions, Predictions, SparseVector};
use crate::report::{mean, Report};
use crate::Ctx;

pub const HISTOGRAM_BINS: usize = 50;

/// Extra dataset column grouping several spectra into one query.
pub const QUERY_ID_COLUMN: &str = "query_id";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateRow {
    pub query_id: String,
    pub candidate_id: String,
    pub smiles: String,
    pub line: usize,
}

/// Reads a headed TSV and returns, per row, the cells of `columns` in the
/// given order. Lines starting with `#` are comments.
pub fn read_table(path: &Path, columns: &[&str]) -> Result<Vec<(usize, Vec<String>)>> {
    let file = File::open(path).map_err(|e| CliError::in_file(path, e))?;
    let mut index: Option<(Vec<usize>, usize)> = None;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| CliError::in_file(path, e))?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').map(str::trim).collect();
        let Some((idx, width)) = &index else {
            let mut idx = Vec::new();
            for c in columns {
                let pos = cells.iter().position(|h| h == c).ok_or_else(|| {
                    CliError::in_file(path, format!("line {lineno}: header lacks column {c:?}"))
                })?;
                idx.push(pos);
            }
            index = Some((idx, cells.len()));
            continue;
        };
        if cells.len() != *width {
            return Err(CliError::in_file(
                path,
                format!("line {lineno}: expected {width} cells, found {}", cells.len()),
            ));
        }
        rows.push((lineno, idx.iter().map(|&j| cells[j].to_string()).collect()));
    }
    if index.is_none() {
        return Err(CliError::in_file(path, "no header line"));
    }
    Ok(rows)
}

pub fn read_candidates(path: &Path) -> Result<Vec<CandidateRow>> {
    let rows = read_table(path, &["query_id", "candidate_id", "smiles"])?;
    rows.into_iter()
        .map(|(line, mut cells)| {
            let smiles = cells.pop().expect("3 cells");
            let candidate_id = cells.pop().expect("3 cells");
            let query_id = cells.pop().expect("3 cells");
            if query_id.is_empty() || candidate_id.is_empty() {
                return Err(CliError::in_file(path, format!("line {line}: empty id")));
            }
            Ok(CandidateRow { query_id, candidate_id, smiles, line })
        })
        .collect()
}

/// Parses each distinct SMILES text once. Failures map to `None`.
pub fn parse_unique<'a>(smiles: impl Iterator<Item = &'a str>) -> HashMap<&'a str, Option<(Molecule, String)>> {
    let mut uniq: Vec<&str> = smiles.collect();
    uniq.sort_unstable();
    uniq.dedup();
    uniq.par_iter()
        .map(|s| {
            let parsed = parse_smiles(s).ok().map(|m| {
                let c = canonical_form(&m);
                (m, c)
            });
            (*s, parsed)
        })
        .collect()
}

/// Canonical-form-deduplicated candidate lists per query. Within a query,
/// rows are sorted by candidate id and the first row per structure wins.
pub fn candidate_pools(
    rows: &[CandidateRow],
    parsed: &HashMap<&str, Option<(Molecule, String)>>,
    counters: &mut Counters,
) -> BTreeMap<String, Vec<(String, String)>> {
    let mut pools: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    for r in rows {
        match &parsed[r.smiles.as_str()] {
            Some((_, canon)) => pools
                .entry(r.query_id.clone())
                .or_default()
                .push((r.candidate_id.clone(), canon.clone())),
            None => counters.invalid_candidate_structures += 1,
        }
    }
    for pool in pools.values_mut() {
        pool.sort();
        let before = pool.len();
        let mut seen = std::collections::HashSet::new();
        pool.retain(|(_, canon)| seen.insert(canon.clone()));
        counters.duplicate_candidates += before - pool.len();
    }
    pools
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Counters {
    pub invalid_candidate_structures: usize,
    pub duplicate_candidates: usize,
    pub unused_candidate_queries: usize,
    pub candidates_without_prediction: usize,
    pub dropped_no_candidates: usize,
    pub dropped_true_candidate_missing: usize,
    pub dropped_true_candidate_without_prediction: usize,
    pub dropped_inconsistent_structure: usize,
    pub dropped_without_signal: usize,
    pub dropped_unsupported_precursor: usize,
    pub dropped_true_candidate_outside_cap: usize,
    pub invalid_compounds: usize,
    pub multi_fragment_compounds: usize,
    pub unsupported_compounds: usize,
    pub duplicate_compounds: usize,
    pub dropped_peaks: usize,
}

struct Query<'a> {
    id: String,
    records: Vec<&'a DatasetRecord>,
    canonical: String,
    /// `ln(1 + x)` of the merged binned spectrum.
    transformed: Vec<f64>,
    norm_sq: f64,
}

#[derive(Debug, Clone, Serialize)]
struct QueryResult {
    query_id: String,
    true_candidate_id: String,
    n_candidates: usize,
    n_spectra: usize,
    true_score: f64,
    #[serde(flatten)]
    rank: RankResult,
}

enum Drop {
    NoCandidates,
    TrueMissing,
    TrueWithoutPrediction,
    UnsupportedPrecursor,
    OutsideCap,
}

/// Cosine between `ln(1 + pred)` and an already transformed query, summed
/// over the prediction's nonzero bins only. Equal to the dense computation
/// because skipped terms are exact zeros.
pub fn sparse_cosine(pred: &SparseVector, query: &[f64], query_norm_sq: f64) -> f64 {
    let (mut dot, mut na) = (0.0, 0.0);
    for &(i, v) in &pred.entries {
        let x = v.ln_1p();
        dot += x * query[i as usize];
        na += x * x;
    }
    cosine_from_sums(dot, na, query_norm_sq)
}

fn group_queries<'a>(
    ds: &'a Dataset,
    ctx: &Ctx,
    merge: MergeArg,
    counters: &mut Counters,
) -> Result<Vec<Query<'a>>> {
    let s = &ctx.settings;
    let mut groups: BTreeMap<String, Vec<&DatasetRecord>> = BTreeMap::new();
    for r in &ds.records {
        let key = r.extra.get(QUERY_ID_COLUMN).cloned().unwrap_or_else(|| r.record_id.clone());
        groups.entry(key).or_default().push(r);
    }
    let mut out = Vec::new();
    for (id, mut records) in groups {
        records.sort_by(|a, b| a.record_id.cmp(&b.record_id));
        let canonical = records[0].canonical.clone();
        if records.iter().any(|r| r.canonical != canonical) {
            counters.dropped_inconsistent_structure += 1;
            continue;
        }
        let mut merged = vec![0.0; s.n_bins()];
        for r in &records {
            let b = bin_spectrum(&r.spectrum, s.resolution, s.max_mz).map_err(CliError::usage)?;
            counters.dropped_peaks += b.dropped_peak_count;
            for (m, v) in merged.iter_mut().zip(&b.values) {
                *m = match merge {
                    MergeArg::Sum => *m + v,
                    MergeArg::Max => m.max(*v),
                };
            }
        }
        if !merged.iter().any(|&v| v > 0.0) {
            counters.dropped_without_signal += 1;
            continue;
        }
        let transformed: Vec<f64> = merged.iter().map(|x| x.ln_1p()).collect();
        let norm_sq = transformed.iter().map(|x| x * x).sum();
        out.push(Query { id, records, canonical, transformed, norm_sq });
    }
    Ok(out)
}

/// Compound library sorted by neutral monoisotopic mass.
struct Library {
    /// (mass, canonical, compound id)
    entries: Vec<(f64, String, String)>,
}

fn load_library(path: &Path, counters: &mut Counters) -> Result<Library> {
    let rows = read_table(path, &["compound_id", "smiles"])?;
    let parsed = parse_unique(rows.iter().map(|(_, c)| c[1].as_str()));
    let mut by_canon: BTreeMap<String, (String, f64)> = BTreeMap::new();
    for (_, cells) in &rows {
        let Some((mol, canon)) = &parsed[cells[1].as_str()] else {
            counters.invalid_compounds += 1;
            continue;
        };
        if mol.fragment_count() != 1 {
            counters.multi_fragment_compounds += 1;
            continue;
        }
        let Some(mass) = monoisotopic_mass(mol) else {
            counters.unsupported_compounds += 1;
            continue;
        };
        match by_canon.get_mut(canon) {
            Some(existing) => {
                counters.duplicate_compounds += 1;
                if cells[0] < existing.0 {
                    existing.0 = cells[0].clone();
                }
            }
            None => {
                by_canon.insert(canon.clone(), (cells[0].clone(), mass));
            }
        }
    }
    let mut entries: Vec<(f64, String, String)> =
        by_canon.into_iter().map(|(canon, (id, mass))| (mass, canon, id)).collect();
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    Ok(Library { entries })
}

impl Library {
    /// Compounds whose `adduct` ion lies within `ppm` of the observed
    /// precursor, closest first, at most `cap`.
    fn window(&self, q: &Query, ppm: f64, cap: usize) -> std::result::Result<Vec<(String, String)>, Drop> {
        let r = q.records.iter().find(|r| r.metadata.precursor_mz.is_some());
        let (Some(rec), Some(add)) = (
            r,
            q.records.iter().find_map(|r| r.metadata.precursor_type.as_deref()).and_then(adduct),
        ) else {
            return Err(Drop::UnsupportedPrecursor);
        };
        let obs = rec.metadata.precursor_mz.expect("filtered");
        let tol = ppm * 1e-6;
        let lo = (obs / (1.0 + tol) - add.offset) / add.multiplier;
        let hi = (obs / (1.0 - tol).max(f64::MIN_POSITIVE) - add.offset) / add.multiplier;
        let slack = 1e-9 * hi.abs().max(1.0);
        let start = self.entries.partition_point(|e| e.0 < lo - slack);
        let end = self.entries.partition_point(|e| e.0 <= hi + slack);
        let mut hits: Vec<(f64, &str, &str)> = self.entries[start..end]
            .iter()
            .map(|(mass, canon, id)| (ppm_error(obs, add.ion_mz(*mass)), canon.as_str(), id.as_str()))
            .filter(|h| h.0 <= ppm)
            .collect();
        hits.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        let within = hits.iter().any(|h| h.1 == q.canonical);
        hits.truncate(cap);
        if within && !hits.iter().any(|h| h.1 == q.canonical) {
            return Err(Drop::OutsideCap);
        }
        Ok(hits.into_iter().map(|(_, canon, id)| (id.to_string(), canon.to_string())).collect())
    }
}

fn rank_query(
    q: &Query,
    pool: &[(String, String)],
    preds: &Predictions,
) -> std::result::Result<(QueryResult, usize), Drop> {
    if pool.is_empty() {
        return Err(Drop::NoCandidates);
    }
    let true_id = pool
        .iter()
        .find(|(_, canon)| *canon == q.canonical)
        .map(|(id, _)| id.clone())
        .ok_or(Drop::TrueMissing)?;
    let mut scored: Vec<(&str, f64)> = Vec::with_capacity(pool.len());
    let mut without_prediction = 0;
    for (cid, _) in pool {
        let pred = preds.get(&format!("{}/{cid}", q.id)).or_else(|| preds.get(cid));
        match pred {
            Some(p) => scored.push((cid.as_str(), sparse_cosine(p, &q.transformed, q.norm_sq))),
            None if *cid == true_id => return Err(Drop::TrueWithoutPrediction),
            None => without_prediction += 1,
        }
    }
    let rank = rank_candidates(&scored, &true_id).expect("true candidate scored exactly once");
    let true_score = scored.iter().find(|s| s.0 == true_id).expect("present").1;
    Ok((
        QueryResult {
            query_id: q.id.clone(),
            true_candidate_id: true_id,
            n_candidates: scored.len(),
            n_spectra: q.records.len(),
            true_score,
            rank,
        },
        without_prediction,
    ))
}

pub fn histogram(normalized_ranks: impl Iterator<Item = f64>) -> Vec<usize> {
    let mut h = vec![0; HISTOGRAM_BINS];
    for x in normalized_ranks {
        let b = ((x * HISTOGRAM_BINS as f64).floor() as usize).min(HISTOGRAM_BINS - 1);
        h[b] += 1;
    }
    h
}

pub fn run(ctx: &Ctx, args: &RetrieveArgs) -> Result<()> {
    let s = &ctx.settings;
    if !(args.ppm.is_finite() && args.ppm > 0.0) {
        return Err(CliError::usage(format!("--ppm must be positive, got {}", args.ppm)));
    }
    if args.cap == 0 {
        return Err(CliError::usage("--cap must be at least 1"));
    }
    let ds = Dataset::load(&args.queries)?;
    ds.emit_rejects(&ctx.out)?;
    require_records(&ds)?;
    let preds = read_predictions(&args.predictions, s.resolution, s.max_mz, s.n_bins())?;
    let mut counters = Counters::default();
    let queries = group_queries(&ds, ctx, args.merge, &mut counters)?;

    let pools: Vec<std::result::Result<Vec<(String, String)>, Drop>> = match (&args.candidates, &args.compounds) {
        (Some(path), None) => {
            let rows = read_candidates(path)?;
            let parsed = parse_unique(rows.iter().map(|r| r.smiles.as_str()));
            let mut pools = candidate_pools(&rows, &parsed, &mut counters);
            let out = queries.iter().map(|q| Ok(pools.remove(&q.id).unwrap_or_default())).collect();
            counters.unused_candidate_queries = pools.len();
            out
        }
        (None, Some(path)) => {
            let lib = load_library(path, &mut counters)?;
            queries.par_iter().map(|q| lib.window(q, args.ppm, args.cap)).collect()
        }
        _ => return Err(CliError::usage("give exactly one of --candidates or --compounds")),
    };

    let outcomes: Vec<_> = queries
        .par_iter()
        .zip(pools)
        .map(|(q, pool)| pool.and_then(|p| rank_query(q, &p, &preds)))
        .collect();
    let mut results = Vec::new();
    for o in outcomes {
        match o {
            Ok((r, missing)) => {
                counters.candidates_without_prediction += missing;
                results.push(r);
            }
            Err(Drop::NoCandidates) => counters.dropped_no_candidates += 1,
            Err(Drop::TrueMissing) => counters.dropped_true_candidate_missing += 1,
            Err(Drop::TrueWithoutPrediction) => counters.dropped_true_candidate_without_prediction += 1,
            Err(Drop::UnsupportedPrecursor) => counters.dropped_unsupported_precursor += 1,
            Err(Drop::OutsideCap) => counters.dropped_true_candidate_outside_cap += 1,
        }
    }

    let ranks: Vec<RankResult> = results.iter().map(|r| r.rank).collect();
    let mut report = Report::new(
        "retrieve",
        s,
        json!({
            "merge": match args.merge { MergeArg::Sum => "sum", MergeArg::Max => "max" },
            "candidate_source": if args.candidates.is_some() { "candidates" } else { "compounds" },
            "ppm": args.ppm,
            "cap": args.cap,
        }),
        &[
            ("queries", &args.queries),
            ("predictions", &args.predictions),
            match (&args.candidates, &args.compounds) {
                (Some(p), _) => ("candidates", p.as_path()),
                (_, Some(p)) => ("compounds", p.as_path()),
                _ => unreachable!("checked above"),
            },
        ],
    )?;
    report.aggregate("n_queries", Some(results.len() as f64));
    report.aggregate("mean_candidates", mean(results.iter().map(|r| r.n_candidates as f64)));
    report.aggregate("mean_rank", mean(ranks.iter().map(|r| r.rank as f64)));
    report.aggregate("mean_normalized_rank", mean(ranks.iter().map(|r| r.normalized_rank)));
    for k in [1, 5, 10] {
        report.aggregate(&format!("top_{k}"), top_k(&ranks, k).ok());
    }
    for k in [1.0, 5.0, 10.0] {
        report.aggregate(&format!("top_{k}_percent"), top_k_percent(&ranks, k).ok());
    }
    report.set("accounting", ds.accounting);
    report.set("counters", counters);
    report.set(
        "normalized_rank_histogram",
        json!({ "bins": HISTOGRAM_BINS, "range": [0.0, 1.0], "counts": histogram(ranks.iter().map(|r| r.normalized_rank)) }),
    );
    report.set("queries", &results);
    eprintln!("retrieve: {} queries ranked", results.len());
    report.write(&ctx.out)
}
