use std::collections::HashMap;

use msbench_core::fingerprint::{tanimoto, FingerprintBits};
use msbench_core::mol::Molecule;
use msbench_core::spectra::bin_spectrum;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::fingerprint;
use super::retrieve::{parse_unique, read_candidates};
use crate::args::BaselineArgs;
use crate::dataset::Dataset;
use crate::error::{CliError, Result};
use crate::predictions::{write_predictions, SparseVector};
use crate::report::Report;
use crate::Ctx;

struct TrainEntry {
    record_id: String,
    canonical: String,
    fp: FingerprintBits,
    binned: SparseVector,
}

#[derive(Debug, Clone, Serialize)]
struct Neighbour {
    query_id: String,
    neighbour_id: String,
    tanimoto: f64,
}

/// Index of the most similar train entry. Train entries are pre-sorted by
/// (canonical form, record id), so the first maximum is the tie-break
/// winner. Entries sharing the query id are skipped.
fn nearest(train: &[TrainEntry], query_id: &str, fp: &FingerprintBits) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, t) in train.iter().enumerate() {
        if t.record_id == query_id {
            continue;
        }
        let sim = tanimoto(fp, &t.fp).expect("same fingerprint length");
        if best.is_none_or(|(_, b)| sim > b) {
            best = Some((i, sim));
        }
    }
    best
}

pub fn run(ctx: &Ctx, args: &BaselineArgs) -> Result<()> {
    let s = &ctx.settings;
    let train_ds = Dataset::load(&args.train)?;
    let mut fps: HashMap<&str, FingerprintBits> = HashMap::new();
    for r in &train_ds.records {
        if !fps.contains_key(r.canonical.as_str()) {
            fps.insert(&r.canonical, fingerprint(&r.molecule, &args.fp)?);
        }
    }
    let mut without_signal = 0;
    let mut train = Vec::new();
    for r in &train_ds.records {
        if !r.spectrum.has_signal() {
            without_signal += 1;
            continue;
        }
        let b = bin_spectrum(&r.spectrum, s.resolution, s.max_mz).map_err(CliError::usage)?;
        train.push(TrainEntry {
            record_id: r.record_id.clone(),
            canonical: r.canonical.clone(),
            fp: fps[r.canonical.as_str()].clone(),
            binned: SparseVector::from_dense(&b.values),
        });
    }
    if train.is_empty() {
        return Err(CliError::in_file(&args.train, "no train records with signal"));
    }
    train.sort_by(|a, b| a.canonical.cmp(&b.canonical).then_with(|| a.record_id.cmp(&b.record_id)));

    let mut queries: Vec<(String, Molecule)> = Vec::new();
    let mut inputs = vec![("train", args.train.as_path())];
    let mut invalid_candidates = 0;
    if let Some(path) = &args.queries {
        let qds = Dataset::load(path)?;
        qds.emit_rejects(&ctx.out)?;
        queries.extend(qds.records.into_iter().map(|r| (r.record_id, r.molecule)));
        inputs.push(("queries", path));
    }
    if let Some(path) = &args.candidates {
        let rows = read_candidates(path)?;
        let parsed = parse_unique(rows.iter().map(|r| r.smiles.as_str()));
        for r in &rows {
            match &parsed[r.smiles.as_str()] {
                Some((m, _)) => queries.push((format!("{}/{}", r.query_id, r.candidate_id), m.clone())),
                None => invalid_candidates += 1,
            }
        }
        inputs.push(("candidates", path));
    }
    let mut seen = std::collections::HashSet::new();
    if let Some((dup, _)) = queries.iter().find(|(id, _)| !seen.insert(id.as_str())) {
        return Err(CliError::data(format!("prediction id {dup:?} would be written twice")));
    }

    let hits: Vec<Option<(usize, f64)>> = queries
        .par_iter()
        .map(|(id, mol)| Ok(nearest(&train, id, &fingerprint(mol, &args.fp)?)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut neighbours = Vec::new();
    let mut unpredicted = 0;
    for ((id, _), hit) in queries.iter().zip(&hits) {
        match hit {
            Some((i, sim)) => {
                rows.push((id.as_str(), &train[*i].binned));
                neighbours.push(Neighbour {
                    query_id: id.clone(),
                    neighbour_id: train[*i].record_id.clone(),
                    tanimoto: *sim,
                });
            }
            None => unpredicted += 1,
        }
    }
    let mut buf = Vec::new();
    write_predictions(&mut buf, s.resolution, s.max_mz, rows).map_err(CliError::data)?;
    ctx.out.write_main(&String::from_utf8(buf).expect("utf-8"))?;
    eprintln!("baseline: {} predictions from {} train records", neighbours.len(), train.len());

    let params = json!({ "radius": args.fp.radius, "bits": args.fp.bits });
    let mut report = Report::new("baseline", s, params, &inputs)?;
    report.set("accounting", train_ds.accounting);
    report.set(
        "counters",
        json!({
            "train_without_signal": without_signal,
            "invalid_candidate_structures": invalid_candidates,
            "queries_without_neighbour": unpredicted,
        }),
    );
    report.set("neighbours", neighbours);
    report.write_sidecar(&ctx.out)
}
