use std::collections::HashSet;

use msbench_core::metrics::{score_values, SpectrumScore};
use msbench_core::spectra::bin_spectrum;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::require_records;
use crate::args::ScoreArgs;
use crate::dataset::Dataset;
use crate::error::{CliError, Result};
use crate::predictions::read_predictions;
use crate::report::{mean, Report};
use crate::Ctx;

#[derive(Debug, Clone, Serialize)]
struct RecordScore {
    record_id: String,
    #[serde(flatten)]
    score: SpectrumScore,
}

enum Outcome {
    Scored(RecordScore),
    MissingPrediction,
    EmptyTruth,
}

pub fn run(ctx: &Ctx, args: &ScoreArgs) -> Result<()> {
    let s = &ctx.settings;
    let n_bins = s.n_bins();
    let ds = Dataset::load(&args.dataset)?;
    ds.emit_rejects(&ctx.out)?;
    require_records(&ds)?;
    let preds = read_predictions(&args.predictions, s.resolution, s.max_mz, n_bins)?;

    let outcomes: Vec<(Outcome, usize, f64)> = ds
        .records
        .par_iter()
        .map(|r| {
            let truth = bin_spectrum(&r.spectrum, s.resolution, s.max_mz).map_err(CliError::usage)?;
            let dropped = (truth.dropped_peak_count, truth.dropped_intensity);
            let outcome = if !truth.values.iter().any(|&v| v > 0.0) {
                Outcome::EmptyTruth
            } else if let Some(p) = preds.get(&r.record_id) {
                let score = score_values(&p.to_dense(n_bins), &truth.values, s.tau)
                    .map_err(CliError::data)?;
                Outcome::Scored(RecordScore { record_id: r.record_id.clone(), score })
            } else {
                Outcome::MissingPrediction
            };
            Ok((outcome, dropped.0, dropped.1))
        })
        .collect::<Result<_>>()?;

    let mut scored = Vec::new();
    let (mut missing, mut empty_truth, mut dropped_peaks, mut dropped_intensity) = (0, 0, 0, 0.0);
    for (o, dp, di) in outcomes {
        dropped_peaks += dp;
        dropped_intensity += di;
        match o {
            Outcome::Scored(r) => scored.push(r),
            Outcome::MissingPrediction => missing += 1,
            Outcome::EmptyTruth => empty_truth += 1,
        }
    }
    let known: HashSet<&str> = ds.records.iter().map(|r| r.record_id.as_str()).collect();
    let unmatched = preds.order.iter().filter(|id| !known.contains(id.as_str())).count();
    let degenerate = scored.iter().filter(|r| r.score.degenerate).count();
    let coverage_undefined = scored.iter().filter(|r| r.score.coverage.is_none()).count();

    if scored.is_empty() {
        eprintln!("score: no record could be scored");
    } else {
        eprintln!("score: {} records scored, {missing} without predictions", scored.len());
    }
    let mut report = Report::new(
        "score",
        s,
        json!({}),
        &[("dataset", &args.dataset), ("predictions", &args.predictions)],
    )?;
    report.aggregate("n_scored", Some(scored.len() as f64));
    report.aggregate("mean_cosine", mean(scored.iter().map(|r| r.score.cosine)));
    report.aggregate("mean_js_similarity", mean(scored.iter().map(|r| r.score.js_similarity)));
    report.aggregate("mean_coverage", mean(scored.iter().filter_map(|r| r.score.coverage)));
    report.set("accounting", ds.accounting);
    report.set(
        "counters",
        json!({
            "missing_predictions": missing,
            "unmatched_predictions": unmatched,
            "truth_without_signal": empty_truth,
            "degenerate": degenerate,
            "coverage_undefined": coverage_undefined,
            "dropped_peaks": dropped_peaks,
            "dropped_intensity": dropped_intensity,
        }),
    );
    report.set("records", &scored);
    report.write(&ctx.out)
}
