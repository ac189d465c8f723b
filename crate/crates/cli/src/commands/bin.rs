use msbench_core::spectra::bin_spectrum;
use rayon::prelude::*;
use serde_json::json;

use super::require_records;
use crate::args::BinArgs;
use crate::dataset::Dataset;
use crate::error::{CliError, Result};
use crate::predictions::{write_dense_predictions, write_predictions, SparseVector};
use crate::report::Report;
use crate::Ctx;

pub fn run(ctx: &Ctx, args: &BinArgs) -> Result<()> {
    let s = &ctx.settings;
    let ds = Dataset::load(&args.dataset)?;
    ds.emit_rejects(&ctx.out)?;
    require_records(&ds)?;
    let binned: Vec<_> = ds
        .records
        .par_iter()
        .map(|r| bin_spectrum(&r.spectrum, s.resolution, s.max_mz))
        .collect::<std::result::Result<_, _>>()
        .map_err(CliError::usage)?;
    let dropped_peaks: usize = binned.iter().map(|b| b.dropped_peak_count).sum();
    let dropped_intensity: f64 = binned.iter().map(|b| b.dropped_intensity).sum();

    let mut buf = Vec::new();
    let ids = ds.records.iter().map(|r| r.record_id.as_str());
    if args.dense {
        write_dense_predictions(
            &mut buf,
            s.resolution,
            s.max_mz,
            ids.zip(binned.iter().map(|b| b.values.as_slice())),
        )
    } else {
        let sparse: Vec<SparseVector> =
            binned.iter().map(|b| SparseVector::from_dense(&b.values)).collect();
        write_predictions(&mut buf, s.resolution, s.max_mz, ids.zip(sparse.iter()))
    }
    .map_err(CliError::data)?;
    ctx.out.write_main(&String::from_utf8(buf).expect("utf-8"))?;
    eprintln!(
        "bin: {} records, {dropped_peaks} peaks at or above max m/z {} dropped",
        ds.records.len(),
        s.max_mz
    );

    let mut report =
        Report::new("bin", s, json!({ "dense": args.dense }), &[("dataset", &args.dataset)])?;
    report.set("accounting", ds.accounting);
    report.set(
        "counters",
        json!({ "dropped_peaks": dropped_peaks, "dropped_intensity": dropped_intensity }),
    );
    report.write_sidecar(&ctx.out)
}
