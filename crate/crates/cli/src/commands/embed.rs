use msbench_core::metadata::{embed_metadata, fit_metadata_stats, MetadataRecord, MetadataStats};
use msbench_core::numfmt::sig9;
use msbench_core::splits::Partition;
use serde_json::json;

use super::{load_split, require_covered, require_records};
use crate::args::EmbedArgs;
use crate::dataset::Dataset;
use crate::error::{CliError, Result};
use crate::report::{write_file, Report};
use crate::Ctx;

pub fn run(ctx: &Ctx, args: &EmbedArgs) -> Result<()> {
    let ds = Dataset::load(&args.dataset)?;
    ds.emit_rejects(&ctx.out)?;
    require_records(&ds)?;
    let mut inputs = vec![("dataset", args.dataset.as_path())];
    let stats = match (&args.stats, &args.split) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::in_file(path, e))?;
            inputs.push(("stats", path));
            MetadataStats::from_json(&text).map_err(|e| CliError::in_file(path, e))?
        }
        (None, split_path) => {
            let train: Vec<MetadataRecord> = match split_path {
                Some(p) => {
                    let split = load_split(p)?;
                    require_covered(&ds, &split, p)?;
                    inputs.push(("split", p));
                    ds.records
                        .iter()
                        .filter(|r| split[&r.canonical] == Partition::Train)
                        .map(|r| r.metadata.clone())
                        .collect()
                }
                None => ds.records.iter().map(|r| r.metadata.clone()).collect(),
            };
            let stats = fit_metadata_stats(&train, &ctx.settings.metadata)
                .map_err(|e| CliError::in_file(&args.dataset, e))?;
            if let Some(p) = ctx.out.sidecar("stats.json") {
                write_file(&p, &(stats.to_json().map_err(CliError::data)? + "\n"))?;
            }
            stats
        }
    };

    let mut text = String::from("record_id\tembedding\n");
    for r in &ds.records {
        let v = embed_metadata(&r.metadata, &stats);
        let cells: Vec<String> = v.values.iter().map(|x| sig9(*x)).collect();
        text.push_str(&format!("{}\t{}\n", r.record_id, cells.join(",")));
    }
    ctx.out.write_main(&text)?;

    let mut report = Report::new("embed", &ctx.settings, json!({}), &inputs)?;
    report.set("accounting", ds.accounting);
    report.set("dimension", stats.dimension());
    report.set("layout", stats.layout());
    report.set("stats", &stats);
    report.write_sidecar(&ctx.out)
}
