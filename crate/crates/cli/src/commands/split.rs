use msbench_core::fingerprint::murcko_scaffold;
use msbench_core::splits::{random_split, scaffold_split, Ratios, SplitError, Strategy};
use rayon::prelude::*;
use serde_json::json;

use super::{require_records, unique_molecules};
use crate::args::{SplitArgs, StrategyArg};
use crate::dataset::Dataset;
use crate::error::{CliError, Result};
use crate::report::Report;
use crate::Ctx;

pub fn parse_ratios(text: &str) -> Result<Ratios> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| CliError::usage(format!("--ratios {text:?}: expected three numbers")))?;
    let [train, val, test] = parts[..] else {
        return Err(CliError::usage(format!("--ratios {text:?}: expected three numbers")));
    };
    Ratios::new(train, val, test).map_err(|e| CliError::usage(format!("--ratios: {e}")))
}

pub fn run(ctx: &Ctx, args: &SplitArgs) -> Result<()> {
    let ratios = parse_ratios(&args.ratios)?;
    let ds = Dataset::load(&args.dataset)?;
    ds.emit_rejects(&ctx.out)?;
    require_records(&ds)?;
    let mols = unique_molecules(&ds);
    let seed = ctx.settings.seed;
    let assignment = match args.strategy {
        StrategyArg::Random => {
            let keys: Vec<String> = mols.keys().map(|k| k.to_string()).collect();
            random_split(&keys, ratios, seed)
        }
        StrategyArg::Scaffold => {
            let items: Vec<(&str, _)> = mols.iter().map(|(k, m)| (*k, *m)).collect();
            let keyed: Vec<_> =
                items.par_iter().map(|(k, m)| (k.to_string(), murcko_scaffold(m))).collect();
            scaffold_split(&keyed, ratios, seed)
        }
    }
    .map_err(|e| match e {
        SplitError::BadRatios(..) => CliError::usage(e),
        _ => CliError::in_file(&args.dataset, e),
    })?;

    let mut text = Vec::new();
    assignment.write_tsv(&mut text).map_err(CliError::data)?;
    ctx.out.write_main(&String::from_utf8(text).expect("utf-8"))?;

    let [train, val, test] = assignment.counts();
    let strategy = match assignment.strategy {
        Strategy::Random => "random",
        Strategy::Scaffold => "scaffold",
    };
    eprintln!(
        "split: {} molecules from {} records, strategy {strategy}, seed {seed}: train {train}, val {val}, test {test}",
        mols.len(),
        ds.records.len()
    );
    let a = ds.accounting;
    eprintln!(
        "split: {} input records: {} parsed, {} quarantined, {} skipped",
        a.total, a.parsed, a.quarantined, a.skipped
    );
    for w in &assignment.warnings {
        eprintln!("split: warning: {w}");
    }

    let params = json!({
        "strategy": strategy,
        "ratios": [ratios.train, ratios.val, ratios.test],
    });
    let mut report = Report::new("split", &ctx.settings, params, &[("dataset", &args.dataset)])?;
    report.set("accounting", ds.accounting);
    report.set("molecules", json!({ "train": train, "val": val, "test": test }));
    report.set("warnings", &assignment.warnings);
    report.write_sidecar(&ctx.out)
}
