use std::collections::BTreeMap;

use msbench_core::splits::{split_diagnostics, DiagnosticsInput, Partition, SplitError};
use serde_json::{json, Value};

use super::{featurize, load_split, require_covered, require_records, unique_molecules};
use crate::args::DiagnoseArgs;
use crate::dataset::Dataset;
use crate::error::{CliError, Result};
use crate::report::Report;
use crate::Ctx;

pub fn run(ctx: &Ctx, args: &DiagnoseArgs) -> Result<()> {
    if args.n_pairs == 0 {
        return Err(CliError::usage("--n-pairs must be at least 1"));
    }
    let ds = Dataset::load(&args.dataset)?;
    ds.emit_rejects(&ctx.out)?;
    require_records(&ds)?;
    let split = load_split(&args.split)?;
    require_covered(&ds, &split, &args.split)?;

    let mols = unique_molecules(&ds);
    let features = featurize(&mols, &args.fp)?;
    let mut inputs: BTreeMap<Partition, DiagnosticsInput> =
        Partition::ALL.iter().map(|p| (*p, DiagnosticsInput::default())).collect();
    for (key, (fp, scaffold)) in features {
        let part = split[&key];
        inputs.get_mut(&part).expect("all partitions").molecules.push((key, fp, scaffold));
    }
    let mut without_signal = 0usize;
    for r in &ds.records {
        if !r.spectrum.has_signal() {
            without_signal += 1;
            continue;
        }
        let part = split[&r.canonical];
        inputs.get_mut(&part).expect("all partitions").spectra.push(r.spectrum.clone());
    }
    let unused_split_keys =
        split.len() - split.keys().filter(|k| mols.contains_key(k.as_str())).count();

    let diag = split_diagnostics(
        &inputs[&Partition::Train],
        &[("train-val", &inputs[&Partition::Val]), ("train-test", &inputs[&Partition::Test])],
        args.n_pairs,
        ctx.settings.seed,
    )
    .map_err(|e| match e {
        SplitError::EmptySet | SplitError::SingletonSet(_) => CliError::data(format!(
            "{}: train partition needs at least 2 molecules: {e}",
            args.split.display()
        )),
        other => CliError::data(other),
    })?;

    let params = json!({
        "n_pairs": args.n_pairs,
        "radius": args.fp.radius,
        "bits": args.fp.bits,
    });
    let mut report = Report::new(
        "diagnose",
        &ctx.settings,
        params,
        &[("dataset", &args.dataset), ("split", &args.split)],
    )?;
    report.aggregate("train_train_mean_tanimoto", Some(diag.train_train_mean_tanimoto));
    report.aggregate("train_mean_entropy", diag.train_mean_entropy);
    let mut table = Vec::new();
    for p in &diag.pairs {
        let name = &p.pair;
        report.aggregate(&format!("{name}.mean_tanimoto"), Some(p.mean_tanimoto));
        report.aggregate(&format!("{name}.tanimoto_ks_stat"), Some(p.tanimoto_ks.d));
        report.aggregate(&format!("{name}.tanimoto_log10_ks_pval"), Some(p.tanimoto_ks.log10_p));
        report.aggregate(
            &format!("{name}.scaffold_test_in_train"),
            Some(p.scaffold_overlap.test_in_train),
        );
        let ent = p.entropy.as_ref();
        report.aggregate(&format!("{name}.mean_entropy"), ent.map(|e| e.mean_entropy_other));
        report.aggregate(&format!("{name}.entropy_ks_stat"), ent.map(|e| e.ks.d));
        report.aggregate(&format!("{name}.entropy_log10_ks_pval"), ent.map(|e| e.ks.log10_p));
        table.push(json!({
            "split": name,
            "mean_tanimoto": p.mean_tanimoto,
            "ks_stat": p.tanimoto_ks.d,
            "log_ks_pval": p.tanimoto_ks.log10_p,
            "scaffold_overlap": p.scaffold_overlap.test_in_train,
            "mean_entropy": ent.map(|e| e.mean_entropy_other),
            "entropy_ks_stat": ent.map(|e| e.ks.d),
            "entropy_log_ks_pval": ent.map(|e| e.ks.log10_p),
        }));
    }
    let per_partition: BTreeMap<&str, Value> = inputs
        .iter()
        .map(|(p, inp)| {
            (p.as_str(), json!({ "molecules": inp.molecules.len(), "spectra": inp.spectra.len() }))
        })
        .collect();
    report.set("accounting", ds.accounting);
    report.set(
        "counters",
        json!({
            "spectra_without_signal": without_signal,
            "unused_split_keys": unused_split_keys,
            "partitions": per_partition,
        }),
    );
    report.set("diagnostics", &diag);
    report.set("table", table);
    report.write(&ctx.out)
}
