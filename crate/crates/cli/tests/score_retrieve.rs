mod common;

use std::path::Path;

use common::*;
use serde_json::Value;

fn scoring_dataset(dir: &Path) -> std::path::PathBuf {
    write(
        dir,
        "ds.tsv",
        &dataset(&[
            ("a", "CCO", "100.2:1 100.7:2 31.1:7.25 1200:5"),
            ("b", "CCN", "15:1e-3 16:0.1 17:1e6"),
            ("c", "c1ccccc1", "77.04:100 78.05:12.5 51.02:3"),
            ("d", "CC(=O)O", "43.02:99.9 60.02:0.333333333333"),
        ]),
    )
}

fn aggregate(r: &Value, k: &str) -> f64 {
    r["aggregates"][k].as_f64().unwrap_or_else(|| panic!("{k}: {}", r["aggregates"]))
}

#[test]
fn identical_predictions_score_exactly_one() {
    let dir = tempfile::tempdir().unwrap();
    let ds = scoring_dataset(dir.path());
    for dense in [false, true] {
        let preds = dir.path().join(format!("p{dense}.tsv"));
        let mut args = vec!["bin", s(&ds), "--out", s(&preds)];
        if dense {
            args.push("--dense");
        }
        run_ok(&args);
        let out = dir.path().join("score.json");
        run_ok(&["score", s(&ds), "--predictions", s(&preds), "--out", s(&out)]);
        let r = json(&out);
        for k in ["mean_cosine", "mean_js_similarity", "mean_coverage"] {
            assert_eq!(aggregate(&r, k), 1.0, "{k} dense={dense}");
        }
        assert_eq!(aggregate(&r, "n_scored"), 4.0);
        assert_eq!(r["counters"]["dropped_peaks"], 1);
        let tsv = std::fs::read_to_string(dir.path().join("score.aggregates.tsv")).unwrap();
        assert!(tsv.contains("mean_cosine\t1\n"), "{tsv}");
    }
}

#[test]
fn all_zero_predictions_score_zero_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let ds = scoring_dataset(dir.path());
    let preds = write(dir.path(), "zero.tsv", "a\t\nb\t\nc\t\nd\t\n");
    let out = dir.path().join("score.json");
    run_ok(&["score", s(&ds), "--predictions", s(&preds), "--out", s(&out)]);
    let r = json(&out);
    assert_eq!(aggregate(&r, "mean_cosine"), 0.0);
    assert_eq!(aggregate(&r, "mean_coverage"), 0.0);
    assert_eq!(r["counters"]["degenerate"], 4);
}

#[test]
fn missing_predictions_are_counted_and_excluded() {
    let dir = tempfile::tempdir().unwrap();
    let ds = scoring_dataset(dir.path());
    let full = dir.path().join("full.tsv");
    run_ok(&["bin", s(&ds), "--out", s(&full)]);
    let text = std::fs::read_to_string(&full).unwrap();
    let mut half: String = text
        .lines()
        .filter(|l| !l.starts_with("b\t") && !l.starts_with("d\t"))
        .map(|l| format!("{l}\n"))
        .collect();
    half.push_str("zz\t1:1\n");
    let preds = write(dir.path(), "half.tsv", &half);
    let out = dir.path().join("score.json");
    run_ok(&["score", s(&ds), "--predictions", s(&preds), "--out", s(&out)]);
    let r = json(&out);
    assert_eq!(aggregate(&r, "n_scored"), 2.0);
    assert_eq!(r["counters"]["missing_predictions"], 2);
    assert_eq!(r["counters"]["unmatched_predictions"], 1);
    assert_eq!(aggregate(&r, "mean_cosine"), 1.0);
}

#[test]
fn aggregates_are_means_of_reported_records() {
    let dir = tempfile::tempdir().unwrap();
    let ds = scoring_dataset(dir.path());
    let preds = write(dir.path(), "p.tsv", "a\t31:1 100:4\nb\t17:2 15:1\nc\t77:1\nd\t999:1\n");
    let out = dir.path().join("score.json");
    run_ok(&["score", s(&ds), "--predictions", s(&preds), "--out", s(&out), "--tau", "0.05"]);
    let r = json(&out);
    let recs = r["records"].as_array().unwrap();
    assert_eq!(recs.len(), 4);
    for (agg, field) in [("mean_cosine", "cosine"), ("mean_js_similarity", "js_similarity"), ("mean_coverage", "coverage")] {
        let vals: Vec<f64> = recs.iter().filter_map(|x| x[field].as_f64()).collect();
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        assert!((m - aggregate(&r, agg)).abs() < 1e-8, "{agg}");
    }
    assert_eq!(r["config"]["settings"]["tau"], 0.05);
}

#[test]
fn resolution_mismatch_aborts() {
    let dir = tempfile::tempdir().unwrap();
    let ds = scoring_dataset(dir.path());
    let fine = dir.path().join("fine.tsv");
    run_ok(&["bin", s(&ds), "--resolution", "0.5", "--out", s(&fine)]);
    let out = dir.path().join("score.json");
    assert_eq!(run(&["score", s(&ds), "--predictions", s(&fine), "--out", s(&out)]), 2);
    let short = write(dir.path(), "short.tsv", "a\t1,2,3\n");
    let p = std::process::Command::new(env!("CARGO_BIN_EXE_msbench"))
        .args(["score", s(&ds), "--predictions", s(&short)])
        .output()
        .unwrap();
    assert_eq!(p.status.code(), Some(2));
    let err = String::from_utf8_lossy(&p.stderr);
    assert!(err.contains("short.tsv:1: resolution mismatch"), "{err}");
    assert!(!out.exists());
}

const DECOYS: [&str; 10] = [
    "CCCCCC", "CCCCCCC", "CCCCCCCC", "CC(C)C", "CC(C)CC", "CCCCO", "CCCCN", "CCCCCl", "CCCCBr", "CCCCS",
];
const QUERIES: [&str; 6] = ["CCO", "CCN", "c1ccccc1", "CC(=O)O", "C1CCCCC1", "c1ccncc1"];

/// Six queries with distinct one-bin spectra; decoy predictions sit in
/// high bins. Query q5's true prediction is orthogonal and its decoy D3
/// copies the query spectrum.
fn contest(dir: &Path, reverse_rows: bool) -> (std::path::PathBuf, std::path::PathBuf, std::path::PathBuf) {
    let rows: Vec<(String, &str, String)> = QUERIES
        .iter()
        .enumerate()
        .map(|(i, q)| (format!("q{i}"), *q, format!("{}.5:5", 10 + i)))
        .collect();
    let rows: Vec<_> = rows.iter().map(|(a, b, c)| (a.as_str(), *b, c.as_str())).collect();
    let queries = write(dir, "queries.tsv", &dataset(&rows));
    let mut cand = vec![];
    let mut preds = String::new();
    for (i, q) in QUERIES.iter().enumerate() {
        cand.push(format!("q{i}\tT\t{q}"));
        for (j, d) in DECOYS.iter().enumerate() {
            cand.push(format!("q{i}\tD{j}\t{d}"));
        }
        let true_bin = if i == 5 { 900 } else { 10 + i };
        preds.push_str(&format!("q{i}/T\t{true_bin}:5\n"));
    }
    for j in 0..DECOYS.len() {
        preds.push_str(&format!("D{j}\t{}:1\n", 500 + j));
    }
    preds.push_str("q5/D3\t15:5\n");
    if reverse_rows {
        cand.reverse();
    }
    let cands = write(dir, "cands.tsv", &format!("query_id\tcandidate_id\tsmiles\n{}\n", cand.join("\n")));
    let preds = write(dir, "preds.tsv", &preds);
    (queries, cands, preds)
}

#[test]
fn planted_contest_ranks_true_candidates_first() {
    let dir = tempfile::tempdir().unwrap();
    let (q, c, p) = contest(dir.path(), false);
    let out = dir.path().join("ret.json");
    run_ok(&["retrieve", s(&q), "--candidates", s(&c), "--predictions", s(&p), "--out", s(&out)]);
    let r = json(&out);
    let per = r["queries"].as_array().unwrap();
    assert_eq!(per.len(), 6);
    for x in &per[..5] {
        assert_eq!(x["rank"], 0, "{x}");
        assert_eq!(x["n_candidates"], 11);
    }
    assert!(per[5]["rank"].as_u64().unwrap() >= 1);
    assert!((aggregate(&r, "top_1") - 5.0 / 6.0).abs() < 1e-9);
    let hist = r["normalized_rank_histogram"]["counts"].as_array().unwrap();
    assert_eq!(hist.len(), 50);
    assert_eq!(hist[0], 5);
    assert_eq!(r["config"]["parameters"]["merge"], "sum");
}

#[test]
fn candidate_row_order_does_not_matter() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for (dir, rev) in [(&a, false), (&b, true)] {
        let (q, c, p) = contest(dir.path(), rev);
        let out = dir.path().join("ret.json");
        run_ok(&["retrieve", s(&q), "--candidates", s(&c), "--predictions", s(&p), "--out", s(&out)]);
        reports.push(json(&out));
    }
    assert_eq!(reports[0]["queries"], reports[1]["queries"]);
    assert_eq!(reports[0]["aggregates"], reports[1]["aggregates"]);
}

#[test]
fn invalid_and_duplicate_candidates_are_filtered() {
    let dir = tempfile::tempdir().unwrap();
    let q = write(dir.path(), "q.tsv", &dataset(&[("q0", "CCO", "10:1"), ("q1", "CCN", "11:1")]));
    let c = write(
        dir.path(),
        "c.tsv",
        "query_id\tcandidate_id\tsmiles\nq0\tT\tOCC\nq0\tX\tC1CC\nq0\tY\tCCO\nq0\tZ\tCCC\nq1\tA\tC(\nq9\tA\tC\n",
    );
    let p = write(dir.path(), "p.tsv", "T\t10:1\nY\t10:1\n");
    let out = dir.path().join("r.json");
    run_ok(&["retrieve", s(&q), "--candidates", s(&c), "--predictions", s(&p), "--out", s(&out)]);
    let r = json(&out);
    let k = &r["counters"];
    assert_eq!(k["invalid_candidate_structures"], 2);
    assert_eq!(k["duplicate_candidates"], 1);
    assert_eq!(k["candidates_without_prediction"], 1);
    assert_eq!(k["dropped_no_candidates"], 1);
    assert_eq!(k["unused_candidate_queries"], 1);
    let per = r["queries"].as_array().unwrap();
    assert_eq!(per.len(), 1);
    assert_eq!(per[0]["true_candidate_id"], "T");
    assert_eq!(per[0]["n_candidates"], 1);
}

#[test]
fn merged_queries_follow_the_merge_operator() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{HEADER}\tquery_id\nr1\tCCO\t\t20\t\t\t\t\t10:4\tQ\nr2\tCCO\t\t35\t\t\t\t\t10:4 20:1\tQ\n"
    );
    let q = write(dir.path(), "q.tsv", &text);
    let c = write(dir.path(), "c.tsv", "query_id\tcandidate_id\tsmiles\nQ\tT\tCCO\nQ\tD\tCCC\n");
    // T matches the max-merged spectrum, D the summed one.
    let p = write(dir.path(), "p.tsv", "T\t10:4 20:1\nD\t10:8 20:1\n");
    for (merge, true_rank) in [("sum", 1), ("max", 0)] {
        let out = dir.path().join(format!("{merge}.json"));
        run_ok(&["retrieve", s(&q), "--candidates", s(&c), "--predictions", s(&p), "--merge", merge, "--out", s(&out)]);
        let r = json(&out);
        assert_eq!(r["config"]["parameters"]["merge"], merge);
        assert_eq!(r["queries"][0]["n_spectra"], 2);
        assert_eq!(r["queries"][0]["rank"], true_rank, "{merge}");
    }
}

#[test]
fn compound_library_candidates_respect_mass_window() {
    let dir = tempfile::tempdir().unwrap();
    // Ethanol C2H6O: 2 * 12 + 6 * 1.00782503223 + 15.99491461957, plus a proton.
    let mz = 2.0 * 12.0 + 6.0 * 1.007_825_032_23 + 15.994_914_619_57 + 1.007_276_466_62;
    let text = format!(
        "{HEADER}\nq0\tCCO\t\t\t\t[M+H]+\t\t{mz:.7}\t10:1\nq1\tCOC\t\t\t\t[M+H]+\t\t{mz:.7}\t10:1\nq2\tCCC\t\t\t\t[M+X]+\t\t45\t10:1\n"
    );
    let q = write(dir.path(), "q.tsv", &text);
    let lib = write(
        dir.path(),
        "lib.tsv",
        "compound_id\tsmiles\nc1\tCCO\nc2\tCOC\nc3\tCCC\nc4\t[Na+].[Cl-]\nc5\tC[N+](C)(C)C\nc6\tOCC\nc7\t[13CH3]CO\nc8\tC1CC\n",
    );
    let p = write(dir.path(), "p.tsv", "c1\t10:1\nc2\t500:1\n");
    let out = dir.path().join("r.json");
    run_ok(&["retrieve", s(&q), "--compounds", s(&lib), "--predictions", s(&p), "--out", s(&out)]);
    let r = json(&out);
    let k = &r["counters"];
    assert_eq!(k["invalid_compounds"], 1);
    assert_eq!(k["multi_fragment_compounds"], 1);
    assert_eq!(k["unsupported_compounds"], 2);
    assert_eq!(k["duplicate_compounds"], 1);
    assert_eq!(k["dropped_unsupported_precursor"], 1);
    let per = r["queries"].as_array().unwrap();
    assert_eq!(per.len(), 2);
    assert_eq!(per[0]["query_id"], "q0");
    assert_eq!(per[0]["n_candidates"], 2);
    assert_eq!(per[0]["rank"], 0);
    assert_eq!(per[1]["true_candidate_id"], "c2");
    assert_eq!(per[1]["rank"], 1);

    // A cap of one keeps the tie-break winner CCO; COC's query loses its true candidate.
    let capped = dir.path().join("capped.json");
    run_ok(&["retrieve", s(&q), "--compounds", s(&lib), "--predictions", s(&p), "--cap", "1", "--out", s(&capped)]);
    let r = json(&capped);
    assert_eq!(r["counters"]["dropped_true_candidate_outside_cap"], 1);
    assert_eq!(r["queries"].as_array().unwrap().len(), 1);

    // A precursor shifted by 20 ppm leaves no compound inside 10 ppm.
    let shifted = text.replace(&format!("{mz:.7}"), &format!("{:.7}", mz * (1.0 + 20e-6)));
    let q2 = write(dir.path(), "q2.tsv", &shifted);
    let far = dir.path().join("far.json");
    run_ok(&["retrieve", s(&q2), "--compounds", s(&lib), "--predictions", s(&p), "--ppm", "10", "--out", s(&far)]);
    assert_eq!(json(&far)["counters"]["dropped_no_candidates"], 2);
}

#[test]
fn retrieve_requires_a_candidate_source() {
    let dir = tempfile::tempdir().unwrap();
    let q = write(dir.path(), "q.tsv", &dataset(&[("q0", "CCO", "10:1")]));
    let p = write(dir.path(), "p.tsv", "");
    assert_eq!(run(&["retrieve", s(&q), "--predictions", s(&p)]), 1);
    assert_eq!(run(&["retrieve", s(&q), "--predictions", s(&p), "--candidates", "a", "--compounds", "b"]), 1);
    assert_eq!(run(&["no-such-command"]), 1);
    assert_eq!(run(&["score", "/nonexistent/ds.tsv", "--predictions", s(&p)]), 2);
}
