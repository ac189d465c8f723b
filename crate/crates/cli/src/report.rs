use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use msbench_core::numfmt::{round9, sig9};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{CliError, Result};
use crate::settings::{config_hash, file_digest, Settings};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Where the primary artifact goes. Sidecar files (aggregates, rejects)
/// sit next to it and are only written when a path is given.
#[derive(Debug, Clone, Default)]
pub struct Output {
    pub path: Option<PathBuf>,
}

impl Output {
    pub fn write_main(&self, text: &str) -> Result<()> {
        match &self.path {
            Some(p) => write_file(p, text),
            None => std::io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::data(format!("stdout: {e}"))),
        }
    }

    /// `out/report.json` with suffix `aggregates.tsv` gives
    /// `out/report.aggregates.tsv`.
    pub fn sidecar(&self, suffix: &str) -> Option<PathBuf> {
        let p = self.path.as_ref()?;
        let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Some(p.with_file_name(format!("{stem}.{suffix}")))
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::in_file(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::in_file(path, e))
}

/// JSON run report. Keys serialize in sorted order; floats are rounded to
/// nine significant digits.
#[derive(Debug, Clone)]
pub struct Report {
    root: Map<String, Value>,
    aggregates: Vec<(String, Option<f64>)>,
}

impl Report {
    pub fn new(
        command: &str,
        settings: &Settings,
        params: Value,
        inputs: &[(&str, &Path)],
    ) -> Result<Report> {
        let config = settings.echo(command, params);
        let mut files = Map::new();
        for (role, path) in inputs {
            files.insert(
                role.to_string(),
                json!({ "path": path.display().to_string(), "sha256": file_digest(path)? }),
            );
        }
        let mut root = Map::new();
        root.insert("command".into(), json!(command));
        root.insert("tool_version".into(), json!(TOOL_VERSION));
        root.insert("seed".into(), json!(settings.seed));
        root.insert("config_hash".into(), json!(config_hash(&config)));
        root.insert("config".into(), config);
        root.insert("inputs".into(), Value::Object(files));
        Ok(Report { root, aggregates: Vec::new() })
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("report values serialize");
        self.root.insert(key.to_string(), v);
    }

    pub fn aggregate(&mut self, name: &str, value: Option<f64>) {
        self.aggregates.push((name.to_string(), value));
    }

    pub fn to_value(&self) -> Value {
        let mut root = self.root.clone();
        let aggs: Map<String, Value> = self
            .aggregates
            .iter()
            .map(|(k, v)| (k.clone(), v.map_or(Value::Null, |x| json!(x))))
            .collect();
        root.insert("aggregates".into(), Value::Object(aggs));
        let mut v = Value::Object(root);
        round_floats(&mut v);
        v
    }

    /// Two-column `metric`, `value` table; missing values are written as NA.
    pub fn aggregates_tsv(&self) -> String {
        let mut s = String::from("metric\tvalue\n");
        for (k, v) in &self.aggregates {
            let cell = v.map_or_else(|| "NA".to_string(), sig9);
            s.push_str(&format!("{k}\t{cell}\n"));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("json") + "\n"
    }

    /// Report as the primary output, aggregates as a sidecar.
    pub fn write(&self, out: &Output) -> Result<()> {
        out.write_main(&self.to_json())?;
        if let Some(p) = out.sidecar("aggregates.tsv") {
            write_file(&p, &self.aggregates_tsv())?;
        }
        Ok(())
    }

    /// Report as a `<stem>.report.json` sidecar of a command whose primary
    /// output is another artifact. Skipped when writing to stdout.
    pub fn write_sidecar(&self, out: &Output) -> Result<()> {
        if let Some(p) = out.sidecar("report.json") {
            write_file(&p, &self.to_json())?;
        }
        Ok(())
    }
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *v = json!(round9(x));
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut n) = (0.0, 0usize);
    for x in values {
        sum += x;
        n += 1;
    }
    (n > 0).then(|| sum / n as f64)
}
