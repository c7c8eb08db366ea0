use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::checks::Check;
use crate::error::{Error, Result};
use crate::harness::runs::{RatioRun, RecurrenceData, StructureRun};
use crate::num::to_decimal;

/// Every check of one verification run, with the settings that produced it.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub config_name: Option<String>,
    pub config_digest: String,
    pub precision_bits: u32,
    pub quad_nodes: usize,
    pub lambda_max: u64,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// The deterministic part of the report.
    pub fn body(&self) -> Value {
        let mut v = serde_json::to_value(self).unwrap_or(Value::Null);
        v["passed"] = Value::Bool(self.passed());
        v
    }
}

fn timestamp() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn write_json(path: &Path, body: Value) -> Result<()> {
    let doc = json!({"generated_unix": timestamp(), "body": body});
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::Io(std::io::Error::other(e)))
}

fn flush(mut w: csv::Writer<fs::File>) -> Result<()> {
    w.flush()?;
    Ok(())
}

fn row<W: Write>(w: &mut csv::Writer<W>, fields: &[String]) -> Result<()> {
    w.write_record(fields).map_err(|e| Error::Io(std::io::Error::other(e)))
}

/// Columns n, lambda, rho, a_n.
pub fn write_recurrence_csv(path: &Path, data: &RecurrenceData) -> Result<()> {
    let mut w = csv_writer(path)?;
    row(&mut w, &["n".into(), "lambda".into(), "rho".into(), "a_n".into()])?;
    for (n, lam, rho, a) in data.rows() {
        row(&mut w, &[n.to_string(), lam.to_string(), rho.to_string(), to_decimal(a)])?;
    }
    flush(w)
}

/// Columns rho, lambda, k, p_ratio, psi_ratio; empty where not defined.
pub fn write_ratio_csv(path: &Path, runs: &[RatioRun]) -> Result<()> {
    let mut w = csv_writer(path)?;
    row(&mut w, &["rho".into(), "lambda".into(), "k".into(), "p_ratio".into(), "psi_ratio".into()])?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for r in runs {
        for d in &r.rows {
            row(&mut w, &[r.rho.to_string(), d.lambda.to_string(), d.k.to_string(), opt(d.p_ratio), opt(d.psi_ratio)])?;
        }
    }
    flush(w)
}

/// Columns n, k, index, zero.
pub fn write_zeros_csv(path: &Path, run: &StructureRun) -> Result<()> {
    let mut w = csv_writer(path)?;
    row(&mut w, &["n".into(), "k".into(), "index".into(), "zero".into()])?;
    for zs in &run.zeros {
        for (i, z) in zs.zeros.iter().enumerate() {
            row(&mut w, &[zs.n.to_string(), zs.k.to_string(), i.to_string(), to_decimal(z)])?;
        }
    }
    flush(w)
}

/// Writes checks.json for one run.
pub fn write_checks(dir: &Path, report: &VerificationReport) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("checks.json");
    write_json(&path, report.body())?;
    Ok(path)
}

fn collect_checks(dir: &Path, out: &mut Vec<(PathBuf, Value)>) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    entries.sort();
    for path in entries {
        if path.is_dir() {
            collect_checks(&path, out)?;
        } else if path.file_name().is_some_and(|n| n == "checks.json") {
            let doc: Value = serde_json::from_str(&fs::read_to_string(&path)?)?;
            out.push((path, doc));
        }
    }
    Ok(())
}

/// Merges every checks.json below `dir` into one report.
pub fn emit_report(dir: &Path, out: &Path) -> Result<Value> {
    let mut found = Vec::new();
    collect_checks(dir, &mut found)?;
    if found.is_empty() {
        return Err(Error::Config(format!("no checks.json under {}", dir.display())));
    }
    let mut runs = Vec::new();
    let mut total = 0usize;
    let mut failed = 0usize;
    for (path, doc) in &found {
        let body = doc.get("body").cloned().unwrap_or_else(|| doc.clone());
        let checks = body.get("checks").and_then(Value::as_array).cloned().unwrap_or_default();
        total += checks.len();
        failed += checks.iter().filter(|c| c.get("passed") != Some(&Value::Bool(true))).count();
        let rel = path.strip_prefix(dir).unwrap_or(path);
        runs.push(json!({"source": rel.display().to_string(), "report": body}));
    }
    let body = json!({"checks": total, "failed": failed, "passed": failed == 0, "runs": runs});
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    write_json(out, body.clone())?;
    Ok(body)
}
