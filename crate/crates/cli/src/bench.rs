use std::path::{Path, PathBuf};
use std::time::Instant;

use ldst::approx::approximate;
use ldst::oracle::exact_optimum;
use ldst::{Error, Instance};
use rayon::prelude::*;
use serde::Serialize;

use crate::format::sig_opt;

#[derive(Debug, Serialize)]
pub struct Row {
    pub instance: String,
    /// "ok", "cap" or "error".
    pub status: String,
    pub optimum: Option<f64>,
    pub value: Option<f64>,
    pub ratio: Option<f64>,
    pub grid_size: Option<usize>,
    pub wall_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Instance files of `dir` in name order; certificate sidecars are skipped.
pub fn corpus(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if path.is_file() && name.ends_with(".json") && !name.ends_with(".cert.json") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn run(path: &Path, eps: f64) -> Row {
    let start = Instant::now();
    let mut row = Row {
        instance: path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        status: "ok".into(),
        optimum: None,
        value: None,
        ratio: None,
        grid_size: None,
        wall_ms: 0.0,
        error: None,
    };
    let fail = |row: &mut Row, e: Error| {
        row.status = if matches!(e, Error::CapExceeded { .. }) { "cap" } else { "error" }.into();
        row.error = Some(e.to_string());
    };
    match crate::read_instance(path) {
        Err(e) => fail(&mut row, e),
        Ok(instance) => {
            bench_instance(&instance, eps, &mut row, fail);
        }
    }
    row.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    row
}

fn bench_instance(instance: &Instance, eps: f64, row: &mut Row, fail: impl Fn(&mut Row, Error)) {
    match approximate(instance, eps) {
        Ok((_, value, report)) => {
            row.value = Some(value);
            row.grid_size = Some(report.grid_size);
        }
        Err(e) => return fail(row, e),
    }
    match exact_optimum(instance) {
        Ok((_, opt)) => {
            row.optimum = Some(opt);
            if opt > 0.0 {
                row.ratio = row.value.map(|v| v / opt);
            }
        }
        Err(e) => fail(row, e),
    }
}

pub fn bench(dir: &Path, eps: f64) -> std::io::Result<Vec<Row>> {
    let files = corpus(dir)?;
    Ok(files.par_iter().map(|p| run(p, eps)).collect())
}

pub fn table(rows: &[Row]) -> String {
    let mut out = format!(
        "{:<32} {:>6} {:>14} {:>14} {:>14} {:>6} {:>10}\n",
        "instance", "status", "optimum", "value", "ratio", "grid", "ms"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<32} {:>6} {:>14} {:>14} {:>14} {:>6} {:>10.1}\n",
            r.instance,
            r.status,
            sig_opt(r.optimum),
            sig_opt(r.value),
            sig_opt(r.ratio),
            r.grid_size.map_or_else(|| "-".to_string(), |g| g.to_string()),
            r.wall_ms
        ));
    }
    out
}
