use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::experiment::{Cell, Report};
use super::plot::render_plots;
use crate::error::{Error, Result};
use crate::stats::{write_importance_csv, write_ks_csv};

#[derive(Serialize)]
struct MatrixRow<'a> {
    protocol: &'a str,
    algorithm: &'a str,
    mode: &'a str,
    horizon_secs: Option<i64>,
    ratio: Option<f64>,
    n_features: usize,
    mean_accuracy: f64,
    accuracy_by_seed: String,
}

impl<'a> MatrixRow<'a> {
    fn new(protocol: &'a str, cell: &'a Cell, horizon_secs: Option<i64>, ratio: Option<f64>) -> Self {
        MatrixRow {
            protocol,
            algorithm: cell.algorithm.name(),
            mode: cell.mode.name(),
            horizon_secs,
            ratio,
            n_features: cell.n_features,
            mean_accuracy: cell.mean_accuracy,
            accuracy_by_seed: cell.accuracy.iter().map(f64::to_string).collect::<Vec<_>>().join(";"),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv output: {e}"))
}

pub fn write_matrix_csv(path: &Path, report: &Report) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for c in &report.matrix {
        w.serialize(MatrixRow::new("matrix", c, None, None)).map_err(csv_err)?;
    }
    for c in &report.early_detection {
        w.serialize(MatrixRow::new("early_detection", &c.cell, Some(c.horizon_secs), None))
            .map_err(csv_err)?;
    }
    for c in &report.one_page {
        w.serialize(MatrixRow::new("one_page", &c.cell, None, Some(c.ratio)))
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes `report.json`, the CSV tables and the plots under
/// `<output_dir>/<run_id>/`. Wall-clock time goes to `timing.json` so that
/// `report.json` depends only on the config.
pub fn write_outputs(report: &Report, runtime_secs: f64) -> Result<PathBuf> {
    let dir = report.config.output_dir.join(&report.run_id);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;

    let json = dir.join("report.json");
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    fs::write(&json, text).map_err(|e| Error::io(&json, e))?;

    write_matrix_csv(&dir.join("matrix.csv"), report)?;

    let mut reports = vec![report.importance.permutation.clone()];
    reports.extend(report.importance.gain.clone());
    let p = dir.join("importance.csv");
    write_importance_csv(create(&p)?, &reports)?;

    let p = dir.join("ks.csv");
    let rows: Vec<_> = report.ks_by_label.iter().chain(&report.ks_by_topic).cloned().collect();
    write_ks_csv(create(&p)?, &rows)?;

    let p = dir.join("timing.json");
    let timing = serde_json::json!({ "run_id": report.run_id, "runtime_secs": runtime_secs });
    fs::write(&p, format!("{timing:#}\n")).map_err(|e| Error::io(&p, e))?;

    render_plots(report, &dir.join("plots"))?;
    Ok(dir)
}

pub fn read_report(path: &Path) -> Result<Report> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
