//! Run reports: per-seed learning curves, aggregate accuracy, and the
//! machine- and human-readable summaries the `report` command emits.

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::TrainError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_acc: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub curve: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub test_accuracy: f64,
    pub wall_clock_secs: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub param_count: usize,
    pub runs: Vec<SeedRun>,
    pub mean_test_accuracy: f64,
    /// Population standard deviation over the per-seed test accuracies.
    pub stddev_test_accuracy: f64,
    pub total_wall_clock_secs: f64,
}

impl RunReport {
    pub fn new(
        config: ExperimentConfig,
        param_count: usize,
        runs: Vec<SeedRun>,
        elapsed: Duration,
    ) -> Self {
        let accs: Vec<f64> = runs.iter().map(|r| r.test_accuracy).collect();
        let (mean, stddev) = mean_stddev(&accs);
        RunReport {
            config,
            param_count,
            runs,
            mean_test_accuracy: mean,
            stddev_test_accuracy: stddev,
            total_wall_clock_secs: elapsed.as_secs_f64(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), TrainError> {
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, TrainError> {
        let json = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&json)?)
    }
}

pub fn mean_stddev(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
    (mean, var.sqrt())
}

/// Loads every `report.json` directly in `dir` or one level below it,
/// sorted by path so output order is stable.
pub fn collect_reports(dir: &Path) -> Result<Vec<RunReport>, TrainError> {
    let mut paths = Vec::new();
    let direct = dir.join("report.json");
    if direct.is_file() {
        paths.push(direct);
    }
    if dir.is_dir() {
        for entry in std::fs::read_dir(dir)? {
            let nested = entry?.path().join("report.json");
            if nested.is_file() {
                paths.push(nested);
            }
        }
    }
    paths.sort();
    paths.iter().map(|p| RunReport::read(p)).collect()
}

fn row(report: &RunReport) -> Vec<String> {
    let config = &report.config;
    let seeds: Vec<String> = config.seeds.iter().map(|s| s.to_string()).collect();
    vec![
        config.experiment.label().to_string(),
        config.model.label().to_string(),
        config.activation.label().to_string(),
        config.signed.to_string(),
        report.param_count.to_string(),
        format!("{:.4}", report.mean_test_accuracy),
        format!("{:.4}", report.stddev_test_accuracy),
        seeds.join(" "),
        format!("{:.1}", report.total_wall_clock_secs),
    ]
}

const COLUMNS: [&str; 9] = [
    "experiment",
    "model",
    "activation",
    "signed",
    "params",
    "mean_acc",
    "stddev",
    "seeds",
    "secs",
];

pub fn csv(reports: &[RunReport]) -> String {
    let mut out = COLUMNS.join(",");
    out.push('\n');
    for report in reports {
        // Seeds are space-separated inside their cell to keep the CSV flat.
        out.push_str(&row(report).join(","));
        out.push('\n');
    }
    out
}

pub fn table(reports: &[RunReport]) -> String {
    let rows: Vec<Vec<String>> = reports.iter().map(row).collect();
    let mut widths: Vec<usize> = COLUMNS.iter().map(|c| c.len()).collect();
    for r in &rows {
        for (w, cell) in widths.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut push_row = |cells: &[String]| {
        let line: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    };
    push_row(&COLUMNS.map(String::from));
    for r in &rows {
        push_row(r);
    }
    out
}
