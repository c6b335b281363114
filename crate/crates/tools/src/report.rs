//! Error-report and theorem-run output files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use srp_core::analysis::{LayerErrorStats, TheoremInstance};
use srp_core::{ErrorReport, TheoremRun, UnevennessCase};

use crate::error::{Result, ToolError};

/// One `(layer, case, fraction)` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRow {
    pub layer: usize,
    pub case: String,
    pub fraction: f64,
}

pub fn case_rows(report: &ErrorReport) -> Vec<CaseRow> {
    report
        .layers
        .iter()
        .enumerate()
        .flat_map(|(layer, stats)| {
            UnevennessCase::ALL.iter().map(move |&c| CaseRow {
                layer,
                case: c.label().to_string(),
                fraction: stats.fraction(c),
            })
        })
        .collect()
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| ToolError::csv(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| ToolError::csv(path, e))?;
    }
    w.flush().map_err(|e| ToolError::io(path, e))
}

pub fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| ToolError::csv(path, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| ToolError::csv(path, e)))
        .collect()
}

pub fn write_case_csv(path: &Path, report: &ErrorReport) -> Result<()> {
    write_rows(path, &case_rows(report))
}

/// Stacked-bar data: one row per `(series, layer)` with a column per case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub series: String,
    pub layer: usize,
    pub no_error: f64,
    pub case1: f64,
    pub case2: f64,
    pub case3: f64,
    pub case4: f64,
}

pub fn plot_rows(series: &str, report: &ErrorReport) -> Vec<PlotRow> {
    report
        .layers
        .iter()
        .enumerate()
        .map(|(layer, s)| {
            let f = s.fractions();
            PlotRow {
                series: series.to_string(),
                layer,
                no_error: f[0],
                case1: f[1],
                case2: f[2],
                case3: f[3],
                case4: f[4],
            }
        })
        .collect()
}

pub fn write_plot_csv(path: &Path, rows: &[PlotRow]) -> Result<()> {
    write_rows(path, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSummary {
    pub layer: usize,
    pub neurons: usize,
    pub fractions: BTreeMap<String, f64>,
    pub mean_abs_error: f64,
    pub max_abs_error: f64,
    /// Most frequent error case, ignoring `no_error`; `None` if error-free.
    pub dominant_case: Option<String>,
}

fn layer_summary(layer: usize, s: &LayerErrorStats) -> LayerSummary {
    let dominant = UnevennessCase::ALL[1..]
        .iter()
        .copied()
        .filter(|&c| s.counts[c.index()] > 0)
        .max_by_key(|&c| (s.counts[c.index()], std::cmp::Reverse(c.index())));
    LayerSummary {
        layer,
        neurons: s.neurons,
        fractions: UnevennessCase::ALL
            .iter()
            .map(|&c| (c.label().to_string(), s.fraction(c)))
            .collect(),
        mean_abs_error: s.mean_abs_error(),
        max_abs_error: s.max_abs_error,
        dominant_case: dominant.map(|c| c.label().to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub name: String,
    pub error_type: String,
    pub layers: Vec<LayerSummary>,
}

pub fn summarize(name: &str, report: &ErrorReport) -> ReportSummary {
    ReportSummary {
        name: name.to_string(),
        error_type: report.error_type.label().to_string(),
        layers: report
            .layers
            .iter()
            .enumerate()
            .map(|(l, s)| layer_summary(l, s))
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSummary {
    pub timesteps: usize,
    pub tau: usize,
    pub samples: usize,
    pub reports: Vec<ReportSummary>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| ToolError::Data(format!("{}: {e}", path.display())))?;
    fs::write(path, text + "\n").map_err(|e| ToolError::io(path, e))
}

/// One row per theorem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremRow {
    pub instance: usize,
    #[serde(rename = "T")]
    pub timesteps: usize,
    pub weights: String,
    pub counts: String,
    pub placements: usize,
    pub zero_activation: usize,
    pub violations: usize,
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

pub fn theorem_row(index: usize, run: &TheoremRun) -> TheoremRow {
    let TheoremInstance {
        weights,
        counts,
        timesteps,
        ..
    } = &run.instance;
    TheoremRow {
        instance: index,
        timesteps: *timesteps,
        weights: join(weights),
        counts: join(counts),
        placements: run.verdicts.len(),
        zero_activation: run
            .verdicts
            .iter()
            .filter(|v| v.clause == srp_core::TheoremClause::ZeroActivation)
            .count(),
        violations: run.failures().count(),
    }
}

pub fn write_theorem_csv(path: &Path, rows: &[TheoremRow]) -> Result<()> {
    write_rows(path, rows)
}
