//! Accuracy of the source ANN, the converted SNN and SRP inference.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use srp_core::{SnnModel, Tensor};

use crate::checkpoint::Checkpoint;
use crate::dataset::DatasetHandle;
use crate::error::{Result, ToolError};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub timesteps: Vec<usize>,
    pub tau: usize,
    pub srp: bool,
    /// Replace the time-stepped SNN with the layerwise constant-current
    /// closed form. With `T = L` this reproduces the ANN exactly.
    pub even_timing: bool,
}

/// One row of the metrics file. `acc_srp` is empty when SRP is off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    #[serde(rename = "T")]
    pub timesteps: usize,
    pub acc_ann: f64,
    pub acc_snn: f64,
    pub acc_srp: Option<f64>,
}

fn fraction(hits: &[bool]) -> f64 {
    hits.iter().filter(|&&h| h).count() as f64 / hits.len().max(1) as f64
}

/// Per-sample correctness, evaluated in parallel and collected in input order.
fn hits<F>(inputs: &[Tensor], labels: &[usize], predict: F) -> Result<Vec<bool>>
where
    F: Fn(&Tensor) -> srp_core::Result<usize> + Sync,
{
    inputs
        .par_iter()
        .zip(labels)
        .map(|(x, &y)| Ok(predict(x)? == y))
        .collect()
}

pub fn run_eval(
    ckpt: &Checkpoint,
    data: &DatasetHandle,
    config: &EvalConfig,
) -> Result<Vec<MetricsRow>> {
    if data.is_empty() {
        return Err(ToolError::Data("evaluation set is empty".into()));
    }
    if data.sample_shape != ckpt.network.input_shape() {
        return Err(ToolError::Data(format!(
            "samples have shape {:?}, model expects {:?}",
            data.sample_shape,
            ckpt.network.input_shape()
        )));
    }
    let inputs = data.tensors(&ckpt.standardization);
    let labels = &data.labels;
    let snn: SnnModel = ckpt.snn_model()?;
    let acc_ann = fraction(&hits(&inputs, labels, |x| ckpt.network.predict(x))?);
    config
        .timesteps
        .iter()
        .map(|&t| {
            let acc_snn = fraction(&hits(&inputs, labels, |x| {
                let out = if config.even_timing {
                    snn.simulate_even_timing(x, t)?
                } else {
                    snn.simulate(x, t)?
                };
                Ok(out.predicted_class())
            })?);
            let acc_srp = if config.srp {
                Some(fraction(&hits(&inputs, labels, |x| {
                    Ok(snn.srp_inference(x, config.tau, t)?.predicted_class())
                })?))
            } else {
                None
            };
            Ok(MetricsRow {
                timesteps: t,
                acc_ann,
                acc_snn,
                acc_srp,
            })
        })
        .collect()
}

pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| ToolError::csv(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| ToolError::csv(path, e))?;
    }
    w.flush().map_err(|e| ToolError::io(path, e))
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| ToolError::csv(path, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| ToolError::csv(path, e)))
        .collect()
}
