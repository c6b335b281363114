//! Per-neuron, per-step simulation dumps for debugging small fixtures.

use std::path::Path;

use serde::{Deserialize, Serialize};
use srp_core::snn::TraceRow;

use crate::error::{Result, ToolError};

/// `u` is the potential after integrating the input current, `s` the spike
/// (0 or 1) and `v` the potential after reset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub layer: usize,
    pub neuron: usize,
    pub t: usize,
    pub u: f64,
    pub s: u8,
    pub v: f64,
}

impl From<&TraceRow> for TraceRecord {
    fn from(r: &TraceRow) -> Self {
        Self {
            layer: r.layer,
            neuron: r.neuron,
            t: r.t,
            u: r.u,
            s: u8::from(r.spike),
            v: r.v,
        }
    }
}

pub fn write_trace(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| ToolError::csv(path, e))?;
    for row in rows {
        w.serialize(TraceRecord::from(row))
            .map_err(|e| ToolError::csv(path, e))?;
    }
    w.flush().map_err(|e| ToolError::io(path, e))
}
