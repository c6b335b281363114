//! Model checkpoints.
//!
//! Layout:
//!
//! | bytes | content |
//! |---|---|
//! | 4 | magic `SRPQ` |
//! | 4 | format version, u32 little-endian |
//! | 4 | header length `h`, u32 little-endian |
//! | h | UTF-8 JSON [`Header`] |
//! | 4·n | `n = payload_floats` little-endian f32: for each weighted layer in order, weights then bias |
//!
//! Weights are narrowed to f32 on save. Thresholds, potentials, λ and the
//! standardization constants live in the JSON header and keep full precision.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use srp_core::{
    AvgPool2d, Conv2d, Dense, Layer, LayerParams, NetworkSpec, QcfsActivation, SnnModel,
};

use crate::dataset::Standardization;
use crate::error::{Result, ToolError};

pub const MAGIC: &[u8; 4] = b"SRPQ";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationHeader {
    pub steps: u32,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LayerHeader {
    Dense {
        inputs: usize,
        outputs: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        activation: Option<ActivationHeader>,
    },
    Conv2d {
        in_channels: usize,
        out_channels: usize,
        kernel_size: usize,
        stride: usize,
        padding: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        activation: Option<ActivationHeader>,
    },
    Avgpool2d {
        kernel_size: usize,
        stride: usize,
    },
    Flatten,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnnHeader {
    pub thresholds: Vec<f64>,
    pub initial_potentials: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub input_shape: Vec<usize>,
    pub layers: Vec<LayerHeader>,
    pub standardization: Standardization,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snn: Option<SnnHeader>,
    pub payload_floats: usize,
}

/// A trained network plus everything evaluation needs to reuse it.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub network: NetworkSpec,
    pub standardization: Standardization,
    pub snn: Option<SnnHeader>,
}

impl Checkpoint {
    pub fn new(network: NetworkSpec, standardization: Standardization) -> Self {
        Self {
            network,
            standardization,
            snn: None,
        }
    }

    pub fn with_snn(snn: &SnnModel, standardization: Standardization) -> Self {
        Self {
            network: snn.network().clone(),
            standardization,
            snn: Some(SnnHeader {
                thresholds: snn.thresholds().to_vec(),
                initial_potentials: snn.initial_potentials().to_vec(),
            }),
        }
    }

    /// The stored SNN parameters, or a fresh conversion when none are stored.
    pub fn snn_model(&self) -> Result<SnnModel> {
        Ok(match &self.snn {
            Some(s) => SnnModel::from_parts(
                self.network.clone(),
                s.thresholds.clone(),
                s.initial_potentials.clone(),
            )?,
            None => srp_core::convert(&self.network)?,
        })
    }

    /// The network as it will read back: weights rounded through f32.
    pub fn narrowed(mut self) -> Result<Self> {
        let bytes = self.to_bytes()?;
        let back = Self::from_bytes(&bytes, Path::new("<memory>"))?;
        self.network = back.network;
        Ok(self)
    }

    pub fn header(&self) -> Header {
        let layers = self
            .network
            .layers()
            .iter()
            .map(|layer| {
                let activation = layer.activation.map(|a| ActivationHeader {
                    steps: a.steps(),
                    lambda: a.lambda(),
                });
                match &layer.params {
                    LayerParams::Dense(d) => LayerHeader::Dense {
                        inputs: d.inputs,
                        outputs: d.outputs,
                        activation,
                    },
                    LayerParams::Conv2d(c) => LayerHeader::Conv2d {
                        in_channels: c.in_channels,
                        out_channels: c.out_channels,
                        kernel_size: c.kernel_size,
                        stride: c.stride,
                        padding: c.padding,
                        activation,
                    },
                    LayerParams::AvgPool2d(p) => LayerHeader::Avgpool2d {
                        kernel_size: p.kernel_size,
                        stride: p.stride,
                    },
                    LayerParams::Flatten => LayerHeader::Flatten,
                }
            })
            .collect();
        Header {
            input_shape: self.network.input_shape().to_vec(),
            layers,
            standardization: self.standardization,
            snn: self.snn.clone(),
            payload_floats: self.network.param_count(),
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = serde_json::to_vec(&self.header())
            .map_err(|e| ToolError::Data(format!("checkpoint header: {e}")))?;
        let mut out = Vec::with_capacity(12 + header.len() + 4 * self.network.param_count());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(&header);
        for layer in self.network.layers() {
            for part in layer.params.params() {
                for &v in part {
                    out.extend_from_slice(&(v as f32).to_le_bytes());
                }
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let format = |offset: usize, message: String| ToolError::Format {
            path: path.to_path_buf(),
            offset: offset as u64,
            message,
        };
        let u32_at = |offset: usize| -> Result<u32> {
            bytes
                .get(offset..offset + 4)
                .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
                .ok_or_else(|| format(offset, "truncated preamble".into()))
        };
        if bytes.get(..4) != Some(MAGIC.as_slice()) {
            return Err(format(0, "not an SRPQ checkpoint".into()));
        }
        let version = u32_at(4)?;
        if version != VERSION {
            return Err(format(4, format!("unsupported version {version}")));
        }
        let header_len = u32_at(8)? as usize;
        let header_bytes = bytes
            .get(12..12 + header_len)
            .ok_or_else(|| format(12, format!("header of {header_len} bytes is truncated")))?;
        let header: Header = serde_json::from_slice(header_bytes)
            .map_err(|e| format(12 + e.column().saturating_sub(1), format!("header: {e}")))?;
        let payload_start = 12 + header_len;
        let payload = &bytes[payload_start..];
        if payload.len() != 4 * header.payload_floats {
            return Err(format(
                payload_start,
                format!(
                    "payload has {} bytes, header declares {} floats",
                    payload.len(),
                    header.payload_floats
                ),
            ));
        }
        let mut floats = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64);
        let mut take = |n: usize| -> Vec<f64> { floats.by_ref().take(n).collect() };

        let mut layers = Vec::with_capacity(header.layers.len());
        for (i, lh) in header.layers.iter().enumerate() {
            let act = |a: &Option<ActivationHeader>| -> Result<Option<QcfsActivation>> {
                a.as_ref()
                    .map(|a| QcfsActivation::new(a.steps, a.lambda))
                    .transpose()
                    .map_err(|e| format(12, format!("layer {i}: {e}")))
            };
            let (params, activation) = match lh {
                LayerHeader::Dense {
                    inputs,
                    outputs,
                    activation,
                } => {
                    let w = take(inputs * outputs);
                    let b = take(*outputs);
                    let d = Dense::new(*inputs, *outputs, w, b)
                        .map_err(|e| format(payload_start, format!("layer {i}: {e}")))?;
                    (LayerParams::Dense(d), act(activation)?)
                }
                LayerHeader::Conv2d {
                    in_channels,
                    out_channels,
                    kernel_size,
                    stride,
                    padding,
                    activation,
                } => {
                    let mut c =
                        Conv2d::zeros(*in_channels, *out_channels, *kernel_size, *stride, *padding);
                    let w = take(c.weights.len());
                    let b = take(c.bias.len());
                    if w.len() != c.weights.len() || b.len() != c.bias.len() {
                        return Err(format(
                            payload_start,
                            format!("layer {i}: payload too short"),
                        ));
                    }
                    c.weights = w;
                    c.bias = b;
                    (LayerParams::Conv2d(c), act(activation)?)
                }
                LayerHeader::Avgpool2d {
                    kernel_size,
                    stride,
                } => (
                    LayerParams::AvgPool2d(AvgPool2d {
                        kernel_size: *kernel_size,
                        stride: *stride,
                    }),
                    None,
                ),
                LayerHeader::Flatten => (LayerParams::Flatten, None),
            };
            layers.push(Layer { params, activation });
        }
        let network = NetworkSpec::new(header.input_shape.clone(), layers)
            .map_err(|e| format(12, format!("network: {e}")))?;
        if network.param_count() != header.payload_floats {
            return Err(format(
                payload_start,
                format!(
                    "layers need {} floats, header declares {}",
                    network.param_count(),
                    header.payload_floats
                ),
            ));
        }
        let ckpt = Self {
            network,
            standardization: header.standardization,
            snn: header.snn,
        };
        if ckpt.snn.is_some() {
            ckpt.snn_model()
                .map_err(|e| format(12, format!("snn parameters: {e}")))?;
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(|e| ToolError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| ToolError::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }
}
