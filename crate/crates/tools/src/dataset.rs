use serde::{Deserialize, Serialize};
use srp_core::Tensor;

use crate::error::{Result, ToolError};

/// Labelled samples stored contiguously. Image data is scaled to `[0, 1]`;
/// standardization is applied on access.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetHandle {
    pub sample_shape: Vec<usize>,
    pub values: Vec<f64>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub split: String,
}

/// Global scalar standardization `(x - mean) / std`, stored in checkpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: f64,
    pub std: f64,
}

impl Default for Standardization {
    fn default() -> Self {
        Self {
            mean: 0.0,
            std: 1.0,
        }
    }
}

impl DatasetHandle {
    pub fn new(
        sample_shape: Vec<usize>,
        values: Vec<f64>,
        labels: Vec<usize>,
        num_classes: usize,
        split: impl Into<String>,
    ) -> Result<Self> {
        let per: usize = sample_shape.iter().product();
        if per == 0 || values.len() != per * labels.len() {
            return Err(ToolError::Data(format!(
                "{} values do not split into {} samples of shape {:?}",
                values.len(),
                labels.len(),
                sample_shape
            )));
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(ToolError::Data(format!(
                "sample {i}: label {l} outside 0..{num_classes}"
            )));
        }
        Ok(Self {
            sample_shape,
            values,
            labels,
            num_classes,
            split: split.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `[N, ...sample_shape]`.
    pub fn shape(&self) -> Vec<usize> {
        let mut s = vec![self.len()];
        s.extend(&self.sample_shape);
        s
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        let per: usize = self.sample_shape.iter().product();
        &self.values[i * per..(i + 1) * per]
    }

    pub fn fit_standardization(&self) -> Standardization {
        let n = self.values.len().max(1) as f64;
        let mean = self.values.iter().sum::<f64>() / n;
        let var = self.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        Standardization {
            mean,
            std: if std > 0.0 { std } else { 1.0 },
        }
    }

    pub fn tensor(&self, i: usize, s: &Standardization) -> Tensor {
        let data = self
            .sample(i)
            .iter()
            .map(|v| (v - s.mean) / s.std)
            .collect();
        Tensor::new(self.sample_shape.clone(), data).expect("validated sample shape")
    }

    pub fn tensors(&self, s: &Standardization) -> Vec<Tensor> {
        (0..self.len()).map(|i| self.tensor(i, s)).collect()
    }

    /// First `n` samples (or all if fewer).
    pub fn head(&self, n: usize) -> Self {
        let n = n.min(self.len());
        let per: usize = self.sample_shape.iter().product();
        Self {
            sample_shape: self.sample_shape.clone(),
            values: self.values[..n * per].to_vec(),
            labels: self.labels[..n].to_vec(),
            num_classes: self.num_classes,
            split: self.split.clone(),
        }
    }
}
