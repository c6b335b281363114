//! The source ANN: an ordered list of layers with QCFS after every weighted
//! layer except the final classifier.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{Error, Result};
use crate::layers::{describe, LayerParams};
use crate::qcfs::QcfsActivation;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub params: LayerParams,
    pub activation: Option<QcfsActivation>,
}

impl Layer {
    pub fn linear(params: LayerParams) -> Self {
        Self {
            params,
            activation: None,
        }
    }

    pub fn activated(params: LayerParams, activation: QcfsActivation) -> Self {
        Self {
            params,
            activation: Some(activation),
        }
    }
}

/// A maximal run of linear layers ending in one weighted layer.
///
/// Stage `l` maps the activation output of stage `l-1` (or the network input)
/// to the pre-activation `y^{l-1}` of activation layer `l`. The last stage is the
/// classifier and carries no activation.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub layers: Range<usize>,
    pub input_shape: Vec<usize>,
    pub output_shape: Vec<usize>,
}

/// Per activation layer: pre-activation `y^{l-1}` and post-activation `a^l`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationRecord {
    pub pre: Vec<Tensor>,
    pub post: Vec<Tensor>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    input_shape: Vec<usize>,
    layers: Vec<Layer>,
    stages: Vec<Stage>,
}

impl NetworkSpec {
    pub fn new(input_shape: Vec<usize>, layers: Vec<Layer>) -> Result<Self> {
        let mut stages = Vec::new();
        let mut shape = input_shape.clone();
        let mut stage_start = 0;
        let mut stage_input = shape.clone();
        for (i, layer) in layers.iter().enumerate() {
            shape = layer.params.output_shape(&shape)?;
            let weighted = layer.params.is_weighted();
            if layer.activation.is_some() && !weighted {
                return Err(Error::InvalidNetwork(format!(
                    "layer {i} ({}) cannot carry an activation",
                    describe(&layer.params)
                )));
            }
            if weighted {
                stages.push(Stage {
                    layers: stage_start..i + 1,
                    input_shape: core::mem::take(&mut stage_input),
                    output_shape: shape.clone(),
                });
                stage_start = i + 1;
                stage_input = shape.clone();
            }
        }
        if stages.is_empty() {
            return Err(Error::InvalidNetwork(
                "network has no weighted layer".into(),
            ));
        }
        if stage_start != layers.len() {
            return Err(Error::InvalidNetwork(
                "the final layer must be the weighted classifier".into(),
            ));
        }
        let last = stages.len() - 1;
        for (s, stage) in stages.iter().enumerate() {
            let end = stage.layers.end - 1;
            let has_act = layers[end].activation.is_some();
            if s == last && has_act {
                return Err(Error::InvalidNetwork(
                    "final classifier layer must not have an activation".into(),
                ));
            }
            if s != last && !has_act {
                return Err(Error::InvalidNetwork(format!(
                    "weighted layer {end} needs a QCFS activation"
                )));
            }
        }
        Ok(Self {
            input_shape,
            layers,
            stages,
        })
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    /// Number of QCFS (spiking after conversion) layers.
    pub fn activation_layers(&self) -> usize {
        self.stages.len() - 1
    }

    /// Activation of activation layer `l` (0-based).
    pub fn activation(&self, l: usize) -> &QcfsActivation {
        let end = self.stages[l].layers.end - 1;
        self.layers[end]
            .activation
            .as_ref()
            .expect("validated: every non-final stage has an activation")
    }

    pub fn activations(&self) -> impl Iterator<Item = &QcfsActivation> + '_ {
        (0..self.activation_layers()).map(move |l| self.activation(l))
    }

    pub fn output_width(&self) -> usize {
        self.stages[self.stages.len() - 1]
            .output_shape
            .iter()
            .product()
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.params.param_count()).sum()
    }

    /// Applies the linear layers of `stage`, bias included.
    pub fn stage_forward(&self, stage: usize, input: &Tensor) -> Result<Tensor> {
        let st = &self.stages[stage];
        input.expect_shape(&st.input_shape)?;
        let mut x = input.clone();
        for layer in &self.layers[st.layers.clone()] {
            x = layer.params.forward(&x)?;
        }
        Ok(x)
    }

    /// ANN forward pass. Returns raw logits and every layer's `y^{l-1}` / `a^l`.
    pub fn forward(&self, input: &Tensor) -> Result<(Tensor, ActivationRecord)> {
        input.expect_shape(&self.input_shape)?;
        let mut record = ActivationRecord {
            pre: Vec::with_capacity(self.activation_layers()),
            post: Vec::with_capacity(self.activation_layers()),
        };
        let mut x = input.clone();
        for l in 0..self.stages.len() {
            let y = self.stage_forward(l, &x)?;
            if l == self.activation_layers() {
                return Ok((y, record));
            }
            let act = self.activation(l);
            x = y.map(|v| act.apply(v));
            record.pre.push(y);
            record.post.push(x.clone());
        }
        unreachable!("the loop returns at the classifier stage")
    }

    /// Index of the largest logit.
    pub fn predict(&self, input: &Tensor) -> Result<usize> {
        Ok(argmax(self.forward(input)?.0.data()))
    }
}

/// `ann_forward` under its operation name.
pub fn ann_forward(net: &NetworkSpec, input: &Tensor) -> Result<(Tensor, ActivationRecord)> {
    net.forward(input)
}

/// First index of the maximum; NaN entries never win.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] || values[best].is_nan() {
            best = i;
        }
    }
    best
}
