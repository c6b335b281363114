//! Desk-scale training of QCFS networks: softmax cross-entropy, momentum SGD
//! with weight decay and a per-epoch cosine learning-rate schedule, and a
//! straight-through gradient for the quantized activation.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::layers::{AvgPool2d, Conv2d, Dense, LayerParams};
use crate::network::{argmax, Layer, NetworkSpec};
use crate::qcfs::QcfsActivation;
use crate::tensor::Tensor;

/// Thresholds are clamped to at least this value after every update.
pub const LAMBDA_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LrSchedule {
    /// `lr(e) = lr0 · ½ · (1 + cos(π e / E))`, evaluated per epoch.
    Cosine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub schedule: LrSchedule,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            momentum: 0.9,
            weight_decay: 5e-4,
            epochs: 10,
            batch_size: 32,
            seed: 0,
            schedule: LrSchedule::Cosine,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(invalid("learning rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(invalid("momentum must lie in [0, 1)"));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(invalid("weight decay must be non-negative"));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch size must be positive"));
        }
        Ok(())
    }

    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        match self.schedule {
            LrSchedule::Cosine => cosine_lr(self.learning_rate, epoch, self.epochs),
        }
    }
}

pub fn cosine_lr(initial: f64, epoch: usize, epochs: usize) -> f64 {
    if epochs == 0 {
        return initial;
    }
    let progress = epoch.min(epochs) as f64 / epochs as f64;
    initial * 0.5 * (1.0 + libm::cos(core::f64::consts::PI * progress))
}

/// Straight-through gradient of `qcfs(y)` with respect to `y` and `λ`.
///
/// The floor is treated as identity, so inside `0 ≤ y/λ ≤ 1` the activation
/// behaves like `y` and `∂f/∂λ = f/λ − y/λ`; above the range `f = λ`
/// (`∂f/∂λ = 1`) and below it everything is zero.
pub fn qcfs_backward(y: f64, lambda: f64, steps: u32, upstream: f64) -> Result<(f64, f64)> {
    let act = QcfsActivation::new(steps, lambda)?;
    Ok(qcfs_backward_unchecked(&act, y, upstream))
}

fn qcfs_backward_unchecked(act: &QcfsActivation, y: f64, upstream: f64) -> (f64, f64) {
    let lambda = act.lambda();
    let r = y / lambda;
    if r < 0.0 {
        (0.0, 0.0)
    } else if r > 1.0 {
        (0.0, upstream)
    } else {
        (upstream, upstream * (act.apply(y) / lambda - r))
    }
}

/// Parameter gradients laid out like the network: one flat buffer per layer
/// (weights then bias) and one scalar per activation layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Vec<f64>>,
    pub lambdas: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(net: &NetworkSpec) -> Self {
        Self {
            layers: net
                .layers()
                .iter()
                .map(|l| vec![0.0; l.params.param_count()])
                .collect(),
            lambdas: vec![0.0; net.layers().len()],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .flatten()
            .chain(&self.lambdas)
            .all(|g| g.is_finite())
    }

    fn scale(&mut self, factor: f64) {
        for g in self.layers.iter_mut().flatten() {
            *g *= factor;
        }
        for g in &mut self.lambdas {
            *g *= factor;
        }
    }
}

/// One momentum-SGD update with weight decay:
/// `v ← μ·v + (g + wd·p)`, `p ← p − lr·v`.
pub fn sgd_update(
    params: &mut [f64],
    velocity: &mut [f64],
    grads: &[f64],
    lr: f64,
    momentum: f64,
    weight_decay: f64,
) {
    for ((p, v), &g) in params.iter_mut().zip(velocity.iter_mut()).zip(grads) {
        let g = g + weight_decay * *p;
        *v = momentum * *v + g;
        *p -= lr * *v;
    }
}

/// Momentum buffers for every parameter of a network.
#[derive(Debug, Clone)]
pub struct Sgd {
    config: TrainConfig,
    velocity: Gradients,
}

impl Sgd {
    pub fn new(net: &NetworkSpec, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            velocity: Gradients::zeros_like(net),
        })
    }

    /// `sgd_step`: updates weights, biases and thresholds at the learning rate of `epoch`.
    pub fn step(&mut self, net: &mut NetworkSpec, grads: &Gradients, epoch: usize) {
        let lr = self.config.learning_rate_at(epoch);
        let (mu, wd) = (self.config.momentum, self.config.weight_decay);
        for (i, layer) in net.layers_mut().iter_mut().enumerate() {
            let vel = &mut self.velocity.layers[i];
            let grad = &grads.layers[i];
            let [w, b] = layer.params.params_mut();
            let nw = w.len();
            sgd_update(w, &mut vel[..nw], &grad[..nw], lr, mu, wd);
            // no decay on biases
            sgd_update(b, &mut vel[nw..], &grad[nw..], lr, mu, 0.0);
            if let Some(act) = &mut layer.activation {
                let mut lambda = [act.lambda()];
                sgd_update(
                    &mut lambda,
                    core::slice::from_mut(&mut self.velocity.lambdas[i]),
                    &grads.lambdas[i..i + 1],
                    lr,
                    mu,
                    wd,
                );
                act.set_lambda(lambda[0].max(LAMBDA_FLOOR));
            }
        }
    }
}

/// Softmax cross-entropy of one sample and its gradient with respect to the logits.
pub fn cross_entropy(logits: &[f64], label: usize) -> (f64, Vec<f64>) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| libm::exp(z - max)).collect();
    let sum: f64 = exps.iter().sum();
    let loss = libm::log(sum) - (logits[label] - max);
    let grad = exps
        .iter()
        .enumerate()
        .map(|(i, &e)| e / sum - if i == label { 1.0 } else { 0.0 })
        .collect();
    (loss, grad)
}

/// Loss, prediction and accumulated gradients for one labelled sample.
pub fn backprop(
    net: &NetworkSpec,
    input: &Tensor,
    label: usize,
    grads: &mut Gradients,
) -> Result<(f64, usize)> {
    let layers = net.layers();
    let mut inputs = Vec::with_capacity(layers.len());
    let mut pre = Vec::with_capacity(layers.len());
    let mut x = input.clone();
    for layer in layers {
        let y = layer.params.forward(&x)?;
        inputs.push(x);
        x = match &layer.activation {
            Some(act) => y.map(|v| act.apply(v)),
            None => y.clone(),
        };
        pre.push(y);
    }
    let (loss, mut grad) = cross_entropy(x.data(), label);
    let predicted = argmax(x.data());
    for i in (0..layers.len()).rev() {
        if let Some(act) = &layers[i].activation {
            let mut glambda = 0.0;
            for (g, &y) in grad.iter_mut().zip(pre[i].data()) {
                let (gy, gl) = qcfs_backward_unchecked(act, y, *g);
                *g = gy;
                glambda += gl;
            }
            grads.lambdas[i] += glambda;
        }
        let gin = layers[i]
            .params
            .backward(&inputs[i], &grad, &mut grads.layers[i]);
        grad = gin.into_data();
    }
    Ok((loss, predicted))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub learning_rate: f64,
    pub loss: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub network: NetworkSpec,
    pub history: Vec<EpochMetrics>,
}

/// Trains `net` on labelled samples. Sample order per epoch is a seeded shuffle,
/// so identical inputs and config give identical parameters.
pub fn train(
    net: &NetworkSpec,
    inputs: &[Tensor],
    labels: &[usize],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    if config.epochs == 0 {
        return Ok(TrainOutcome {
            network: net.clone(),
            history: Vec::new(),
        });
    }
    config.validate()?;
    if inputs.len() != labels.len() || inputs.is_empty() {
        return Err(invalid(
            "need the same, non-zero number of inputs and labels",
        ));
    }
    let classes = net.output_width();
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(invalid(alloc::format!(
            "label {bad} out of range for {classes} outputs"
        )));
    }
    let mut net = net.clone();
    let mut sgd = Sgd::new(&net, config.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let (mut loss_sum, mut correct) = (0.0, 0usize);
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let mut grads = Gradients::zeros_like(&net);
            let mut batch_loss = 0.0;
            for &i in batch {
                let (loss, predicted) = backprop(&net, &inputs[i], labels[i], &mut grads)?;
                batch_loss += loss;
                correct += usize::from(predicted == labels[i]);
            }
            if !batch_loss.is_finite() || !grads.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    batch: b,
                    loss: batch_loss,
                });
            }
            loss_sum += batch_loss;
            grads.scale(1.0 / batch.len() as f64);
            sgd.step(&mut net, &grads, epoch);
        }
        history.push(EpochMetrics {
            epoch,
            learning_rate: config.learning_rate_at(epoch),
            loss: loss_sum / inputs.len() as f64,
            accuracy: correct as f64 / inputs.len() as f64,
        });
    }
    Ok(TrainOutcome {
        network: net,
        history,
    })
}

/// Fraction of samples whose top logit matches the label.
pub fn accuracy(net: &NetworkSpec, inputs: &[Tensor], labels: &[usize]) -> Result<f64> {
    let mut correct = 0usize;
    for (x, &y) in inputs.iter().zip(labels) {
        correct += usize::from(net.predict(x)? == y);
    }
    Ok(correct as f64 / inputs.len().max(1) as f64)
}

// ---------------------------------------------------------------------------
// initialisation and presets

/// Kaiming-uniform weights (`U(±√(6/fan_in))`), zero biases, `λ = 8/L`.
pub fn initialize(net: &mut NetworkSpec, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for layer in net.layers_mut() {
        let fan_in = layer.params.fan_in();
        if fan_in == 0 {
            continue;
        }
        let bound = libm::sqrt(6.0 / fan_in as f64);
        let [w, b] = layer.params.params_mut();
        for v in w.iter_mut() {
            *v = rng.random_range(-bound..bound);
        }
        b.iter_mut().for_each(|v| *v = 0.0);
        if let Some(act) = &mut layer.activation {
            act.set_lambda(8.0 / act.steps() as f64);
        }
    }
}

fn activation(steps: u32) -> Result<QcfsActivation> {
    QcfsActivation::new(steps, 8.0 / steps as f64)
}

/// Fully connected network `inputs → hidden… → classes`, QCFS after every hidden layer.
pub fn mlp(
    input_shape: Vec<usize>,
    hidden: &[usize],
    classes: usize,
    steps: u32,
    seed: u64,
) -> Result<NetworkSpec> {
    let mut layers = Vec::new();
    let mut width: usize = input_shape.iter().product();
    if input_shape.len() != 1 {
        layers.push(Layer::linear(LayerParams::Flatten));
    }
    for &h in hidden {
        layers.push(Layer::activated(
            LayerParams::Dense(Dense::zeros(width, h)),
            activation(steps)?,
        ));
        width = h;
    }
    layers.push(Layer::linear(LayerParams::Dense(Dense::zeros(
        width, classes,
    ))));
    let mut net = NetworkSpec::new(input_shape, layers)?;
    initialize(&mut net, seed);
    Ok(net)
}

/// MLP 784-256-128-10 over `1×28×28` images.
pub fn mlp_preset(steps: u32, seed: u64) -> Result<NetworkSpec> {
    mlp(vec![1, 28, 28], &[256, 128], 10, steps, seed)
}

/// Two 3×3 conv blocks (8 and 16 channels, each followed by 2×2 average
/// pooling) and two dense layers (64 hidden units, 10 classes) over `1×28×28`.
pub fn cnn_preset(steps: u32, seed: u64) -> Result<NetworkSpec> {
    let pool = || {
        Layer::linear(LayerParams::AvgPool2d(AvgPool2d {
            kernel_size: 2,
            stride: 2,
        }))
    };
    let layers = vec![
        Layer::activated(
            LayerParams::Conv2d(Conv2d::zeros(1, 8, 3, 1, 1)),
            activation(steps)?,
        ),
        pool(),
        Layer::activated(
            LayerParams::Conv2d(Conv2d::zeros(8, 16, 3, 1, 1)),
            activation(steps)?,
        ),
        pool(),
        Layer::linear(LayerParams::Flatten),
        Layer::activated(
            LayerParams::Dense(Dense::zeros(16 * 7 * 7, 64)),
            activation(steps)?,
        ),
        Layer::linear(LayerParams::Dense(Dense::zeros(64, 10))),
    ];
    let mut net = NetworkSpec::new(vec![1, 28, 28], layers)?;
    initialize(&mut net, seed);
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_through_regions() {
        assert_eq!(qcfs_backward(0.4, 1.0, 4, 1.0).unwrap().0, 1.0);
        assert_eq!(qcfs_backward(-5.0, 1.0, 4, 1.0).unwrap(), (0.0, 0.0));
        assert_eq!(qcfs_backward(5.0, 1.0, 4, 2.0).unwrap(), (0.0, 2.0));
        // f(0.4) = 0.5, so ∂f/∂λ = 0.5 − 0.4
        let (_, gl) = qcfs_backward(0.4, 1.0, 4, 1.0).unwrap();
        assert!((gl - 0.1).abs() < 1e-12);
        assert!(qcfs_backward(0.4, 0.0, 4, 1.0).is_err());
    }

    #[test]
    fn plain_sgd_step() {
        let mut p = [1.0];
        let mut v = [0.0];
        sgd_update(&mut p, &mut v, &[1.0], 0.1, 0.0, 0.0);
        assert!((p[0] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_keeps_params() {
        let mut p = [1.0, -2.0];
        let mut v = [0.0, 0.0];
        sgd_update(&mut p, &mut v, &[0.0, 0.0], 0.1, 0.9, 0.0);
        assert_eq!(p, [1.0, -2.0]);
    }

    #[test]
    fn momentum_accumulates() {
        let mut p = [0.0];
        let mut v = [0.0];
        sgd_update(&mut p, &mut v, &[1.0], 0.1, 0.9, 0.0);
        sgd_update(&mut p, &mut v, &[1.0], 0.1, 0.9, 0.0);
        // v: 1, 1.9
        assert!((p[0] + 0.29).abs() < 1e-12);
    }

    #[test]
    fn cosine_schedule_points() {
        assert_eq!(cosine_lr(0.1, 0, 10), 0.1);
        assert!((cosine_lr(0.1, 5, 10) - 0.05).abs() < 1e-15);
        assert!(cosine_lr(0.1, 10, 10).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let bad = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            momentum: 1.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        assert!(TrainConfig::default().validate().is_ok());
    }

    #[test]
    fn cross_entropy_gradient_sums_to_zero() {
        let (loss, g) = cross_entropy(&[1.0, 2.0, 0.5], 1);
        assert!(loss > 0.0);
        assert!(g.iter().sum::<f64>().abs() < 1e-12);
        assert!(g[1] < 0.0);
    }

    #[test]
    fn presets_build() {
        let mlp = mlp_preset(4, 1).unwrap();
        assert_eq!(mlp.activation_layers(), 2);
        assert_eq!(mlp.output_width(), 10);
        assert!(mlp.activations().all(|a| a.lambda() == 2.0));
        let cnn = cnn_preset(4, 1).unwrap();
        assert_eq!(cnn.activation_layers(), 3);
        assert_eq!(cnn.output_width(), 10);
    }
}
