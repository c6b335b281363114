#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srp_core::layers::{AvgPool2d, Conv2d, Dense, LayerParams};
use srp_core::{Layer, NetworkSpec, QcfsActivation, Tensor};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random dense network with `depth` weighted layers (the last one is the classifier).
pub fn random_mlp(rng: &mut impl Rng, depth: usize, steps: Option<u32>) -> NetworkSpec {
    let mut widths = vec![rng.random_range(1..6usize)];
    for _ in 0..depth {
        widths.push(rng.random_range(1..7usize));
    }
    let mut layers = Vec::new();
    for l in 0..depth {
        let (i, o) = (widths[l], widths[l + 1]);
        let weights = (0..i * o).map(|_| rng.random_range(-1.5..1.5)).collect();
        let bias = (0..o).map(|_| rng.random_range(-0.3..0.3)).collect();
        let dense = LayerParams::Dense(Dense::new(i, o, weights, bias).unwrap());
        if l + 1 == depth {
            layers.push(Layer::linear(dense));
        } else {
            let l_steps = steps.unwrap_or_else(|| rng.random_range(1..9));
            let lambda = rng.random_range(0.3..2.0);
            layers.push(Layer::activated(
                dense,
                QcfsActivation::new(l_steps, lambda).unwrap(),
            ));
        }
    }
    NetworkSpec::new(vec![widths[0]], layers).unwrap()
}

/// Small conv → pool → dense network over a 1×6×6 input.
pub fn random_cnn(rng: &mut impl Rng, steps: u32) -> NetworkSpec {
    let mut conv = Conv2d::zeros(1, 2, 3, 1, 1);
    conv.weights
        .iter_mut()
        .for_each(|w| *w = rng.random_range(-1.0..1.0));
    conv.bias
        .iter_mut()
        .for_each(|b| *b = rng.random_range(-0.2..0.2));
    let mut d1 = Dense::zeros(2 * 3 * 3, 5);
    d1.weights
        .iter_mut()
        .for_each(|w| *w = rng.random_range(-1.0..1.0));
    let mut d2 = Dense::zeros(5, 3);
    d2.weights
        .iter_mut()
        .for_each(|w| *w = rng.random_range(-1.0..1.0));
    let act = |rng: &mut dyn rand::RngCore| {
        QcfsActivation::new(steps, rng.random_range(0.5..1.5)).unwrap()
    };
    NetworkSpec::new(
        vec![1, 6, 6],
        vec![
            Layer::activated(LayerParams::Conv2d(conv), act(rng)),
            Layer::linear(LayerParams::AvgPool2d(AvgPool2d {
                kernel_size: 2,
                stride: 2,
            })),
            Layer::linear(LayerParams::Flatten),
            Layer::activated(LayerParams::Dense(d1), act(rng)),
            Layer::linear(LayerParams::Dense(d2)),
        ],
    )
    .unwrap()
}

pub fn random_input(rng: &mut impl Rng, net: &NetworkSpec) -> Tensor {
    let shape = net.input_shape().to_vec();
    let n: usize = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| rng.random_range(-0.5..1.5)).collect()).unwrap()
}

pub fn dense_net(weights: &[f64], lambda: f64, steps: u32) -> NetworkSpec {
    let n = weights.len();
    NetworkSpec::new(
        vec![n],
        vec![
            Layer::activated(
                LayerParams::Dense(Dense::new(n, 1, weights.to_vec(), vec![0.0]).unwrap()),
                QcfsActivation::new(steps, lambda).unwrap(),
            ),
            Layer::linear(LayerParams::Dense(
                Dense::new(1, 1, vec![1.0], vec![0.0]).unwrap(),
            )),
        ],
    )
    .unwrap()
}
