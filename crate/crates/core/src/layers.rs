//! Linear layer primitives shared by the ANN and the converted SNN.
//!
//! Every layer here is affine in its input, so averaging spike outputs over time
//! commutes with the layer (up to the constant bias term).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Fully connected layer. `weights` is `outputs × inputs`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// 2-d cross-correlation over CHW input. `weights` is `[out, in, k, k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel_size: usize,
    pub stride: usize,
    pub padding: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Mean pooling over `kernel_size × kernel_size` windows, no padding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AvgPool2d {
    pub kernel_size: usize,
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayerParams {
    Dense(Dense),
    Conv2d(Conv2d),
    AvgPool2d(AvgPool2d),
    Flatten,
}

impl Dense {
    pub fn new(inputs: usize, outputs: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if weights.len() != inputs * outputs || bias.len() != outputs {
            return Err(Error::Dimension {
                expected: vec![outputs, inputs],
                actual: vec![weights.len(), bias.len()],
            });
        }
        Ok(Self {
            inputs,
            outputs,
            weights,
            bias,
        })
    }

    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }
}

impl Conv2d {
    pub fn zeros(
        in_channels: usize,
        out_channels: usize,
        kernel_size: usize,
        stride: usize,
        padding: usize,
    ) -> Self {
        Self {
            in_channels,
            out_channels,
            kernel_size,
            stride,
            padding,
            weights: vec![0.0; out_channels * in_channels * kernel_size * kernel_size],
            bias: vec![0.0; out_channels],
        }
    }

    fn output_hw(&self, h: usize, w: usize) -> Option<(usize, usize)> {
        let k = self.kernel_size;
        let (hp, wp) = (h + 2 * self.padding, w + 2 * self.padding);
        if k == 0 || self.stride == 0 || hp < k || wp < k {
            return None;
        }
        Some(((hp - k) / self.stride + 1, (wp - k) / self.stride + 1))
    }
}

impl AvgPool2d {
    fn output_hw(&self, h: usize, w: usize) -> Option<(usize, usize)> {
        let k = self.kernel_size;
        if k == 0 || self.stride == 0 || h < k || w < k {
            return None;
        }
        Some(((h - k) / self.stride + 1, (w - k) / self.stride + 1))
    }
}

impl LayerParams {
    pub fn kind_name(&self) -> &'static str {
        match self {
            LayerParams::Dense(_) => "dense",
            LayerParams::Conv2d(_) => "conv2d",
            LayerParams::AvgPool2d(_) => "avgpool2d",
            LayerParams::Flatten => "flatten",
        }
    }

    /// Dense and conv layers carry weights and may be followed by an activation.
    pub fn is_weighted(&self) -> bool {
        matches!(self, LayerParams::Dense(_) | LayerParams::Conv2d(_))
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        let mismatch = |expected: Vec<usize>| Error::Dimension {
            expected,
            actual: input.to_vec(),
        };
        match self {
            LayerParams::Dense(d) => {
                if input != [d.inputs] {
                    return Err(mismatch(vec![d.inputs]));
                }
                Ok(vec![d.outputs])
            }
            LayerParams::Conv2d(c) => match input {
                &[ch, h, w] if ch == c.in_channels => {
                    let (oh, ow) = c.output_hw(h, w).ok_or_else(|| mismatch(vec![ch, h, w]))?;
                    Ok(vec![c.out_channels, oh, ow])
                }
                _ => Err(mismatch(vec![c.in_channels, 0, 0])),
            },
            LayerParams::AvgPool2d(p) => match input {
                &[ch, h, w] => {
                    let (oh, ow) = p.output_hw(h, w).ok_or_else(|| mismatch(vec![ch, h, w]))?;
                    Ok(vec![ch, oh, ow])
                }
                _ => Err(mismatch(vec![0, 0, 0])),
            },
            LayerParams::Flatten => Ok(vec![input.iter().product()]),
        }
    }

    pub fn forward(&self, input: &Tensor) -> Result<Tensor> {
        match self {
            LayerParams::Dense(d) => dense_forward(d, input),
            LayerParams::Conv2d(c) => conv2d_forward(c, input),
            LayerParams::AvgPool2d(p) => avgpool2d_forward(p, input),
            LayerParams::Flatten => {
                let n = input.len();
                input.clone().reshape(vec![n])
            }
        }
    }

    /// Back-propagates `grad_out` through the layer evaluated at `input`.
    ///
    /// Returns the gradient with respect to the input and, for weighted layers,
    /// accumulates parameter gradients into `grad_params` (weights then bias).
    pub(crate) fn backward(
        &self,
        input: &Tensor,
        grad_out: &[f64],
        grad_params: &mut [f64],
    ) -> Tensor {
        match self {
            LayerParams::Dense(d) => dense_backward(d, input, grad_out, grad_params),
            LayerParams::Conv2d(c) => conv2d_backward(c, input, grad_out, grad_params),
            LayerParams::AvgPool2d(p) => avgpool2d_backward(p, input, grad_out),
            LayerParams::Flatten => {
                Tensor::new(input.shape().to_vec(), grad_out.to_vec()).expect("flatten grad")
            }
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            LayerParams::Dense(d) => d.weights.len() + d.bias.len(),
            LayerParams::Conv2d(c) => c.weights.len() + c.bias.len(),
            _ => 0,
        }
    }

    /// Weights and bias slices in declaration order.
    pub fn params(&self) -> [&[f64]; 2] {
        match self {
            LayerParams::Dense(d) => [&d.weights, &d.bias],
            LayerParams::Conv2d(c) => [&c.weights, &c.bias],
            _ => [&[], &[]],
        }
    }

    pub fn params_mut(&mut self) -> [&mut [f64]; 2] {
        match self {
            LayerParams::Dense(d) => [&mut d.weights, &mut d.bias],
            LayerParams::Conv2d(c) => [&mut c.weights, &mut c.bias],
            _ => [&mut [], &mut []],
        }
    }

    /// Fan-in of one output unit, used for weight initialisation.
    pub fn fan_in(&self) -> usize {
        match self {
            LayerParams::Dense(d) => d.inputs,
            LayerParams::Conv2d(c) => c.in_channels * c.kernel_size * c.kernel_size,
            _ => 0,
        }
    }
}

pub fn dense_forward(d: &Dense, input: &Tensor) -> Result<Tensor> {
    input.expect_shape(&[d.inputs])?;
    let x = input.data();
    // spike inputs are mostly zero
    let active: Vec<usize> = (0..d.inputs).filter(|&i| x[i] != 0.0).collect();
    let mut out = d.bias.clone();
    for (o, acc) in out.iter_mut().enumerate() {
        let row = &d.weights[o * d.inputs..(o + 1) * d.inputs];
        let mut sum = 0.0;
        for &i in &active {
            sum += row[i] * x[i];
        }
        *acc += sum;
    }
    Ok(Tensor::from_vec(out))
}

fn dense_backward(d: &Dense, input: &Tensor, grad_out: &[f64], grad_params: &mut [f64]) -> Tensor {
    let x = input.data();
    let (gw, gb) = grad_params.split_at_mut(d.weights.len());
    let mut grad_in = vec![0.0; d.inputs];
    for (o, &g) in grad_out.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        gb[o] += g;
        let row = &d.weights[o * d.inputs..(o + 1) * d.inputs];
        let grow = &mut gw[o * d.inputs..(o + 1) * d.inputs];
        for i in 0..d.inputs {
            grow[i] += g * x[i];
            grad_in[i] += g * row[i];
        }
    }
    Tensor::from_vec(grad_in)
}

pub fn conv2d_forward(c: &Conv2d, input: &Tensor) -> Result<Tensor> {
    let out_shape = LayerParams::Conv2d(Conv2d {
        weights: Vec::new(),
        bias: Vec::new(),
        ..*c
    })
    .output_shape(input.shape())?;
    let (h, w) = (input.shape()[1], input.shape()[2]);
    let (oh, ow) = (out_shape[1], out_shape[2]);
    let k = c.kernel_size;
    let x = input.data();
    let mut out = vec![0.0; c.out_channels * oh * ow];
    for o in 0..c.out_channels {
        let plane = &mut out[o * oh * ow..(o + 1) * oh * ow];
        plane.iter_mut().for_each(|v| *v = c.bias[o]);
        for ci in 0..c.in_channels {
            let src = &x[ci * h * w..(ci + 1) * h * w];
            for ky in 0..k {
                for kx in 0..k {
                    let wv = c.weights[((o * c.in_channels + ci) * k + ky) * k + kx];
                    if wv == 0.0 {
                        continue;
                    }
                    for oy in 0..oh {
                        let iy = (oy * c.stride + ky) as isize - c.padding as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let row = &src[iy as usize * w..(iy as usize + 1) * w];
                        for ox in 0..ow {
                            let ix = (ox * c.stride + kx) as isize - c.padding as isize;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            plane[oy * ow + ox] += wv * row[ix as usize];
                        }
                    }
                }
            }
        }
    }
    Tensor::new(out_shape, out)
}

fn conv2d_backward(
    c: &Conv2d,
    input: &Tensor,
    grad_out: &[f64],
    grad_params: &mut [f64],
) -> Tensor {
    let (h, w) = (input.shape()[1], input.shape()[2]);
    let (oh, ow) = c.output_hw(h, w).expect("validated shape");
    let k = c.kernel_size;
    let x = input.data();
    let (gw, gb) = grad_params.split_at_mut(c.weights.len());
    let mut grad_in = vec![0.0; input.len()];
    for o in 0..c.out_channels {
        let gplane = &grad_out[o * oh * ow..(o + 1) * oh * ow];
        gb[o] += gplane.iter().sum::<f64>();
        for ci in 0..c.in_channels {
            let src = &x[ci * h * w..(ci + 1) * h * w];
            let gsrc = &mut grad_in[ci * h * w..(ci + 1) * h * w];
            for ky in 0..k {
                for kx in 0..k {
                    let widx = ((o * c.in_channels + ci) * k + ky) * k + kx;
                    let wv = c.weights[widx];
                    let mut gacc = 0.0;
                    for oy in 0..oh {
                        let iy = (oy * c.stride + ky) as isize - c.padding as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let iy = iy as usize;
                        for ox in 0..ow {
                            let ix = (ox * c.stride + kx) as isize - c.padding as isize;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            let g = gplane[oy * ow + ox];
                            gacc += g * src[iy * w + ix as usize];
                            gsrc[iy * w + ix as usize] += g * wv;
                        }
                    }
                    gw[widx] += gacc;
                }
            }
        }
    }
    Tensor::new(input.shape().to_vec(), grad_in).expect("grad shape")
}

pub fn avgpool2d_forward(p: &AvgPool2d, input: &Tensor) -> Result<Tensor> {
    let out_shape = LayerParams::AvgPool2d(*p).output_shape(input.shape())?;
    let (ch, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let (oh, ow) = (out_shape[1], out_shape[2]);
    let k = p.kernel_size;
    let scale = 1.0 / (k * k) as f64;
    let x = input.data();
    let mut out = vec![0.0; ch * oh * ow];
    for c in 0..ch {
        for oy in 0..oh {
            for ox in 0..ow {
                let mut sum = 0.0;
                for ky in 0..k {
                    let row = (c * h + oy * p.stride + ky) * w + ox * p.stride;
                    sum += x[row..row + k].iter().sum::<f64>();
                }
                out[(c * oh + oy) * ow + ox] = sum * scale;
            }
        }
    }
    Tensor::new(out_shape, out)
}

fn avgpool2d_backward(p: &AvgPool2d, input: &Tensor, grad_out: &[f64]) -> Tensor {
    let (ch, h, w) = (input.shape()[0], input.shape()[1], input.shape()[2]);
    let (oh, ow) = p.output_hw(h, w).expect("validated shape");
    let k = p.kernel_size;
    let scale = 1.0 / (k * k) as f64;
    let mut grad_in = vec![0.0; input.len()];
    for c in 0..ch {
        for oy in 0..oh {
            for ox in 0..ow {
                let g = grad_out[(c * oh + oy) * ow + ox] * scale;
                for ky in 0..k {
                    let row = (c * h + oy * p.stride + ky) * w + ox * p.stride;
                    grad_in[row..row + k].iter_mut().for_each(|v| *v += g);
                }
            }
        }
    }
    Tensor::new(input.shape().to_vec(), grad_in).expect("grad shape")
}

pub(crate) fn describe(layer: &LayerParams) -> alloc::string::String {
    match layer {
        LayerParams::Dense(d) => format!("dense {}->{}", d.inputs, d.outputs),
        LayerParams::Conv2d(c) => format!(
            "conv2d {}->{} k{} s{} p{}",
            c.in_channels, c.out_channels, c.kernel_size, c.stride, c.padding
        ),
        LayerParams::AvgPool2d(p) => format!("avgpool2d k{} s{}", p.kernel_size, p.stride),
        LayerParams::Flatten => "flatten".into(),
    }
}
