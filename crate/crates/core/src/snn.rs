//! Integrate-and-fire simulation of a converted QCFS network.
//!
//! Each activation layer becomes a population of IF neurons with
//! reset-by-subtraction:
//!
//! ```text
//! u(t) = v(t-1) + I(t)
//! s(t) = H(u(t) - θ)        H(0) = 1
//! v(t) = u(t) - θ·s(t)
//! ```
//!
//! The layer emits `θ·s(t)` (times its SRP mask) as input to the next stage. The
//! input image is presented as a constant analog current every step, biases are
//! injected as a constant current every step, and class scores are the
//! time-averaged output of the (non-spiking) classifier stage.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::network::NetworkSpec;
use crate::qcfs::grid_value;
use crate::tensor::Tensor;

/// Per-layer outcome of the ANN→SNN parameter mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerConversion {
    pub threshold: f64,
    pub initial_potential: f64,
    pub source_lambda: f64,
    pub quant_steps: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionReport {
    pub layers: Vec<LayerConversion>,
    pub timesteps: Option<usize>,
    pub tau: Option<usize>,
}

/// A converted spiking network: the source weights plus one threshold and one
/// initial membrane potential per activation layer.
#[derive(Debug, Clone, PartialEq)]
pub struct SnnModel {
    network: NetworkSpec,
    thresholds: Vec<f64>,
    initial_potentials: Vec<f64>,
}

/// Maps a trained QCFS network onto IF neurons: weights are copied verbatim,
/// `θ^l = λ^l` and `v^l(0) = θ^l / 2`.
pub fn convert(ann: &NetworkSpec) -> Result<SnnModel> {
    let thresholds: Vec<f64> = ann.activations().map(|a| a.lambda()).collect();
    let initial_potentials = thresholds.iter().map(|&t| 0.5 * t).collect();
    SnnModel::from_parts(ann.clone(), thresholds, initial_potentials)
}

impl SnnModel {
    pub fn from_parts(
        network: NetworkSpec,
        thresholds: Vec<f64>,
        initial_potentials: Vec<f64>,
    ) -> Result<Self> {
        let n = network.activation_layers();
        if thresholds.len() != n || initial_potentials.len() != n {
            return Err(Error::Conversion(format!(
                "expected {n} thresholds and initial potentials, got {} and {}",
                thresholds.len(),
                initial_potentials.len()
            )));
        }
        if let Some((l, t)) = thresholds
            .iter()
            .enumerate()
            .find(|(_, t)| !(**t > 0.0 && t.is_finite()))
        {
            return Err(Error::Conversion(format!("layer {l} has threshold {t}")));
        }
        if initial_potentials.iter().any(|v| !v.is_finite()) {
            return Err(Error::Conversion("non-finite initial potential".into()));
        }
        Ok(Self {
            network,
            thresholds,
            initial_potentials,
        })
    }

    pub fn network(&self) -> &NetworkSpec {
        &self.network
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn initial_potentials(&self) -> &[f64] {
        &self.initial_potentials
    }

    pub fn report(&self, timesteps: Option<usize>, tau: Option<usize>) -> ConversionReport {
        ConversionReport {
            layers: (0..self.thresholds.len())
                .map(|l| LayerConversion {
                    threshold: self.thresholds[l],
                    initial_potential: self.initial_potentials[l],
                    source_lambda: self.network.activation(l).lambda(),
                    quant_steps: self.network.activation(l).steps(),
                })
                .collect(),
            timesteps,
            tau,
        }
    }

    /// Fresh state with `v = v(0)` and all masks open.
    pub fn initial_state(&self) -> SnnState {
        SnnState {
            layers: (0..self.thresholds.len())
                .map(|l| {
                    let n = self.network.stages()[l].output_shape.iter().product();
                    IfLayerState::new(n, self.thresholds[l], self.initial_potentials[l])
                })
                .collect(),
            t: 0,
        }
    }

    pub fn simulate(&self, input: &Tensor, timesteps: usize) -> Result<SimulationOutput> {
        self.simulate_with(input, timesteps, SimOptions::default())
    }

    pub fn simulate_with(
        &self,
        input: &Tensor,
        timesteps: usize,
        options: SimOptions,
    ) -> Result<SimulationOutput> {
        if timesteps < 1 {
            return Err(invalid("timesteps must be at least 1"));
        }
        let drive = self.network.stage_forward(0, input)?;
        let mut state = self.initial_state();
        let mut rec = Recorder::new(options, self.thresholds.len());
        let scores = self.run(&mut state, &drive, timesteps, &mut rec)?;
        Ok(self.finish(state, scores, timesteps, None, rec))
    }

    /// Two-stage inference with residual-potential masking.
    ///
    /// Stage 1 runs `tau` steps on `input`; every neuron whose potential is
    /// negative afterwards is masked (`mask = v(τ) ≥ 0`). Potentials are reset
    /// to `θ/2`, spike counts cleared, and stage 2 runs `timesteps` steps on the
    /// same input with each layer's output multiplied by its mask. Masked
    /// neurons keep integrating; only their output is suppressed. Stage-1
    /// outputs are discarded.
    pub fn srp_inference(
        &self,
        input: &Tensor,
        tau: usize,
        timesteps: usize,
    ) -> Result<SimulationOutput> {
        self.srp_inference_with(input, tau, timesteps, SimOptions::default())
    }

    pub fn srp_inference_with(
        &self,
        input: &Tensor,
        tau: usize,
        timesteps: usize,
        options: SimOptions,
    ) -> Result<SimulationOutput> {
        if tau < 1 {
            return Err(invalid("tau must be at least 1"));
        }
        if timesteps < 1 {
            return Err(invalid("timesteps must be at least 1"));
        }
        let drive = self.network.stage_forward(0, input)?;
        let mut state = self.initial_state();
        let mut warmup = Recorder::new(SimOptions::default(), self.thresholds.len());
        self.run(&mut state, &drive, tau, &mut warmup)?;
        let residual: Vec<Tensor> = self.potentials(&state);
        for layer in &mut state.layers {
            for (m, &v) in layer.mask.iter_mut().zip(&layer.potential) {
                *m = v >= 0.0;
            }
            layer.reset();
        }
        state.t = 0;
        let mut rec = Recorder::new(options, self.thresholds.len());
        let scores = self.run(&mut state, &drive, timesteps, &mut rec)?;
        Ok(self.finish(state, scores, timesteps, Some(residual), rec))
    }

    /// Layer-by-layer simulation in which every layer receives its time-averaged
    /// input `y^{l-1} = W^l φ^{l-1}(T) + b^l` as a constant current, i.e. the
    /// spike timing seen by each layer is perfectly even.
    pub fn simulate_even_timing(
        &self,
        input: &Tensor,
        timesteps: usize,
    ) -> Result<SimulationOutput> {
        if timesteps < 1 {
            return Err(invalid("timesteps must be at least 1"));
        }
        let mut state = self.initial_state();
        let mut x = input.clone();
        let mut phi = Vec::with_capacity(self.thresholds.len());
        for (l, layer) in state.layers.iter_mut().enumerate() {
            let y = self.network.stage_forward(l, &x)?;
            for _ in 0..timesteps {
                layer.step(y.data());
            }
            let p = layer.phi(timesteps);
            x = Tensor::new(self.network.stages()[l].output_shape.clone(), p)?;
            phi.push(x.clone());
        }
        state.t = timesteps;
        let scores = self
            .network
            .stage_forward(self.thresholds.len(), &x)?
            .into_data();
        let potentials = self.potentials(&state);
        Ok(SimulationOutput {
            scores,
            phi,
            potentials,
            residual: None,
            masks: None,
            spikes: None,
            trace: Vec::new(),
            timesteps,
        })
    }

    fn run(
        &self,
        state: &mut SnnState,
        drive: &Tensor,
        steps: usize,
        rec: &mut Recorder,
    ) -> Result<Vec<f64>> {
        let n_act = self.thresholds.len();
        let stages = self.network.stages();
        let mut score_sum = vec![0.0; self.network.output_width()];
        for _ in 0..steps {
            state.t += 1;
            let mut current = drive.clone();
            for l in 0..=n_act {
                if l > 0 {
                    current = self.network.stage_forward(l, &current)?;
                }
                if l == n_act {
                    for (acc, v) in score_sum.iter_mut().zip(current.data()) {
                        *acc += v;
                    }
                    break;
                }
                let layer = &mut state.layers[l];
                let spikes = layer.step(current.data());
                rec.record(l, state.t, layer, &spikes);
                let out: Vec<f64> = spikes
                    .iter()
                    .zip(&layer.mask)
                    .map(|(&s, &m)| if s && m { layer.threshold } else { 0.0 })
                    .collect();
                current = Tensor::new(stages[l].output_shape.clone(), out)?;
            }
        }
        Ok(score_sum.into_iter().map(|s| s / steps as f64).collect())
    }

    fn potentials(&self, state: &SnnState) -> Vec<Tensor> {
        state
            .layers
            .iter()
            .enumerate()
            .map(|(l, layer)| {
                Tensor::new(
                    self.network.stages()[l].output_shape.clone(),
                    layer.potential.clone(),
                )
                .expect("state sized from stage shape")
            })
            .collect()
    }

    fn finish(
        &self,
        state: SnnState,
        scores: Vec<f64>,
        timesteps: usize,
        residual: Option<Vec<Tensor>>,
        rec: Recorder,
    ) -> SimulationOutput {
        let phi = state
            .layers
            .iter()
            .enumerate()
            .map(|(l, layer)| {
                Tensor::new(
                    self.network.stages()[l].output_shape.clone(),
                    layer.phi(timesteps),
                )
                .expect("state sized from stage shape")
            })
            .collect();
        let potentials = self.potentials(&state);
        let masks = residual
            .as_ref()
            .map(|_| state.layers.iter().map(|l| l.mask.clone()).collect());
        SimulationOutput {
            scores,
            phi,
            potentials,
            residual,
            masks,
            spikes: rec.spikes,
            trace: rec.trace,
            timesteps,
        }
    }
}

/// `snn_simulate`: plain rate-coded simulation for `timesteps` steps.
pub fn snn_simulate(snn: &SnnModel, input: &Tensor, timesteps: usize) -> Result<SimulationOutput> {
    snn.simulate(input, timesteps)
}

/// `srp_inference`: class scores of the two-stage masked inference.
pub fn srp_inference(
    snn: &SnnModel,
    input: &Tensor,
    tau: usize,
    timesteps: usize,
) -> Result<Vec<f64>> {
    Ok(snn.srp_inference(input, tau, timesteps)?.scores)
}

/// Closed-form IF output for perfectly even input timing:
/// `clip(θ/T · ⌊(y·T + v0)/θ⌋, 0, θ)`.
///
/// # Panics
/// If `threshold <= 0` or `timesteps == 0`.
pub fn even_timing_phi(y: f64, threshold: f64, timesteps: usize, v0: f64) -> f64 {
    assert!(threshold > 0.0, "threshold must be positive");
    assert!(timesteps > 0, "timesteps must be positive");
    let t = timesteps as f64;
    let k = libm::floor((y * t + v0) / threshold);
    let k = if k <= 0.0 {
        0
    } else if k >= t {
        timesteps
    } else {
        k as usize
    };
    grid_value(threshold, k, timesteps)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimOptions {
    pub record_spikes: bool,
    pub record_trace: bool,
}

/// One row of a per-neuron trace: potential before (`u`) and after (`v`) firing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub layer: usize,
    pub neuron: usize,
    pub t: usize,
    pub u: f64,
    pub spike: bool,
    pub v: f64,
}

/// Raw (pre-mask) spikes, indexed `[layer][t - 1][neuron]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpikeTrain {
    pub layers: Vec<Vec<Vec<bool>>>,
}

impl SpikeTrain {
    pub fn count(&self, layer: usize, neuron: usize) -> usize {
        self.layers[layer].iter().filter(|s| s[neuron]).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    /// Time-averaged classifier output.
    pub scores: Vec<f64>,
    /// `φ^l(T) = θ^l · (emitted spikes) / T` per activation layer.
    pub phi: Vec<Tensor>,
    /// `v^l(T)` at the end of the (final) run.
    pub potentials: Vec<Tensor>,
    /// SRP only: `v^l(τ)` at the end of stage 1.
    pub residual: Option<Vec<Tensor>>,
    /// SRP only: the keep-masks used in stage 2.
    pub masks: Option<Vec<Vec<bool>>>,
    pub spikes: Option<SpikeTrain>,
    pub trace: Vec<TraceRow>,
    pub timesteps: usize,
}

impl SimulationOutput {
    pub fn predicted_class(&self) -> usize {
        crate::network::argmax(&self.scores)
    }
}

struct Recorder {
    options: SimOptions,
    spikes: Option<SpikeTrain>,
    trace: Vec<TraceRow>,
}

impl Recorder {
    fn new(options: SimOptions, layers: usize) -> Self {
        Self {
            options,
            spikes: options.record_spikes.then(|| SpikeTrain {
                layers: vec![Vec::new(); layers],
            }),
            trace: Vec::new(),
        }
    }

    fn record(&mut self, l: usize, t: usize, layer: &IfLayerState, spikes: &[bool]) {
        if let Some(train) = &mut self.spikes {
            train.layers[l].push(spikes.to_vec());
        }
        if self.options.record_trace {
            for (n, &s) in spikes.iter().enumerate() {
                self.trace.push(TraceRow {
                    layer: l,
                    neuron: n,
                    t,
                    u: layer.pre_spike[n],
                    spike: s,
                    v: layer.potential[n],
                });
            }
        }
    }
}

/// Membrane state of one IF population.
#[derive(Debug, Clone, PartialEq)]
pub struct IfLayerState {
    pub threshold: f64,
    pub initial_potential: f64,
    pub potential: Vec<f64>,
    /// `u(t)` of the last step.
    pub pre_spike: Vec<f64>,
    pub mask: Vec<bool>,
    /// Emitted (masked) spikes since the last reset.
    pub spike_count: Vec<u32>,
}

impl IfLayerState {
    pub fn new(neurons: usize, threshold: f64, initial_potential: f64) -> Self {
        Self {
            threshold,
            initial_potential,
            potential: vec![initial_potential; neurons],
            pre_spike: vec![initial_potential; neurons],
            mask: vec![true; neurons],
            spike_count: vec![0; neurons],
        }
    }

    /// One IF update with reset-by-subtraction; returns the raw spikes.
    pub fn step(&mut self, current: &[f64]) -> Vec<bool> {
        debug_assert_eq!(current.len(), self.potential.len());
        let theta = self.threshold;
        let mut spikes = Vec::with_capacity(current.len());
        for (n, &i) in current.iter().enumerate() {
            let u = self.potential[n] + i;
            let s = u >= theta;
            self.pre_spike[n] = u;
            self.potential[n] = if s { u - theta } else { u };
            if s && self.mask[n] {
                self.spike_count[n] += 1;
            }
            spikes.push(s);
        }
        spikes
    }

    pub fn reset(&mut self) {
        self.potential
            .iter_mut()
            .for_each(|v| *v = self.initial_potential);
        self.spike_count.iter_mut().for_each(|c| *c = 0);
    }

    pub fn phi(&self, timesteps: usize) -> Vec<f64> {
        self.spike_count
            .iter()
            .map(|&c| grid_value(self.threshold, c as usize, timesteps))
            .collect()
    }
}

/// Full simulator state for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SnnState {
    pub layers: Vec<IfLayerState>,
    pub t: usize,
}
