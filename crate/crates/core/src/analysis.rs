//! Unevenness-error analysis.
//!
//! With `θ = λ`, `T = L` and `v(0) = θ/2`, the only remaining mismatch between an
//! ANN activation `a` and the SNN output `φ(T)` comes from the temporal order of
//! the incoming spikes. It falls into four cases:
//!
//! | case  | ANN output     | SNN output |
//! |-------|----------------|------------|
//! | Case1 | `a = 0`        | `φ > a`    |
//! | Case2 | `0 < a < λ`    | `φ > a`    |
//! | Case3 | `0 < a < λ`    | `φ < a`    |
//! | Case4 | `a = λ`        | `φ < a`    |
//!
//! Type I reports force `a^{l-1} = φ^{l-1}(T)` before recomputing `a^l`, so they
//! isolate the error produced by layer `l` alone. Type II reports compare the
//! plain ANN forward pass against the SNN and so include upstream error.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::NetworkSpec;
use crate::qcfs::{grid_value, qcfs};
use crate::snn::{even_timing_phi, SimulationOutput, SnnModel};
use crate::tensor::Tensor;

/// Absolute tolerance for `a = 0`, `a = λ` and `φ = a` comparisons. Both values
/// live on a grid of spacing `θ/T`, far above this.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnevennessCase {
    NoError,
    Case1,
    Case2,
    Case3,
    Case4,
}

impl UnevennessCase {
    pub const ALL: [UnevennessCase; 5] = [
        UnevennessCase::NoError,
        UnevennessCase::Case1,
        UnevennessCase::Case2,
        UnevennessCase::Case3,
        UnevennessCase::Case4,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            UnevennessCase::NoError => "no_error",
            UnevennessCase::Case1 => "case1",
            UnevennessCase::Case2 => "case2",
            UnevennessCase::Case3 => "case3",
            UnevennessCase::Case4 => "case4",
        }
    }
}

/// Classifies one neuron. `a` must lie in `[0, λ]` and `φ` in `[0, λ]` (within `eps`).
pub fn classify_case(a: f64, phi: f64, lambda: f64, eps: f64) -> Result<UnevennessCase> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !(a >= -eps && a <= lambda + eps) {
        return Err(Error::Domain(format!("a = {a} outside [0, {lambda}]")));
    }
    if !(phi >= -eps && phi <= lambda + eps) {
        return Err(Error::Domain(format!("phi = {phi} outside [0, {lambda}]")));
    }
    if (phi - a).abs() <= eps {
        return Ok(UnevennessCase::NoError);
    }
    let over = phi > a;
    Ok(if a <= eps {
        // φ < a = 0 is excluded by the domain check
        UnevennessCase::Case1
    } else if a >= lambda - eps {
        UnevennessCase::Case4
    } else if over {
        UnevennessCase::Case2
    } else {
        UnevennessCase::Case3
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorType {
    TypeI,
    TypeII,
}

impl ErrorType {
    pub fn label(self) -> &'static str {
        match self {
            ErrorType::TypeI => "type_i",
            ErrorType::TypeII => "type_ii",
        }
    }
}

/// Case counts and `|φ − a|` statistics for one activation layer.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayerErrorStats {
    pub neurons: usize,
    pub counts: [usize; 5],
    pub abs_error_sum: f64,
    pub max_abs_error: f64,
}

impl LayerErrorStats {
    fn add(&mut self, case: UnevennessCase, abs_error: f64) {
        self.neurons += 1;
        self.counts[case.index()] += 1;
        self.abs_error_sum += abs_error;
        if abs_error > self.max_abs_error {
            self.max_abs_error = abs_error;
        }
    }

    pub fn fraction(&self, case: UnevennessCase) -> f64 {
        if self.neurons == 0 {
            return if case == UnevennessCase::NoError {
                1.0
            } else {
                0.0
            };
        }
        self.counts[case.index()] as f64 / self.neurons as f64
    }

    pub fn fractions(&self) -> [f64; 5] {
        UnevennessCase::ALL.map(|c| self.fraction(c))
    }

    pub fn mean_abs_error(&self) -> f64 {
        if self.neurons == 0 {
            0.0
        } else {
            self.abs_error_sum / self.neurons as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub error_type: ErrorType,
    pub layers: Vec<LayerErrorStats>,
}

impl ErrorReport {
    pub fn empty(error_type: ErrorType, layers: usize) -> Self {
        Self {
            error_type,
            layers: vec![LayerErrorStats::default(); layers],
        }
    }

    /// Adds another report's counts (for aggregating over a dataset).
    pub fn merge(&mut self, other: &ErrorReport) -> Result<()> {
        if other.error_type != self.error_type || other.layers.len() != self.layers.len() {
            return Err(Error::Pairing(
                "cannot merge reports of different shape".into(),
            ));
        }
        for (mine, theirs) in self.layers.iter_mut().zip(&other.layers) {
            mine.neurons += theirs.neurons;
            for (a, b) in mine.counts.iter_mut().zip(&theirs.counts) {
                *a += b;
            }
            mine.abs_error_sum += theirs.abs_error_sum;
            mine.max_abs_error = mine.max_abs_error.max(theirs.max_abs_error);
        }
        Ok(())
    }

    /// Case counts of both reports agree layer by layer.
    pub fn same_distribution(&self, other: &ErrorReport) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.neurons == b.neurons && a.counts == b.counts)
    }
}

fn check_pairing(ann: &NetworkSpec, snn: &SnnModel) -> Result<()> {
    if snn.network() != ann {
        return Err(Error::Pairing(
            "SNN weights or layout differ from the ANN".into(),
        ));
    }
    for (l, (act, &theta)) in ann.activations().zip(snn.thresholds()).enumerate() {
        if act.lambda() != theta {
            return Err(Error::Pairing(format!(
                "layer {l}: threshold {theta} != lambda {}",
                act.lambda()
            )));
        }
    }
    Ok(())
}

fn classify_layer(
    stats: &mut LayerErrorStats,
    a: &Tensor,
    phi: &Tensor,
    lambda: f64,
) -> Result<()> {
    for (&a, &p) in a.data().iter().zip(phi.data()) {
        let case = classify_case(a, p, lambda, DEFAULT_TOLERANCE)?;
        stats.add(case, (p - a).abs());
    }
    Ok(())
}

/// Type I report for an already computed simulation of `input`.
pub fn type_i_report(
    ann: &NetworkSpec,
    input: &Tensor,
    sim: &SimulationOutput,
) -> Result<ErrorReport> {
    let n = ann.activation_layers();
    let mut report = ErrorReport::empty(ErrorType::TypeI, n);
    for l in 0..n {
        let upstream = if l == 0 { input } else { &sim.phi[l - 1] };
        let act = ann.activation(l);
        let a = ann.stage_forward(l, upstream)?.map(|y| act.apply(y));
        classify_layer(&mut report.layers[l], &a, &sim.phi[l], act.lambda())?;
    }
    Ok(report)
}

/// Type II report for an already computed simulation of `input`.
pub fn type_ii_report(
    ann: &NetworkSpec,
    input: &Tensor,
    sim: &SimulationOutput,
) -> Result<ErrorReport> {
    let n = ann.activation_layers();
    let (_, record) = ann.forward(input)?;
    let mut report = ErrorReport::empty(ErrorType::TypeII, n);
    for l in 0..n {
        let lambda = ann.activation(l).lambda();
        classify_layer(&mut report.layers[l], &record.post[l], &sim.phi[l], lambda)?;
    }
    Ok(report)
}

pub fn error_type_i_distribution(
    ann: &NetworkSpec,
    snn: &SnnModel,
    input: &Tensor,
    timesteps: usize,
) -> Result<ErrorReport> {
    check_pairing(ann, snn)?;
    let sim = snn.simulate(input, timesteps)?;
    type_i_report(ann, input, &sim)
}

pub fn error_type_ii_distribution(
    ann: &NetworkSpec,
    snn: &SnnModel,
    input: &Tensor,
    timesteps: usize,
) -> Result<ErrorReport> {
    check_pairing(ann, snn)?;
    let sim = snn.simulate(input, timesteps)?;
    type_ii_report(ann, input, &sim)
}

/// Type II distributions without and with residual-potential masking.
#[derive(Debug, Clone, PartialEq)]
pub struct SrpEffect {
    pub before: ErrorReport,
    pub after: ErrorReport,
}

impl SrpEffect {
    /// Per layer: `after − before` fraction for each case.
    pub fn deltas(&self) -> Vec<[f64; 5]> {
        self.before
            .layers
            .iter()
            .zip(&self.after.layers)
            .map(|(b, a)| {
                let (fb, fa) = (b.fractions(), a.fractions());
                core::array::from_fn(|i| fa[i] - fb[i])
            })
            .collect()
    }
}

/// Aggregated over `inputs`; masks are recomputed for every sample.
pub fn srp_effect_report(
    ann: &NetworkSpec,
    snn: &SnnModel,
    inputs: &[Tensor],
    tau: usize,
    timesteps: usize,
) -> Result<SrpEffect> {
    check_pairing(ann, snn)?;
    let n = ann.activation_layers();
    let mut effect = SrpEffect {
        before: ErrorReport::empty(ErrorType::TypeII, n),
        after: ErrorReport::empty(ErrorType::TypeII, n),
    };
    for input in inputs {
        let (before, after) = srp_effect_sample(ann, snn, input, tau, timesteps)?;
        effect.before.merge(&before)?;
        effect.after.merge(&after)?;
    }
    Ok(effect)
}

/// Before/after Type II reports for one sample.
pub fn srp_effect_sample(
    ann: &NetworkSpec,
    snn: &SnnModel,
    input: &Tensor,
    tau: usize,
    timesteps: usize,
) -> Result<(ErrorReport, ErrorReport)> {
    let plain = snn.simulate(input, timesteps)?;
    let masked = snn.srp_inference(input, tau, timesteps)?;
    Ok((
        type_ii_report(ann, input, &plain)?,
        type_ii_report(ann, input, &masked)?,
    ))
}

/// Mean of `qcfs(y) − even_timing_phi(y)` over `points` evenly spaced `y` in
/// `[0, λ]`, with `θ = λ` and `v(0) = θ/2`.
pub fn mean_quantization_error(
    lambda: f64,
    steps: u32,
    timesteps: usize,
    points: usize,
) -> Result<f64> {
    if points < 2 {
        return Err(Error::InvalidParameter(
            "need at least two grid points".into(),
        ));
    }
    let mut sum = 0.0;
    for i in 0..points {
        let y = lambda * i as f64 / (points - 1) as f64;
        sum += qcfs(y, lambda, steps)? - even_timing_phi(y, lambda, timesteps, 0.5 * lambda);
    }
    Ok(sum / points as f64)
}

// ---------------------------------------------------------------------------
// Residual-potential theorem oracle

pub const MAX_THEOREM_TIMESTEPS: usize = 8;
pub const MAX_PRESYNAPTIC: usize = 3;

/// One postsynaptic IF neuron driven by up to three presynaptic spike trains
/// with fixed spike counts. `L = T`, `λ = θ`, `v(0) = θ/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremInstance {
    pub weights: Vec<f64>,
    pub counts: Vec<usize>,
    pub timesteps: usize,
    pub threshold: f64,
    /// Threshold of the presynaptic layer; each spike delivers `w · θ_pre`.
    pub presynaptic_threshold: f64,
}

impl TheoremInstance {
    pub fn new(weights: Vec<f64>, counts: Vec<usize>, timesteps: usize) -> Self {
        Self {
            weights,
            counts,
            timesteps,
            threshold: 1.0,
            presynaptic_threshold: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let n = self.weights.len();
        if n == 0 || n > MAX_PRESYNAPTIC {
            return Err(Error::EnumerationTooLarge(format!(
                "{n} presynaptic neurons (supported: 1..={MAX_PRESYNAPTIC})"
            )));
        }
        if self.timesteps == 0 || self.timesteps > MAX_THEOREM_TIMESTEPS {
            return Err(Error::EnumerationTooLarge(format!(
                "T = {} (supported: 1..={MAX_THEOREM_TIMESTEPS})",
                self.timesteps
            )));
        }
        if self.counts.len() != n || self.counts.iter().any(|&c| c > self.timesteps) {
            return Err(Error::InvalidParameter(
                "need one spike count in 0..=T per presynaptic neuron".into(),
            ));
        }
        if !(self.threshold > 0.0) || !(self.presynaptic_threshold > 0.0) {
            return Err(Error::InvalidParameter(
                "thresholds must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Weighted input `y = Σ_j w_j · θ_pre · count_j / T`.
    pub fn weighted_input(&self) -> f64 {
        let t = self.timesteps as f64;
        self.weights
            .iter()
            .zip(&self.counts)
            .map(|(w, &c)| w * (self.presynaptic_threshold * c as f64 / t))
            .sum()
    }

    /// ANN activation for this instance.
    pub fn activation(&self) -> f64 {
        qcfs(self.weighted_input(), self.threshold, self.timesteps as u32)
            .expect("validated instance")
    }

    /// Runs the postsynaptic neuron on one timing placement (bit `t` of
    /// `placement[j]` set ⇔ presynaptic neuron `j` spikes at step `t + 1`).
    /// Returns `(spike count, v(T))`.
    pub fn simulate(&self, placement: &[u16]) -> (usize, f64) {
        let mut v = 0.5 * self.threshold;
        let mut count = 0;
        for t in 0..self.timesteps {
            let mut current = 0.0;
            for (j, &w) in self.weights.iter().enumerate() {
                if placement[j] >> t & 1 == 1 {
                    current += w * self.presynaptic_threshold;
                }
            }
            let u = v + current;
            if u >= self.threshold {
                count += 1;
                v = u - self.threshold;
            } else {
                v = u;
            }
        }
        (count, v)
    }

    /// Number of distinct timing placements, `Π_j C(T, count_j)`.
    pub fn placement_count(&self) -> u64 {
        self.counts
            .iter()
            .map(|&k| binomial(self.timesteps as u64, k as u64))
            .product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremClause {
    /// `a = 0`: `v(T) < 0 ⇒ φ ≥ a` and `φ > a ⇒ v(T) < 0`.
    ZeroActivation,
    /// `a > 0`: `φ > a ⇔ v(T) < 0`.
    PositiveActivation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremVerdict {
    /// Spike-time bitmask per presynaptic neuron (unused slots are 0).
    pub placement: [u16; MAX_PRESYNAPTIC],
    pub a: f64,
    pub phi: f64,
    pub v_final: f64,
    pub clause: TheoremClause,
    pub passed: bool,
}

/// Checks the applicable clause for one `(a, φ, v(T))` triple.
pub fn check_theorem1(a: f64, phi: f64, v_final: f64, eps: f64) -> (TheoremClause, bool) {
    let negative = v_final < 0.0;
    let above = phi > a + eps;
    if a <= eps {
        let sufficiency = !negative || phi >= a - eps;
        let necessity = !above || negative;
        (TheoremClause::ZeroActivation, sufficiency && necessity)
    } else {
        (TheoremClause::PositiveActivation, above == negative)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremRun {
    pub instance: TheoremInstance,
    pub verdicts: Vec<TheoremVerdict>,
}

impl TheoremRun {
    pub fn failures(&self) -> impl Iterator<Item = &TheoremVerdict> + '_ {
        self.verdicts.iter().filter(|v| !v.passed)
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }
}

/// Exhaustively enumerates every spike-timing placement of `instance` and checks
/// both clauses of the residual-potential theorem on each.
///
/// Refuses more than [`MAX_PRESYNAPTIC`] inputs or `T >` [`MAX_THEOREM_TIMESTEPS`];
/// use [`sample_theorem1`] beyond that.
pub fn verify_theorem1(instance: &TheoremInstance) -> Result<TheoremRun> {
    instance.validate()?;
    let a = instance.activation();
    let per_neuron: Vec<Vec<u16>> = instance
        .counts
        .iter()
        .map(|&k| placements(instance.timesteps, k))
        .collect();
    let mut verdicts = Vec::with_capacity(instance.placement_count() as usize);
    let mut idx = vec![0usize; per_neuron.len()];
    loop {
        let mut placement = [0u16; MAX_PRESYNAPTIC];
        for (j, &i) in idx.iter().enumerate() {
            placement[j] = per_neuron[j][i];
        }
        verdicts.push(verdict(instance, a, placement));
        // odometer over the cartesian product
        let mut j = idx.len();
        loop {
            if j == 0 {
                return Ok(TheoremRun {
                    instance: instance.clone(),
                    verdicts,
                });
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < per_neuron[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Randomized variant for instances beyond the exhaustive cap: draws `samples`
/// placements uniformly with a fixed seed. Supports `T ≤ 16`.
pub fn sample_theorem1(
    instance: &TheoremInstance,
    samples: usize,
    seed: u64,
) -> Result<TheoremRun> {
    let n = instance.weights.len();
    if n == 0 || n > MAX_PRESYNAPTIC || instance.timesteps == 0 || instance.timesteps > 16 {
        return Err(Error::EnumerationTooLarge(
            "sampling supports 1..=3 inputs and T <= 16".into(),
        ));
    }
    if instance.counts.len() != n || instance.counts.iter().any(|&c| c > instance.timesteps) {
        return Err(Error::InvalidParameter("bad spike counts".into()));
    }
    let a = instance.activation();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut verdicts = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut placement = [0u16; MAX_PRESYNAPTIC];
        for (j, &k) in instance.counts.iter().enumerate() {
            placement[j] = random_placement(&mut rng, instance.timesteps, k);
        }
        verdicts.push(verdict(instance, a, placement));
    }
    Ok(TheoremRun {
        instance: instance.clone(),
        verdicts,
    })
}

fn verdict(
    instance: &TheoremInstance,
    a: f64,
    placement: [u16; MAX_PRESYNAPTIC],
) -> TheoremVerdict {
    let (count, v_final) = instance.simulate(&placement);
    let phi = grid_value(instance.threshold, count, instance.timesteps);
    let (clause, passed) = check_theorem1(a, phi, v_final, DEFAULT_TOLERANCE);
    TheoremVerdict {
        placement,
        a,
        phi,
        v_final,
        clause,
        passed,
    }
}

/// All `T`-bit masks with exactly `k` bits set, ascending.
pub fn placements(timesteps: usize, k: usize) -> Vec<u16> {
    (0u32..1 << timesteps)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| m as u16)
        .collect()
}

fn random_placement(rng: &mut impl Rng, timesteps: usize, k: usize) -> u16 {
    // partial Fisher-Yates over the step indices
    let mut steps: Vec<u16> = (0..timesteps as u16).collect();
    let mut mask = 0u16;
    for i in 0..k {
        let j = rng.random_range(i..timesteps);
        steps.swap(i, j);
        mask |= 1 << steps[i];
    }
    mask
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = DEFAULT_TOLERANCE;

    #[test]
    fn case_examples() {
        assert_eq!(
            classify_case(0.0, 0.5, 1.0, EPS).unwrap(),
            UnevennessCase::Case1
        );
        assert_eq!(
            classify_case(0.5, 0.5, 1.0, EPS).unwrap(),
            UnevennessCase::NoError
        );
        assert_eq!(
            classify_case(1.0, 0.75, 1.0, EPS).unwrap(),
            UnevennessCase::Case4
        );
        assert_eq!(
            classify_case(0.5, 0.75, 1.0, EPS).unwrap(),
            UnevennessCase::Case2
        );
        assert_eq!(
            classify_case(0.5, 0.25, 1.0, EPS).unwrap(),
            UnevennessCase::Case3
        );
    }

    #[test]
    fn case_domain_errors() {
        assert!(matches!(
            classify_case(1.5, 0.5, 1.0, EPS),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            classify_case(-0.1, 0.0, 1.0, EPS),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            classify_case(0.5, 1.2, 1.0, EPS),
            Err(Error::Domain(_))
        ));
        assert!(classify_case(0.0, 0.0, 0.0, EPS).is_err());
    }

    #[test]
    fn tolerance_absorbs_rounding() {
        assert_eq!(
            classify_case(0.5, 0.5 + 1e-9, 1.0, EPS).unwrap(),
            UnevennessCase::NoError
        );
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(placements(6, 3).len(), 20);
        assert!(placements(4, 2).iter().all(|m| m.count_ones() == 2));
    }

    #[test]
    fn theorem_clause_logic() {
        // a = 0, over-firing with negative residual: passes
        assert_eq!(
            check_theorem1(0.0, 0.5, -0.5, EPS),
            (TheoremClause::ZeroActivation, true)
        );
        // a = 0, over-firing with non-negative residual would violate necessity
        assert_eq!(
            check_theorem1(0.0, 0.5, 0.1, EPS),
            (TheoremClause::ZeroActivation, false)
        );
        // a > 0 both directions
        assert_eq!(
            check_theorem1(0.5, 0.75, -0.1, EPS),
            (TheoremClause::PositiveActivation, true)
        );
        assert_eq!(
            check_theorem1(0.5, 0.5, -0.1, EPS),
            (TheoremClause::PositiveActivation, false)
        );
        assert_eq!(
            check_theorem1(0.5, 0.25, 0.3, EPS),
            (TheoremClause::PositiveActivation, true)
        );
    }

    #[test]
    fn theorem_refuses_oversized() {
        let too_long = TheoremInstance::new(vec![1.0], vec![2], 9);
        assert!(matches!(
            verify_theorem1(&too_long),
            Err(Error::EnumerationTooLarge(_))
        ));
        let too_wide = TheoremInstance::new(vec![1.0; 4], vec![1; 4], 4);
        assert!(matches!(
            verify_theorem1(&too_wide),
            Err(Error::EnumerationTooLarge(_))
        ));
        let bad_counts = TheoremInstance::new(vec![1.0], vec![5], 4);
        assert!(verify_theorem1(&bad_counts).is_err());
    }

    #[test]
    fn sampling_is_seeded_and_valid() {
        let inst = TheoremInstance::new(vec![0.7, -0.4, 0.2], vec![5, 7, 3], 12);
        let a = sample_theorem1(&inst, 500, 7).unwrap();
        let b = sample_theorem1(&inst, 500, 7).unwrap();
        assert_eq!(a, b);
        for v in &a.verdicts {
            for (j, &k) in inst.counts.iter().enumerate() {
                assert_eq!(v.placement[j].count_ones() as usize, k);
                assert!(v.placement[j] < 1 << 12);
            }
        }
        assert!(a.all_passed());
    }

    #[test]
    fn merge_checks_shape() {
        let mut a = ErrorReport::empty(ErrorType::TypeI, 2);
        assert!(a.merge(&ErrorReport::empty(ErrorType::TypeII, 2)).is_err());
        assert!(a.merge(&ErrorReport::empty(ErrorType::TypeI, 3)).is_err());
        assert!(a.merge(&ErrorReport::empty(ErrorType::TypeI, 2)).is_ok());
    }
}
