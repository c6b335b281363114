//! Quantization clip-floor-shift activation.
//!
//! `qcfs(y) = λ · clip(⌊y·L/λ + ½⌋ / L, 0, 1)`. The output always lies on the
//! grid `{kλ/L : 0 ≤ k ≤ L}`; values are produced as `λ · k / L` so that they are
//! bit-identical to an IF layer's `θ · count / T` when `θ = λ` and `T = L`.
//!
//! Floor is the mathematical floor: an argument landing exactly on an integer
//! (for example `y = λ/(2L)`, giving `⌊1.0⌋ = 1`) rounds up to the next level.

use crate::error::{invalid, Result};

/// QCFS parameters for one activation layer: `L` levels and a per-layer scalar threshold `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QcfsActivation {
    steps: u32,
    lambda: f64,
}

impl QcfsActivation {
    pub fn new(steps: u32, lambda: f64) -> Result<Self> {
        check_params(lambda, steps)?;
        Ok(Self { steps, lambda })
    }

    /// Quantization step `L`.
    pub fn steps(&self) -> u32 {
        self.steps
    }

    /// Threshold `λ`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Used by the trainer; callers must keep `lambda > 0`.
    pub(crate) fn set_lambda(&mut self, lambda: f64) {
        debug_assert!(lambda > 0.0);
        self.lambda = lambda;
    }

    /// Index `k` of the quantization level selected for `y`, in `0..=L`.
    pub fn level(&self, y: f64) -> u32 {
        let l = self.steps as f64;
        let k = libm::floor(y * l / self.lambda + 0.5);
        if k <= 0.0 {
            0
        } else if k >= l {
            self.steps
        } else {
            k as u32
        }
    }

    pub fn apply(&self, y: f64) -> f64 {
        grid_value(self.lambda, self.level(y) as usize, self.steps as usize)
    }
}

/// `scale · k / n`, returning `scale` itself at `k = n` so the top level is exact.
///
/// Shared by QCFS and the IF readout `θ · count / T` so both land on identical bits.
pub fn grid_value(scale: f64, k: usize, n: usize) -> f64 {
    if k == n {
        scale
    } else {
        scale * k as f64 / n as f64
    }
}

fn check_params(lambda: f64, steps: u32) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid(alloc::format!(
            "qcfs threshold must be positive, got {lambda}"
        )));
    }
    if steps == 0 {
        return Err(invalid("qcfs quantization step must be at least 1"));
    }
    Ok(())
}

/// Scalar QCFS activation. Rejects non-positive `lambda`, zero `steps` and NaN input.
pub fn qcfs(y: f64, lambda: f64, steps: u32) -> Result<f64> {
    check_params(lambda, steps)?;
    if y.is_nan() {
        return Err(invalid("qcfs input is NaN"));
    }
    Ok(QcfsActivation { steps, lambda }.apply(y))
}
