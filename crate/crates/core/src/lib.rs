//! Quantized-activation (QCFS) networks and their integrate-and-fire conversion.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! - [`qcfs`] and [`layers`]: the quantization clip-floor-shift activation and the
//!   dense / conv2d / avg-pool / flatten primitives of the source network.
//! - [`network`]: the source ANN ([`NetworkSpec`]) and its forward pass.
//! - [`snn`]: conversion to integrate-and-fire neurons with reset-by-subtraction,
//!   time-stepped simulation and the two-stage residual-potential (SRP) inference.
//! - [`analysis`]: classification of unevenness error into its four cases,
//!   per-layer error reports, and an exhaustive spike-timing oracle for the
//!   residual-potential theorem.
//! - [`train`]: desk-scale SGD training with a straight-through QCFS gradient.
//!
//! IO, datasets, checkpoints and the command-line tool live in `srp-tools`.

#![no_std]
#![warn(rust_2018_idioms)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod layers;
pub mod network;
pub mod qcfs;
pub mod snn;
pub mod tensor;
pub mod train;

pub use crate::{
    analysis::{
        classify_case, error_type_i_distribution, error_type_ii_distribution, srp_effect_report,
        verify_theorem1, ErrorReport, ErrorType, SrpEffect, TheoremClause, TheoremRun,
        TheoremVerdict, UnevennessCase,
    },
    error::{Error, Result},
    layers::{AvgPool2d, Conv2d, Dense, LayerParams},
    network::{ActivationRecord, Layer, NetworkSpec},
    qcfs::{qcfs, QcfsActivation},
    snn::{convert, even_timing_phi, ConversionReport, SimulationOutput, SnnModel, SnnState},
    tensor::Tensor,
    train::{train, TrainConfig},
};
