//! Instance-specific private estimation of real-valued dataset functions.
//!
//! The crate provides two mechanisms that consume per-distance output bounds
//! of a function around the underlying dataset:
//!
//! - the inverse sensitivity mechanism ([`ism_sample`]), an exponential
//!   mechanism over the Hamming distance needed to reach each output, and
//! - the asymmetric sensitivity mechanism ([`asm_select`]), which runs
//!   `AboveThreshold` over the signed ("reflective") distances of an
//!   increasing stream of candidate outputs.
//!
//! Bound constructors for population variance and for linearly separable
//! losses (binary/multi-class cross-entropy, MSE, MAE) live in
//! [`instantiations`].

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
mod error;
pub mod instantiations;
pub mod mechanisms;
pub mod noise;
#[cfg(feature = "oracles")]
pub mod oracles;

pub use bounds::{
    inverse_sensitivity, marginal_deltas, reflective_inverse_sensitivity, ExtendedReal,
    OutputBounds, ReflectiveValue,
};
pub use error::{Error, Result};
pub use instantiations::{
    bce_losses, build_loss_estimator, build_variance_estimator, ce_losses, linsep_bounds,
    mse_mae_losses, variance, variance_lower_bounds, variance_upper_bounds, Estimator,
    ModelEvalInput, PerItemLosses, Predictions, RegressionMetric, VarianceConfig,
};
pub use mechanisms::{
    asm_select, asymmetry, ism_sample, make_grid, GridKind, MechanismKind, MechanismResult,
    OutputGrid, DEFAULT_BETA, DEFAULT_QUERY_CAP,
};
pub use noise::{above_threshold, sample_expo, total_epsilon, NoiseSource, PrivacyBudget, SvtOutcome};
