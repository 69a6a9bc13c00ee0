//! Output-bound constructors for concrete functions, and the assembled
//! estimators (bounds + candidate grid + privacy budget) built from them.

mod losses;
mod variance;

pub use losses::{
    bce_losses, ce_losses, linsep_bounds, mse_mae_losses, ModelEvalInput, PerItemLosses, Predictions,
    RegressionMetric,
};
pub use variance::{variance, variance_lower_bounds, variance_upper_bounds, VarianceConfig};

use crate::bounds::OutputBounds;
use crate::mechanisms::{asm_select, ism_sample, MechanismResult, OutputGrid};
use crate::noise::{NoiseSource, PrivacyBudget};
use crate::Result;

/// Everything the mechanisms need for one dataset.
#[derive(Debug, Clone)]
pub struct Estimator {
    pub bounds: OutputBounds,
    pub grid: OutputGrid,
    pub budget: PrivacyBudget,
}

impl Estimator {
    /// Runs the asymmetric sensitivity mechanism.
    pub fn asm(&self, rng: &mut NoiseSource) -> Result<MechanismResult> {
        asm_select(&self.bounds, &self.grid, &self.budget, rng)
    }

    /// Runs the inverse sensitivity mechanism at the same total epsilon.
    pub fn ism(&self, rng: &mut NoiseSource) -> Result<MechanismResult> {
        ism_sample(&self.bounds, self.budget.total(), rng)
    }
}

/// Variance estimator: exact lower bounds up to the cutoff, range-based or
/// infinite upper bounds, a `beta^i - 1` grid and the general-stream budget
/// split of `epsilon`.
pub fn build_variance_estimator(values: &[f64], config: &VarianceConfig, epsilon: f64) -> Result<Estimator> {
    let lower = variance_lower_bounds(values, config)?;
    let upper = variance_upper_bounds(values, config)?;
    let center = upper[0];
    Ok(Estimator {
        bounds: OutputBounds::from_envelope(center, lower, upper)?,
        grid: OutputGrid::geometric(config.beta)?,
        budget: PrivacyBudget::general(epsilon)?,
    })
}

/// Linearly separable loss estimator. The reflective distances of these
/// bounds move monotonically between neighbors, so the cheaper monotone
/// budget split applies.
pub fn build_loss_estimator(losses: &PerItemLosses, cutoff: usize, beta: f64, epsilon: f64) -> Result<Estimator> {
    Ok(Estimator {
        bounds: linsep_bounds(losses, cutoff)?,
        grid: OutputGrid::geometric(beta)?,
        budget: PrivacyBudget::monotone(epsilon)?,
    })
}
