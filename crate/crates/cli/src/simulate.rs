//! Random output bounds with controlled asymmetry, and the ISM / ASM error
//! ratio on each.
//!
//! Generator: `n` steps below the center with increments `U(0, 1)`; above
//! the center, increments are either `U(0, s)` or Pareto(`s`, 1.5), with the
//! family picked by a fair coin and `s = 10^u`, `u ~ U(-1.5, 1.5)`. The
//! Pareto branch is this crate's choice of heavy-tailed increments.

use std::io::Write;

use asymsens::{
    asm_select, asymmetry, ism_sample, make_grid, GridKind, NoiseSource, OutputBounds, PrivacyBudget,
    DEFAULT_BETA, DEFAULT_QUERY_CAP,
};
use rand::Rng;
use rand_distr::{Distribution, Pareto};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiment::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub rows: usize,
    pub epsilons: Vec<f64>,
    pub seed: u64,
    /// Bound steps on each side.
    pub n: usize,
    /// Mechanism draws averaged per row.
    pub draws: usize,
    pub beta: f64,
}

impl SimulationConfig {
    pub fn new(rows: usize, epsilons: Vec<f64>, seed: u64) -> Self {
        Self { rows, epsilons, seed, n: 50, draws: 20, beta: DEFAULT_BETA }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryRow {
    pub epsilon: f64,
    pub asymmetry: f64,
    pub ism_error: f64,
    pub asm_error: f64,
    pub error_ratio: f64,
    pub heavy_tailed: bool,
    pub upper_scale: f64,
}

/// Draws one set of bounds centered at 0.
pub fn random_bounds<R: Rng>(n: usize, rng: &mut R) -> (OutputBounds, bool, f64) {
    let heavy = rng.random_bool(0.5);
    let scale = 10f64.powf(rng.random_range(-1.5..1.5));
    let pareto = Pareto::new(scale, 1.5).expect("positive Pareto parameters");
    let mut lower = vec![0.0];
    let mut upper = vec![0.0];
    for l in 0..n {
        lower.push(lower[l] - rng.random_range(0.0..1.0));
        let du = if heavy { pareto.sample(rng) } else { rng.random_range(0.0..scale) };
        upper.push(upper[l] + du);
    }
    let bounds = OutputBounds::new(0.0, lower, upper).expect("monotone by construction");
    (bounds, heavy, scale)
}

fn one_row(config: &SimulationConfig, row: usize) -> Result<AsymmetryRow> {
    let epsilon = config.epsilons[row % config.epsilons.len()];
    let mut rng = NoiseSource::new(derive_seed(config.seed, &[row as u64]));
    let (bounds, heavy_tailed, upper_scale) = random_bounds(config.n, &mut rng);

    let grid = make_grid(
        GridKind::GeometricShifted { lower: bounds.lower()[bounds.n()] },
        config.beta,
        DEFAULT_QUERY_CAP,
    )?;
    let budget = PrivacyBudget::general(epsilon)?;
    let (mut ism, mut asm) = (0.0, 0.0);
    for _ in 0..config.draws {
        ism += ism_sample(&bounds, epsilon, &mut rng)?.estimate.abs();
        asm += asm_select(&bounds, &grid, &budget, &mut rng)?.estimate.abs();
    }
    let draws = config.draws as f64;
    let (ism_error, asm_error) = (ism / draws, asm / draws);
    Ok(AsymmetryRow {
        epsilon,
        asymmetry: asymmetry(&bounds, epsilon)?,
        ism_error,
        asm_error,
        error_ratio: ism_error / asm_error,
        heavy_tailed,
        upper_scale,
    })
}

pub fn simulate_asymmetry(config: &SimulationConfig) -> Result<Vec<AsymmetryRow>> {
    if config.rows == 0 {
        return Err(crate::BenchError::InvalidSpec("rows must be at least 1".into()));
    }
    if config.epsilons.is_empty() || config.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(crate::BenchError::InvalidSpec("epsilons must be positive and finite".into()));
    }
    if config.n == 0 || config.draws == 0 {
        return Err(crate::BenchError::InvalidSpec("n and draws must be at least 1".into()));
    }
    (0..config.rows).into_par_iter().map(|r| one_row(config, r)).collect()
}

pub fn write_rows_csv<W: Write>(rows: &[AsymmetryRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    if rows.is_empty() {
        writer.write_record([
            "epsilon",
            "asymmetry",
            "ism_error",
            "asm_error",
            "error_ratio",
            "heavy_tailed",
            "upper_scale",
        ])?;
    }
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}
