//! Repeated-trial error measurement for the ASM and ISM estimators.

use std::fmt;

use asymsens::{
    bce_losses, build_loss_estimator, build_variance_estimator, ce_losses, ism_sample, linsep_bounds,
    mse_mae_losses, variance, ModelEvalInput, NoiseSource, OutputBounds, OutputGrid, PerItemLosses, Predictions,
    PrivacyBudget, RegressionMetric, VarianceConfig,
};
use asymsens::{asm_select, MechanismKind};
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::report::{ReportRow, TrialReport};
use crate::stats;

pub const DEFAULT_EPSILONS: [f64; 5] = [0.1, 0.25, 0.5, 1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Variance,
    Bce,
    Ce,
    Mse,
    Mae,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Variance => "variance",
            Task::Bce => "bce",
            Task::Ce => "ce",
            Task::Mse => "mse",
            Task::Mae => "mae",
        }
    }

    // Cross-entropy tasks estimate a sum; the rest already live on the
    // per-example scale.
    fn is_sum(self) -> bool {
        matches!(self, Task::Bce | Task::Ce)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Data an experiment samples from.
#[derive(Debug, Clone)]
pub enum Dataset {
    Values(Vec<f64>),
    Model(ModelEvalInput),
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::Values(v) => v.len(),
            Dataset::Model(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub task: Task,
    pub epsilons: Vec<f64>,
    pub trials: usize,
    pub sample_size: usize,
    pub beta: f64,
    /// Data range for variance, output range for the model metrics.
    pub range: Option<(f64, f64)>,
    pub cutoff: usize,
    pub seed: u64,
    pub mechanisms: Vec<MechanismKind>,
    /// Disables all noise. Not private; for testing only.
    pub zero_noise: bool,
}

impl ExperimentSpec {
    pub fn new(task: Task) -> Self {
        Self {
            task,
            epsilons: DEFAULT_EPSILONS.to_vec(),
            trials: 100,
            sample_size: 1000,
            beta: asymsens::DEFAULT_BETA,
            range: None,
            cutoff: 100,
            seed: 0,
            mechanisms: vec![MechanismKind::Asm],
            zero_noise: false,
        }
    }

    /// ASM and ISM when a range is set, ASM alone otherwise.
    pub fn default_mechanisms(range: Option<(f64, f64)>) -> Vec<MechanismKind> {
        match range {
            Some(_) => vec![MechanismKind::Asm, MechanismKind::Ism],
            None => vec![MechanismKind::Asm],
        }
    }

    pub fn validate(&self, dataset: &Dataset) -> Result<()> {
        let invalid = |msg: String| Err(BenchError::InvalidSpec(msg));
        if self.trials == 0 {
            return invalid("trials must be at least 1".into());
        }
        if self.epsilons.is_empty() {
            return invalid("no epsilons given".into());
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
            return invalid(format!("epsilon {e} is not positive and finite"));
        }
        if self.sample_size == 0 || self.sample_size > dataset.len() {
            return invalid(format!(
                "sample size {} must be in 1..={} (the dataset size)",
                self.sample_size,
                dataset.len()
            ));
        }
        if !(self.beta > 1.0 && self.beta.is_finite()) {
            return invalid(format!("beta must be finite and > 1, got {}", self.beta));
        }
        if let Some((a, b)) = self.range {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return invalid(format!("range needs finite a < b, got {a},{b}"));
            }
        }
        if self.mechanisms.is_empty() {
            return invalid("no mechanisms selected".into());
        }
        if self.mechanisms.contains(&MechanismKind::Ism) && self.range.is_none() {
            return Err(asymsens::Error::UnboundedDomain(
                "ISM needs a bounded range; pass --range A,B or drop ism from --mechanisms".into(),
            )
            .into());
        }
        match (self.task, dataset) {
            (Task::Variance, Dataset::Values(_)) => Ok(()),
            (Task::Ce, Dataset::Model(m)) if matches!(m.predictions, Predictions::Logits(_)) => Ok(()),
            (Task::Bce | Task::Mse | Task::Mae, Dataset::Model(m)) if matches!(m.predictions, Predictions::Scalar(_)) => {
                Ok(())
            }
            _ => invalid(format!("dataset layout does not fit task {}", self.task)),
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed derived from the experiment seed and a path of indices.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix(seed), |acc, &p| splitmix(acc ^ splitmix(p)))
}

const SUBSAMPLE_STREAM: u64 = u64::MAX;

fn mechanism_stream(mechanism: MechanismKind) -> u64 {
    match mechanism {
        MechanismKind::Asm => 0,
        MechanismKind::Ism => 1,
    }
}

// One subsample's ingredients, reused across epsilons.
struct Prepared {
    truth: f64,
    asm: Option<(OutputBounds, OutputGrid, bool)>,
    ism: Option<OutputBounds>,
}

fn clip(values: &[f64], range: Option<(f64, f64)>) -> Vec<f64> {
    match range {
        Some((a, b)) => values.iter().map(|v| v.clamp(a, b)).collect(),
        None => values.to_vec(),
    }
}

fn losses_for(task: Task, input: &ModelEvalInput) -> Result<PerItemLosses> {
    Ok(match task {
        Task::Bce => bce_losses(input)?,
        Task::Ce => ce_losses(input)?,
        Task::Mse => mse_mae_losses(input, RegressionMetric::Mse)?,
        Task::Mae => mse_mae_losses(input, RegressionMetric::Mae)?,
        Task::Variance => unreachable!("variance has no per-item losses"),
    })
}

fn prepare(spec: &ExperimentSpec, dataset: &Dataset, indices: &[usize]) -> Result<Prepared> {
    let want_asm = spec.mechanisms.contains(&MechanismKind::Asm);
    let want_ism = spec.mechanisms.contains(&MechanismKind::Ism);
    // Epsilon only affects the budget, which is rebuilt per epsilon.
    let placeholder_eps = 1.0;
    match dataset {
        Dataset::Values(values) => {
            let raw: Vec<f64> = indices.iter().map(|&i| values[i]).collect();
            let truth = variance(&raw)?;
            let config = VarianceConfig { cutoff: spec.cutoff, range: spec.range, beta: spec.beta };
            let est = build_variance_estimator(&clip(&raw, spec.range), &config, placeholder_eps)?;
            let ism = want_ism.then(|| est.bounds.clone());
            Ok(Prepared { truth, asm: want_asm.then_some((est.bounds, est.grid, false)), ism })
        }
        Dataset::Model(input) => {
            let raw = input.select(indices);
            let truth = losses_for(spec.task, &ModelEvalInput { output_range: None, ..raw.clone() })?.value();
            let restricted = ModelEvalInput { output_range: spec.range, ..raw };
            let losses = losses_for(spec.task, &restricted)?;
            let asm = if want_asm {
                let est = build_loss_estimator(&losses, spec.cutoff, spec.beta, placeholder_eps)?;
                Some((est.bounds, est.grid, true))
            } else {
                None
            };
            let ism = if want_ism { Some(linsep_bounds(&losses, losses.len())?) } else { None };
            Ok(Prepared { truth, asm, ism })
        }
    }
}

struct TrialOutcome {
    // Indexed [epsilon][mechanism]: (absolute error, exhausted).
    errors: Vec<Vec<(f64, bool)>>,
}

fn run_trial(spec: &ExperimentSpec, dataset: &Dataset, trial: usize) -> Result<TrialOutcome> {
    let mut sampler = NoiseSource::new(derive_seed(spec.seed, &[SUBSAMPLE_STREAM, trial as u64]));
    let indices = index::sample(&mut sampler, dataset.len(), spec.sample_size).into_vec();
    let prepared = prepare(spec, dataset, &indices)?;

    let mut errors = Vec::with_capacity(spec.epsilons.len());
    for (e, &eps) in spec.epsilons.iter().enumerate() {
        let mut row = Vec::with_capacity(spec.mechanisms.len());
        for &mechanism in &spec.mechanisms {
            let seed = derive_seed(spec.seed, &[e as u64, trial as u64, mechanism_stream(mechanism)]);
            let mut rng = NoiseSource::new(seed);
            let result = match mechanism {
                MechanismKind::Asm => {
                    let (bounds, grid, monotone) = prepared.asm.as_ref().expect("prepared for ASM");
                    let budget = if spec.zero_noise {
                        PrivacyBudget::zero_noise(*monotone)
                    } else if *monotone {
                        PrivacyBudget::monotone(eps)?
                    } else {
                        PrivacyBudget::general(eps)?
                    };
                    asm_select(bounds, grid, &budget, &mut rng)?
                }
                MechanismKind::Ism => {
                    let bounds = prepared.ism.as_ref().expect("prepared for ISM");
                    let eps = if spec.zero_noise { f64::INFINITY } else { eps };
                    ism_sample(bounds, eps, &mut rng)?
                }
            };
            row.push(((result.estimate - prepared.truth).abs(), result.exhausted));
        }
        errors.push(row);
    }
    Ok(TrialOutcome { errors })
}

/// Runs every trial (in parallel) and aggregates the errors per
/// (epsilon, mechanism). Output depends only on `spec` and `dataset`.
pub fn run_experiment(spec: &ExperimentSpec, dataset: &Dataset) -> Result<TrialReport> {
    spec.validate(dataset)?;
    let outcomes = (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(spec, dataset, t))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (e, &epsilon) in spec.epsilons.iter().enumerate() {
        for (m, &mechanism) in spec.mechanisms.iter().enumerate() {
            let errors: Vec<f64> = outcomes.iter().map(|o| o.errors[e][m].0).collect();
            let exhausted_trials = outcomes.iter().filter(|o| o.errors[e][m].1).count();
            let mean_abs_error = stats::mean(&errors);
            let (ci_low, ci_high) = stats::ci90(&errors);
            let per_example = if spec.task.is_sum() {
                mean_abs_error / spec.sample_size as f64
            } else {
                mean_abs_error
            };
            rows.push(ReportRow {
                epsilon,
                mechanism,
                mean_abs_error,
                ci_low,
                ci_high,
                trials: spec.trials,
                per_example_mean_abs_error: per_example,
                exhausted_trials,
                errors,
            });
        }
    }
    Ok(TrialReport {
        task: spec.task,
        seed: spec.seed,
        beta: spec.beta,
        bounded: spec.range.is_some(),
        range: spec.range,
        sample_size: spec.sample_size,
        cutoff: spec.cutoff,
        zero_noise: spec.zero_noise,
        rows,
    })
}
