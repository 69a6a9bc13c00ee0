//! Seedable randomness, exponential noise and the `AboveThreshold` primitive.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Deterministic random source. Equal seeds give bit-identical draw sequences.
///
/// Not shareable across threads; parallel trials should each own a source
/// seeded independently.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    seed: u64,
    rng: ChaCha12Rng,
}

impl NoiseSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform draw on `(0, 1]`, safe to pass to `ln`.
    pub fn uniform_open_closed(&mut self) -> f64 {
        1.0 - self.rng.random::<f64>()
    }
}

impl RngCore for NoiseSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Draws from the exponential distribution with the given scale (mean).
///
/// A scale of zero is a legal degenerate distribution and returns exactly 0
/// without consuming randomness.
pub fn sample_expo(scale: f64, rng: &mut NoiseSource) -> Result<f64> {
    if !scale.is_finite() || scale < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "exponential scale must be finite and nonnegative, got {scale}"
        )));
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(-scale * rng.uniform_open_closed().ln())
}

/// Split of the privacy parameter between the threshold noise (`epsilon1`)
/// and the per-query noise (`epsilon2`).
///
/// An epsilon of `+inf` is accepted and means zero noise; it exists so
/// deterministic tests can follow the exact control flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    epsilon1: f64,
    epsilon2: f64,
    monotone: bool,
}

impl PrivacyBudget {
    pub fn new(epsilon1: f64, epsilon2: f64, monotone: bool) -> Result<Self> {
        for (name, eps) in [("epsilon1", epsilon1), ("epsilon2", epsilon2)] {
            // `!(eps > 0)` also rejects NaN.
            if !(eps > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {eps}"
                )));
            }
        }
        Ok(Self {
            epsilon1,
            epsilon2,
            monotone,
        })
    }

    /// Default split for a general query stream: `(eps/2, eps/4)`, total `eps`.
    pub fn general(epsilon: f64) -> Result<Self> {
        Self::new(epsilon / 2.0, epsilon / 4.0, false)
    }

    /// Default split for a monotonic query stream: `(eps/2, eps/2)`, total `eps`.
    pub fn monotone(epsilon: f64) -> Result<Self> {
        Self::new(epsilon / 2.0, epsilon / 2.0, true)
    }

    /// Infinite epsilons: every noise draw is exactly zero. Not private.
    pub fn zero_noise(monotone: bool) -> Self {
        Self {
            epsilon1: f64::INFINITY,
            epsilon2: f64::INFINITY,
            monotone,
        }
    }

    pub fn epsilon1(&self) -> f64 {
        self.epsilon1
    }

    pub fn epsilon2(&self) -> f64 {
        self.epsilon2
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn total(&self) -> f64 {
        total_epsilon(self)
    }
}

/// Privacy cost of one `AboveThreshold` run under `budget`.
pub fn total_epsilon(budget: &PrivacyBudget) -> f64 {
    if budget.monotone {
        budget.epsilon1 + budget.epsilon2
    } else {
        budget.epsilon1 + 2.0 * budget.epsilon2
    }
}

/// Result of an `AboveThreshold` run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SvtOutcome {
    /// 0-based index of the first query reported above the threshold.
    pub halted_at: Option<usize>,
    /// Number of queries evaluated, including the halting one.
    pub queries_consumed: usize,
}

impl SvtOutcome {
    pub fn halted(&self) -> bool {
        self.halted_at.is_some()
    }
}

/// Sparse-vector `AboveThreshold` with exponential noise.
///
/// Draws a noisy threshold `T + Expo(sensitivity / epsilon1)` once, then for
/// each query adds `Expo(sensitivity / epsilon2)` and halts at the first
/// query whose noisy value is `>=` the noisy threshold. Queries are extended
/// reals: `+inf` always halts and `-inf` never does. Running out of stream or
/// hitting `cap` leaves `halted_at` empty; that is a normal outcome, not an
/// error.
pub fn above_threshold<I>(
    queries: I,
    sensitivity: f64,
    threshold: f64,
    budget: &PrivacyBudget,
    rng: &mut NoiseSource,
    cap: usize,
) -> Result<SvtOutcome>
where
    I: IntoIterator<Item = f64>,
{
    if !(sensitivity > 0.0) || !sensitivity.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sensitivity must be positive and finite, got {sensitivity}"
        )));
    }
    if !threshold.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "threshold must be finite, got {threshold}"
        )));
    }
    if cap == 0 {
        return Err(Error::InvalidParameter("query cap must be positive".into()));
    }

    let noisy_threshold = threshold + sample_expo(sensitivity / budget.epsilon1, rng)?;
    let query_scale = sensitivity / budget.epsilon2;

    let mut consumed = 0;
    for query in queries.into_iter().take(cap) {
        if query.is_nan() {
            return Err(Error::InvalidInput(format!(
                "query {consumed} evaluated to NaN"
            )));
        }
        let nu = sample_expo(query_scale, rng)?;
        consumed += 1;
        if query + nu >= noisy_threshold {
            return Ok(SvtOutcome {
                halted_at: Some(consumed - 1),
                queries_consumed: consumed,
            });
        }
    }
    Ok(SvtOutcome {
        halted_at: None,
        queries_consumed: consumed,
    })
}
