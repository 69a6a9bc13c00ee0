//! The inverse sensitivity mechanism (ISM), the asymmetric sensitivity
//! mechanism (ASM), candidate-output grids and the asymmetry metric.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::{marginal_deltas, reflective_inverse_sensitivity, OutputBounds};
use crate::noise::{above_threshold, NoiseSource, PrivacyBudget, SvtOutcome};
use crate::{Error, Result};

/// Default geometric growth factor of candidate outputs.
pub const DEFAULT_BETA: f64 = 1.005;

/// Hard limit on `AboveThreshold` queries per pass. Truncating there is
/// data-independent, so it costs no privacy.
pub const DEFAULT_QUERY_CAP: usize = 50_000;

/// Rule used to generate the candidate outputs fed to the ASM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    /// `beta^i - 1` for `i = 1, 2, ...`; for nonnegative functions.
    GeometricNonnegative,
    /// `lower + beta^i - 1`; for functions bounded below by `lower`.
    GeometricShifted { lower: f64 },
    /// Positive geometric pass, then a mirrored negative pass only when the
    /// first pass halts on its very first query.
    TwoPassUnbounded,
    /// `cap` equally spaced points in `(low, high]`.
    Uniform { low: f64, high: f64 },
}

/// A finite increasing stream of candidate outputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputGrid {
    kind: GridKind,
    beta: f64,
    cap: usize,
    len: usize,
}

/// Validates the parameters and builds a grid.
///
/// Geometric kinds stop early if `beta^i` would overflow, so a grid never
/// holds more than `cap` points per pass and every point is finite. `beta`
/// is ignored by the uniform kind.
pub fn make_grid(kind: GridKind, beta: f64, cap: usize) -> Result<OutputGrid> {
    if cap == 0 {
        return Err(Error::InvalidParameter("grid cap must be positive".into()));
    }
    let len = match kind {
        GridKind::Uniform { low, high } => {
            if !(low.is_finite() && high.is_finite() && low < high) {
                return Err(Error::InvalidParameter(format!(
                    "uniform grid needs finite low < high, got ({low}, {high})"
                )));
            }
            cap
        }
        GridKind::GeometricNonnegative | GridKind::TwoPassUnbounded | GridKind::GeometricShifted { .. } => {
            if !(beta > 1.0) || !beta.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "beta must be finite and > 1, got {beta}"
                )));
            }
            let offset = match kind {
                GridKind::GeometricShifted { lower } if !lower.is_finite() => {
                    return Err(Error::InvalidParameter(format!(
                        "shifted grid needs a finite lower bound, got {lower}"
                    )));
                }
                GridKind::GeometricShifted { lower } => lower,
                _ => 0.0,
            };
            let max_exponent = (f64::MAX.ln() / beta.ln()).floor();
            let mut len = if max_exponent >= cap as f64 { cap } else { max_exponent as usize };
            while len > 0 && !geometric_point(offset, beta, len - 1).is_finite() {
                len -= 1;
            }
            len
        }
    };
    if len == 0 {
        return Err(Error::InvalidParameter("grid would be empty".into()));
    }
    Ok(OutputGrid { kind, beta, cap, len })
}

fn geometric_point(offset: f64, beta: f64, index: usize) -> f64 {
    offset + (beta.powf((index + 1) as f64) - 1.0)
}

impl OutputGrid {
    /// Grid of `beta^i - 1` with the default query cap.
    pub fn geometric(beta: f64) -> Result<Self> {
        make_grid(GridKind::GeometricNonnegative, beta, DEFAULT_QUERY_CAP)
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Points per pass.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// The `index`-th point (0-based) of the first pass.
    pub fn value(&self, index: usize) -> f64 {
        debug_assert!(index < self.len);
        match self.kind {
            GridKind::GeometricNonnegative | GridKind::TwoPassUnbounded => {
                geometric_point(0.0, self.beta, index)
            }
            GridKind::GeometricShifted { lower } => geometric_point(lower, self.beta, index),
            GridKind::Uniform { low, high } => {
                if index + 1 == self.cap {
                    high
                } else {
                    low + (high - low) * ((index + 1) as f64 / self.cap as f64)
                }
            }
        }
    }

    /// Points of the first pass in increasing order.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.value(i))
    }

    /// Number of `AboveThreshold` runs the grid may trigger.
    pub fn max_passes(&self) -> usize {
        match self.kind {
            GridKind::TwoPassUnbounded => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MechanismKind {
    #[serde(rename = "ISM")]
    Ism,
    #[serde(rename = "ASM")]
    Asm,
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MechanismKind::Ism => "ISM",
            MechanismKind::Asm => "ASM",
        })
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// A private estimate and its accounting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MechanismResult {
    pub estimate: f64,
    /// `AboveThreshold` queries evaluated (0 for the ISM).
    pub queries_used: usize,
    pub mechanism: MechanismKind,
    pub total_epsilon: f64,
    /// Set when the ASM ran through its grid without halting and fell back
    /// to the last grid value.
    #[serde(default, skip_serializing_if = "is_false")]
    pub exhausted: bool,
}

// exp(-(l - 1) * eps / 2): the mechanism weight of distance l, rescaled so
// l = 1 has weight 1. The common factor cancels in every normalization.
fn distance_weight(l: usize, epsilon: f64) -> f64 {
    if l == 1 {
        1.0
    } else {
        (-((l - 1) as f64) * epsilon / 2.0).exp()
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

/// Inverse sensitivity mechanism with density proportional to
/// `exp(-len(x; t) * eps / 2)`.
///
/// Picks one of the intervals `[L^l, L^{l-1}]` / `[U^{l-1}, U^l]` with
/// probability proportional to its length times `exp(-l * eps / 2)`, then
/// returns a uniform point inside it. Needs finite `L^n` and `U^n`; the
/// caller is responsible for clipping data into a bounded range.
pub fn ism_sample(bounds: &OutputBounds, epsilon: f64, rng: &mut NoiseSource) -> Result<MechanismResult> {
    check_epsilon(epsilon)?;
    if !bounds.is_bounded() {
        return Err(Error::UnboundedDomain(format!(
            "outermost bounds are [{}, {}]",
            bounds.lower()[bounds.n()],
            bounds.upper()[bounds.n()]
        )));
    }

    let (lower, upper) = (bounds.lower(), bounds.upper());
    let n = bounds.n();
    // Intervals 0..n are below the center (distance l = i + 1), n..2n above.
    let interval = |i: usize| -> (f64, f64, usize) {
        if i < n {
            (lower[i + 1], lower[i], i + 1)
        } else {
            (upper[i - n], upper[i - n + 1], i - n + 1)
        }
    };
    let mass = |i: usize| {
        let (lo, hi, l) = interval(i);
        (hi - lo) * distance_weight(l, epsilon)
    };

    let total: f64 = (0..2 * n).map(mass).sum();
    let estimate = if total > 0.0 {
        let target = rng.uniform() * total;
        let mut acc = 0.0;
        let mut chosen = None;
        for i in 0..2 * n {
            let m = mass(i);
            if m <= 0.0 {
                continue;
            }
            chosen = Some(i);
            acc += m;
            if target < acc {
                break;
            }
        }
        // Rounding can leave `target` past the final sum; `chosen` then holds
        // the last interval with positive mass.
        let (lo, hi, _) = interval(chosen.expect("positive total implies a positive interval"));
        lo + rng.uniform() * (hi - lo)
    } else {
        // Every bound equals the center: all mass sits on f(x).
        bounds.center()
    };

    Ok(MechanismResult {
        estimate,
        queries_used: 0,
        mechanism: MechanismKind::Ism,
        total_epsilon: epsilon,
        exhausted: false,
    })
}

// One AboveThreshold run over the grid. With `sign = -1` the pass walks the
// mirrored points `-t_i` and negates the reflective values, which turns a
// downward search into an increasing query stream.
fn asm_pass(
    bounds: &OutputBounds,
    grid: &OutputGrid,
    sign: f64,
    budget: &PrivacyBudget,
    rng: &mut NoiseSource,
) -> Result<SvtOutcome> {
    let queries = grid
        .values()
        .map(|t| sign * reflective_inverse_sensitivity(bounds, sign * t).get());
    above_threshold(queries, 1.0, 0.0, budget, rng, grid.len())
}

fn pass_estimate(grid: &OutputGrid, sign: f64, outcome: &SvtOutcome) -> (f64, bool) {
    match outcome.halted_at {
        Some(k) => (sign * grid.value(k), false),
        None => (sign * grid.value(outcome.queries_consumed.max(1) - 1), true),
    }
}

/// Asymmetric sensitivity mechanism: `AboveThreshold` with sensitivity 1 and
/// threshold 0 over the reflective inverse sensitivities of the grid points,
/// returning the first point reported above threshold.
///
/// Infinite bounds are fine. If the grid runs out without a halt the last
/// grid value is returned and `exhausted` is set. A two-pass grid accounts
/// for both possible `AboveThreshold` runs in `total_epsilon`.
pub fn asm_select(
    bounds: &OutputBounds,
    grid: &OutputGrid,
    budget: &PrivacyBudget,
    rng: &mut NoiseSource,
) -> Result<MechanismResult> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty output grid".into()));
    }

    let first = asm_pass(bounds, grid, 1.0, budget, rng)?;
    let (estimate, exhausted, queries_used) =
        if grid.kind() == GridKind::TwoPassUnbounded && first.halted_at == Some(0) {
            let second = asm_pass(bounds, grid, -1.0, budget, rng)?;
            let (estimate, exhausted) = pass_estimate(grid, -1.0, &second);
            (estimate, exhausted, first.queries_consumed + second.queries_consumed)
        } else {
            let (estimate, exhausted) = pass_estimate(grid, 1.0, &first);
            (estimate, exhausted, first.queries_consumed)
        };

    Ok(MechanismResult {
        estimate,
        queries_used,
        mechanism: MechanismKind::Asm,
        total_epsilon: budget.total() * grid.max_passes() as f64,
        exhausted,
    })
}

/// `|Pr[ISM(x) > f(x)] - 1/2|`, computed from the weighted marginal widths
/// `W_U = sum Δ_U^l exp(-l eps / 2)` and `W_L` likewise.
///
/// An infinite width on exactly one side gives 1/2, on both sides 0.
pub fn asymmetry(bounds: &OutputBounds, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    let deltas = marginal_deltas(bounds);
    let weighted = |widths: &[f64]| -> f64 {
        widths
            .iter()
            .enumerate()
            .map(|(i, &w)| {
                let l = i + 1;
                if w == f64::INFINITY {
                    // Every weight is positive for finite epsilon, even if
                    // it underflows; infinite epsilon only keeps l = 1.
                    if epsilon.is_finite() || l == 1 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                } else if w == 0.0 {
                    0.0
                } else {
                    w * distance_weight(l, epsilon)
                }
            })
            .sum()
    };
    let (above, below) = (weighted(&deltas.upper), weighted(&deltas.lower));
    match (above.is_infinite(), below.is_infinite()) {
        (true, true) => Ok(0.0),
        (true, false) | (false, true) => Ok(0.5),
        (false, false) => {
            let total = above + below;
            if total <= 0.0 {
                return Err(Error::DegenerateBounds(
                    "all bound steps have zero width".into(),
                ));
            }
            Ok((above / total - 0.5).abs())
        }
    }
}
