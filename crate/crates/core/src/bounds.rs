//! Output bounds and the inverse / reflective inverse sensitivity lookups.
//!
//! An [`OutputBounds`] stores, for every Hamming distance `l = 0..=n`, the
//! smallest (`lower[l]`) and largest (`upper[l]`) value the function can take
//! on a dataset within distance `l` of the underlying one, or a relaxation of
//! those values. Both mechanisms only ever see a function through this object.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// A real number or `±inf`. NaN is not representable.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[repr(transparent)]
pub struct ExtendedReal(f64);

impl ExtendedReal {
    pub const INFINITY: Self = Self(f64::INFINITY);
    pub const NEG_INFINITY: Self = Self(f64::NEG_INFINITY);

    pub fn new(value: f64) -> Result<Self> {
        if value.is_nan() {
            Err(Error::InvalidInput("NaN is not an extended real".into()))
        } else {
            Ok(Self(value))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl Eq for ExtendedReal {}

impl Ord for ExtendedReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.partial_cmp(&other.0).expect("ExtendedReal never holds NaN")
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl TryFrom<f64> for ExtendedReal {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ExtendedReal> for f64 {
    fn from(value: ExtendedReal) -> f64 {
        value.0
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            v if v == f64::INFINITY => f.write_str("inf"),
            v if v == f64::NEG_INFINITY => f.write_str("-inf"),
            v => write!(f, "{v}"),
        }
    }
}

// Finite values travel as JSON numbers, infinities as "inf" / "-inf".
impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            serializer.serialize_f64(self.0)
        } else if self.0 > 0.0 {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }

        match Repr::deserialize(deserializer)? {
            Repr::Number(v) => ExtendedReal::new(v).map_err(serde::de::Error::custom),
            Repr::Text(s) => match s.as_str() {
                "inf" | "+inf" | "infinity" | "+infinity" => Ok(Self::INFINITY),
                "-inf" | "-infinity" => Ok(Self::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!(
                    "expected a number, \"inf\" or \"-inf\", got {other:?}"
                ))),
            },
        }
    }
}

/// Lower and upper output bounds `L^0..L^n`, `U^0..U^n` around `f(x)`.
///
/// Invariants: `L^0 = U^0 = center`, `lower` nonincreasing, `upper`
/// nondecreasing, no NaN. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBounds", into = "RawBounds")]
pub struct OutputBounds {
    center: f64,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawBounds {
    center: f64,
    lower: Vec<ExtendedReal>,
    upper: Vec<ExtendedReal>,
}

impl TryFrom<RawBounds> for OutputBounds {
    type Error = Error;

    fn try_from(raw: RawBounds) -> Result<Self> {
        OutputBounds::new(
            raw.center,
            raw.lower.into_iter().map(f64::from).collect(),
            raw.upper.into_iter().map(f64::from).collect(),
        )
    }
}

impl From<OutputBounds> for RawBounds {
    fn from(b: OutputBounds) -> Self {
        // Validated bounds never contain NaN.
        RawBounds {
            center: b.center,
            lower: b.lower.into_iter().map(ExtendedReal).collect(),
            upper: b.upper.into_iter().map(ExtendedReal).collect(),
        }
    }
}

impl OutputBounds {
    /// Validates and wraps the two bound sequences.
    pub fn new(center: f64, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::InvalidBounds(format!("center must be finite, got {center}")));
        }
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidBounds(format!(
                "lower and upper must have equal nonzero length, got {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower[0] != center || upper[0] != center {
            return Err(Error::InvalidBounds(format!(
                "L^0 = {} and U^0 = {} must both equal the center {center}",
                lower[0], upper[0]
            )));
        }
        if lower.iter().chain(&upper).any(|v| v.is_nan()) {
            return Err(Error::InvalidBounds("bounds contain NaN".into()));
        }
        if let Some(l) = lower.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::InvalidBounds(format!(
                "lower bounds increase between l = {l} and l = {}",
                l + 1
            )));
        }
        if let Some(l) = upper.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidBounds(format!(
                "upper bounds decrease between l = {l} and l = {}",
                l + 1
            )));
        }
        Ok(Self {
            center,
            lower,
            upper,
        })
    }

    /// Builds bounds from raw sequences, forcing `L^0 = U^0 = center` and
    /// taking running min / max so floating-point noise in a mathematically
    /// monotone construction cannot break the ordering invariants.
    pub(crate) fn from_envelope(center: f64, mut lower: Vec<f64>, mut upper: Vec<f64>) -> Result<Self> {
        if let (Some(l0), Some(u0)) = (lower.first_mut(), upper.first_mut()) {
            *l0 = center;
            *u0 = center;
        }
        for l in 1..lower.len() {
            lower[l] = lower[l].min(lower[l - 1]);
        }
        for l in 1..upper.len() {
            upper[l] = upper[l].max(upper[l - 1]);
        }
        Self::new(center, lower, upper)
    }

    /// `f(x)`.
    pub fn center(&self) -> f64 {
        self.center
    }

    /// Dataset size `n`; the sequences have `n + 1` entries.
    pub fn n(&self) -> usize {
        self.lower.len() - 1
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Whether `L^n` and `U^n` are both finite.
    pub fn is_bounded(&self) -> bool {
        self.lower[self.n()].is_finite() && self.upper[self.n()].is_finite()
    }
}

/// Smallest `l` with `L^l <= t <= U^l`, or `None` when `t` lies outside
/// `[L^n, U^n]` (infinite distance). `O(log n)`.
pub fn inverse_sensitivity(bounds: &OutputBounds, t: f64) -> Option<usize> {
    if t.is_nan() {
        return None;
    }
    let l = if t >= bounds.center {
        bounds.upper.partition_point(|&u| u < t)
    } else {
        bounds.lower.partition_point(|&l| l > t)
    };
    (l <= bounds.n()).then_some(l)
}

/// A signed half-integer `sgn(t - f(x)) * (len - 1/2)`, or `±inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ReflectiveValue(f64);

impl ReflectiveValue {
    pub const ZERO: Self = Self(0.0);

    pub fn get(self) -> f64 {
        self.0
    }
}

impl From<ReflectiveValue> for f64 {
    fn from(value: ReflectiveValue) -> f64 {
        value.0
    }
}

/// Reflective inverse sensitivity of `t`: negative below the center,
/// positive above, exactly 0 at the center.
pub fn reflective_inverse_sensitivity(bounds: &OutputBounds, t: f64) -> ReflectiveValue {
    let sign = match t.partial_cmp(&bounds.center) {
        Some(Ordering::Greater) => 1.0,
        Some(Ordering::Less) => -1.0,
        _ => return ReflectiveValue::ZERO,
    };
    match inverse_sensitivity(bounds, t) {
        Some(l) => ReflectiveValue(sign * (l as f64 - 0.5)),
        None => ReflectiveValue(sign * f64::INFINITY),
    }
}

/// Per-distance marginal widths `Δ_L^l = L^{l-1} - L^l` and
/// `Δ_U^l = U^l - U^{l-1}` for `l = 1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalDeltas {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Marginal widths of each bound step. A step between two equal infinite
/// bounds contributes 0.
pub fn marginal_deltas(bounds: &OutputBounds) -> MarginalDeltas {
    fn gap(hi: f64, lo: f64) -> f64 {
        if hi == lo {
            0.0
        } else {
            hi - lo
        }
    }
    MarginalDeltas {
        lower: bounds.lower.windows(2).map(|w| gap(w[0], w[1])).collect(),
        upper: bounds.upper.windows(2).map(|w| gap(w[1], w[0])).collect(),
    }
}
