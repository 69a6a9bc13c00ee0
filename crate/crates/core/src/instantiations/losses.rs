//! Linearly separable losses: `f(x) = scale * sum_i loss(x_i)`.
//!
//! Sorting the per-item losses once gives every bound in `O(n)`: within
//! distance `l` the sum is smallest when the `l` largest losses drop to the
//! per-item infimum `a`, and largest when the `l` smallest rise to the
//! supremum `b`.

use crate::bounds::{ExtendedReal, OutputBounds};
use crate::{Error, Result};

/// Per-item losses plus the infimum / supremum of one item's loss over the
/// whole data universe. `b` may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct PerItemLosses {
    pub losses: Vec<f64>,
    pub inf_loss: f64,
    pub sup_loss: ExtendedReal,
    /// Final multiplier on the sum: 1 for cross-entropy, `1/n` for MSE and MAE.
    pub scale: f64,
}

impl PerItemLosses {
    pub fn new(losses: Vec<f64>, inf_loss: f64, sup_loss: ExtendedReal, scale: f64) -> Result<Self> {
        if !inf_loss.is_finite() {
            return Err(Error::InvalidParameter(format!("loss infimum must be finite, got {inf_loss}")));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!("scale must be positive and finite, got {scale}")));
        }
        if losses.is_empty() {
            return Err(Error::InvalidInput("no losses".into()));
        }
        for (i, &loss) in losses.iter().enumerate() {
            if !loss.is_finite() || loss < inf_loss || loss > sup_loss.get() {
                return Err(Error::InvalidInput(format!(
                    "loss {i} = {loss} outside [{inf_loss}, {sup_loss}]"
                )));
            }
        }
        Ok(Self { losses, inf_loss, sup_loss, scale })
    }

    /// `f(x)`.
    pub fn value(&self) -> f64 {
        self.scale * self.losses.iter().sum::<f64>()
    }

    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }
}

/// Bounds of a linearly separable function, exact up to the `a` / `b`
/// relaxation for `l <= cutoff`. Past the cutoff the lower bound is `n a`
/// and the upper bound `+inf`.
pub fn linsep_bounds(losses: &PerItemLosses, cutoff: usize) -> Result<OutputBounds> {
    let n = losses.len();
    if n == 0 {
        return Err(Error::InvalidInput("no losses".into()));
    }
    let c = cutoff.min(n);
    let a = losses.inf_loss;
    let b = losses.sup_loss.get();
    let scale = losses.scale;

    let mut sorted = losses.losses.clone();
    sorted.sort_by(f64::total_cmp);
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &x in &sorted {
        acc += x;
        prefix.push(acc);
    }
    let total = prefix[n];

    let mut lower = vec![n as f64 * a * scale; n + 1];
    let mut upper = vec![f64::INFINITY; n + 1];
    for l in 0..=c {
        let lf = l as f64;
        lower[l] = scale * (prefix[n - l] + lf * a);
        upper[l] = if l == 0 {
            scale * total
        } else if b.is_infinite() {
            f64::INFINITY
        } else {
            scale * ((total - prefix[l]) + lf * b)
        };
    }
    OutputBounds::from_envelope(scale * total, lower, upper)
}

/// Model outputs: one logit per example, or one logit vector per example.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictions {
    Scalar(Vec<f64>),
    Logits(Vec<Vec<f64>>),
}

impl Predictions {
    pub fn len(&self) -> usize {
        match self {
            Predictions::Scalar(p) => p.len(),
            Predictions::Logits(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The predictions at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        match self {
            Predictions::Scalar(p) => Predictions::Scalar(indices.iter().map(|&i| p[i]).collect()),
            Predictions::Logits(p) => Predictions::Logits(indices.iter().map(|&i| p[i].clone()).collect()),
        }
    }
}

/// Predictions and labels of a model evaluation.
///
/// `output_range` restricts model outputs (and, for regression, labels) to
/// `[lo, hi]`; values outside are clamped into it. The restriction is what
/// makes the per-item loss supremum finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelEvalInput {
    pub predictions: Predictions,
    pub labels: Vec<f64>,
    pub output_range: Option<(f64, f64)>,
}

impl ModelEvalInput {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Rows at `indices`, keeping the range restriction.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            predictions: self.predictions.select(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            output_range: self.output_range,
        }
    }

    fn check(&self) -> Result<()> {
        if self.predictions.len() != self.labels.len() {
            return Err(Error::InvalidInput(format!(
                "{} predictions but {} labels",
                self.predictions.len(),
                self.labels.len()
            )));
        }
        if self.labels.is_empty() {
            return Err(Error::InvalidInput("empty evaluation set".into()));
        }
        if let Some((lo, hi)) = self.output_range {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidParameter(format!(
                    "output range needs finite lo < hi, got ({lo}, {hi})"
                )));
            }
        }
        Ok(())
    }

    fn clamp(&self, v: f64) -> f64 {
        match self.output_range {
            Some((lo, hi)) => v.clamp(lo, hi),
            None => v,
        }
    }
}

// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Binary cross-entropy per example, from logits and `{0, 1}` labels.
pub fn bce_losses(input: &ModelEvalInput) -> Result<PerItemLosses> {
    input.check()?;
    let Predictions::Scalar(preds) = &input.predictions else {
        return Err(Error::InvalidInput("binary cross-entropy needs scalar logits".into()));
    };
    let sup = match input.output_range {
        Some((lo, hi)) => ExtendedReal::new(softplus(hi.max(-lo)))?,
        None => ExtendedReal::INFINITY,
    };
    let mut losses = Vec::with_capacity(preds.len());
    for (i, (&w, &y)) in preds.iter().zip(&input.labels).enumerate() {
        if !w.is_finite() {
            return Err(Error::InvalidInput(format!("logit {i} is not finite")));
        }
        let w = input.clamp(w);
        // -log sigmoid(w) = softplus(-w); -log(1 - sigmoid(w)) = softplus(w).
        let loss = if y == 1.0 {
            softplus(-w)
        } else if y == 0.0 {
            softplus(w)
        } else {
            return Err(Error::InvalidInput(format!("label {i} = {y} is not 0 or 1")));
        };
        losses.push(loss.min(sup.get()));
    }
    PerItemLosses::new(losses, 0.0, sup, 1.0)
}

/// Softmax cross-entropy per example, from logit vectors and class indices.
pub fn ce_losses(input: &ModelEvalInput) -> Result<PerItemLosses> {
    input.check()?;
    let Predictions::Logits(rows) = &input.predictions else {
        return Err(Error::InvalidInput("cross-entropy needs logit vectors".into()));
    };
    let class_count = rows[0].len();
    if class_count < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 classes, got {class_count}")));
    }
    let sup = match input.output_range {
        // -log(e^{lo-hi} / (e^{lo-hi} + C - 1)) = (hi - lo) + ln(C - 1 + e^{lo-hi})
        Some((lo, hi)) => ExtendedReal::new((hi - lo) + ((class_count - 1) as f64 + (lo - hi).exp()).ln())?,
        None => ExtendedReal::INFINITY,
    };
    let mut losses = Vec::with_capacity(rows.len());
    let mut clamped = Vec::with_capacity(class_count);
    for (i, (row, &y)) in rows.iter().zip(&input.labels).enumerate() {
        if row.len() != class_count {
            return Err(Error::InvalidInput(format!(
                "row {i} has {} logits, expected {class_count}",
                row.len()
            )));
        }
        if y < 0.0 || y.fract() != 0.0 || y >= class_count as f64 {
            return Err(Error::InvalidInput(format!(
                "label {i} = {y} is not a class index below {class_count}"
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("row {i} has a non-finite logit")));
        }
        clamped.clear();
        clamped.extend(row.iter().map(|&v| input.clamp(v)));
        let max = clamped.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + clamped.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        // Rounding may push a worst-case row one ulp past the supremum.
        losses.push((lse - clamped[y as usize]).clamp(0.0, sup.get()));
    }
    PerItemLosses::new(losses, 0.0, sup, 1.0)
}

/// Regression metric selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegressionMetric {
    Mse,
    Mae,
}

/// Squared or absolute error per example, scaled by `1/n` so the function
/// is the mean error.
pub fn mse_mae_losses(input: &ModelEvalInput, metric: RegressionMetric) -> Result<PerItemLosses> {
    input.check()?;
    let Predictions::Scalar(preds) = &input.predictions else {
        return Err(Error::InvalidInput("regression metrics need scalar predictions".into()));
    };
    let sup = match input.output_range {
        Some((lo, hi)) => ExtendedReal::new(match metric {
            RegressionMetric::Mse => (hi - lo) * (hi - lo),
            RegressionMetric::Mae => hi - lo,
        })?,
        None => ExtendedReal::INFINITY,
    };
    let mut losses = Vec::with_capacity(preds.len());
    for (i, (&p, &y)) in preds.iter().zip(&input.labels).enumerate() {
        if !p.is_finite() || !y.is_finite() {
            return Err(Error::InvalidInput(format!("row {i} is not finite")));
        }
        let d = (input.clamp(p) - input.clamp(y)).abs();
        let loss = match metric {
            RegressionMetric::Mse => d * d,
            RegressionMetric::Mae => d,
        };
        losses.push(loss.min(sup.get()));
    }
    let n = losses.len() as f64;
    PerItemLosses::new(losses, 0.0, sup, 1.0 / n)
}
