//! Output bounds for the population variance.

use crate::{Error, Result};

/// Parameters of the variance bound construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceConfig {
    /// Exact lower bounds are computed for `l <= cutoff`; beyond it they are 0.
    /// Clamped to `n`.
    pub cutoff: usize,
    /// Data range `[a, b]`. `None` makes every upper bound past `l = 0` infinite.
    pub range: Option<(f64, f64)>,
    /// Growth factor of the candidate-output grid.
    pub beta: f64,
}

impl Default for VarianceConfig {
    fn default() -> Self {
        Self {
            cutoff: 100,
            range: None,
            beta: crate::DEFAULT_BETA,
        }
    }
}

impl VarianceConfig {
    pub(crate) fn validate(&self) -> Result<()> {
        if let Some((a, b)) = self.range {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidParameter(format!(
                    "variance range needs finite a < b, got ({a}, {b})"
                )));
            }
        }
        if !(self.beta > 1.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta must be finite and > 1, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

fn check_values(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidInput("variance of an empty dataset".into()));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "value {i} is not finite: {}",
            values[i]
        )));
    }
    Ok(())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population variance `(1/n) sum (x_i - mean)^2`, two-pass with the
/// first-order correction term.
pub fn variance(values: &[f64]) -> Result<f64> {
    check_values(values)?;
    let n = values.len() as f64;
    let m = mean(values);
    let (s1, s2) = values.iter().fold((0.0, 0.0), |(s1, s2), &x| {
        let d = x - m;
        (s1 + d, s2 + d * d)
    });
    Ok(((s2 - s1 * s1 / n) / n).max(0.0))
}

/// Lower output bounds `L^0..L^n` of the variance.
///
/// For `l <= cutoff` the bound is exact: the smallest variance reachable by
/// replacing `l` points is `(n - l)/n` times the smallest variance of a
/// contiguous window of `n - l` sorted values. Beyond the cutoff the bound is
/// 0. Only the `cutoff` smallest and largest values are ever sorted, so the
/// cost is `O(n + c^2)` (plus `O(c log c)` for the partial sort).
pub fn variance_lower_bounds(values: &[f64], config: &VarianceConfig) -> Result<Vec<f64>> {
    check_values(values)?;
    config.validate()?;
    let n = values.len();
    let c = config.cutoff.min(n);

    // Work on deviations from the mean so window sums of squares keep their
    // precision when the data sit far from zero.
    let shift = mean(values);
    let mut dev: Vec<f64> = values.iter().map(|x| x - shift).collect();
    let (total1, total2) = dev.iter().fold((0.0, 0.0), |(s1, s2), &d| (s1 + d, s2 + d * d));

    let (smallest, largest) = extremes(&mut dev, c);

    // Running sums of the j smallest / j largest deviations, j = 0..=c.
    let prefix = |xs: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let mut p1 = Vec::with_capacity(xs.len() + 1);
        let mut p2 = Vec::with_capacity(xs.len() + 1);
        let (mut a, mut b) = (0.0, 0.0);
        p1.push(0.0);
        p2.push(0.0);
        for &x in xs {
            a += x;
            b += x * x;
            p1.push(a);
            p2.push(b);
        }
        (p1, p2)
    };
    let (low1, low2) = prefix(&smallest);
    let (high1, high2) = prefix(&largest);

    let nf = n as f64;
    let mut bounds = vec![0.0; n + 1];
    for l in 0..=c {
        let m = n - l;
        if m == 0 {
            break;
        }
        let mf = m as f64;
        let mut best = f64::INFINITY;
        // Drop the l - i smallest and the i largest values.
        for i in 0..=l {
            let s1 = total1 - low1[l - i] - high1[i];
            let s2 = total2 - low2[l - i] - high2[i];
            let scaled = (s2 - s1 * s1 / mf) / nf;
            if scaled < best {
                best = scaled;
            }
        }
        bounds[l] = best.max(0.0);
    }
    Ok(bounds)
}

// The `c` smallest values ascending and the `c` largest descending.
fn extremes(values: &mut [f64], c: usize) -> (Vec<f64>, Vec<f64>) {
    let n = values.len();
    if c == 0 {
        return (Vec::new(), Vec::new());
    }
    if 2 * c >= n {
        values.sort_unstable_by(f64::total_cmp);
    } else {
        values.select_nth_unstable_by(c - 1, f64::total_cmp);
        values[..c].sort_unstable_by(f64::total_cmp);
        let rest = &mut values[c..];
        let k = rest.len() - c;
        rest.select_nth_unstable_by(k, f64::total_cmp);
        rest[k..].sort_unstable_by(f64::total_cmp);
    }
    let smallest = values[..c].to_vec();
    let largest = values[n - c..].iter().rev().copied().collect();
    (smallest, largest)
}

/// Upper output bounds `U^0..U^n` of the variance.
///
/// With a range `[a, b]` the bound is `Var + l (b - a)^2 / n`; every value
/// must already lie in the range. Without one, `U^l = +inf` for `l >= 1`.
pub fn variance_upper_bounds(values: &[f64], config: &VarianceConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let var = variance(values)?;
    let n = values.len();
    match config.range {
        None => {
            let mut upper = vec![f64::INFINITY; n + 1];
            upper[0] = var;
            Ok(upper)
        }
        Some((a, b)) => {
            if let Some(i) = values.iter().position(|&v| v < a || v > b) {
                return Err(Error::InvalidInput(format!(
                    "value {i} = {} lies outside the declared range [{a}, {b}]",
                    values[i]
                )));
            }
            let step = (b - a) * (b - a) / n as f64;
            Ok((0..=n).map(|l| var + l as f64 * step).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(cutoff: usize) -> VarianceConfig {
        VarianceConfig {
            cutoff,
            ..Default::default()
        }
    }

    #[test]
    fn variance_examples() {
        assert_eq!(variance(&[1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert!((variance(&[0.0, 1.0, 2.0]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(variance(&[]).is_err());
        assert!(variance(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn variance_far_from_zero() {
        let v = variance(&[1e9 + 1.0, 1e9 + 2.0, 1e9 + 3.0]).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn lower_bounds_small_example() {
        let lb = variance_lower_bounds(&[2.0, 0.0, 1.0], &cfg(3)).unwrap();
        assert!((lb[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((lb[1] - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(lb[2], 0.0);
        assert_eq!(lb[3], 0.0);
    }

    #[test]
    fn lower_bounds_truncate_past_cutoff() {
        let values: Vec<f64> = (0..50).map(|i| (i * i) as f64).collect();
        let full = variance_lower_bounds(&values, &cfg(50)).unwrap();
        let cut = variance_lower_bounds(&values, &cfg(5)).unwrap();
        assert_eq!(&full[..=5], &cut[..=5]);
        assert!(cut[6..].iter().all(|&v| v == 0.0));
        assert!(full.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        assert!(full[6] > 0.0);
    }

    #[test]
    fn partial_selection_matches_full_sort() {
        let values: Vec<f64> = (0..997).map(|i| ((i * 7919) % 997) as f64 * 0.37 - 50.0).collect();
        let partial = variance_lower_bounds(&values, &cfg(20)).unwrap();
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let full = variance_lower_bounds(&sorted, &cfg(997)).unwrap();
        for l in 0..=20 {
            assert!((partial[l] - full[l]).abs() < 1e-9 * (1.0 + full[l]), "l = {l}");
        }
    }

    #[test]
    fn upper_bounds() {
        let values: Vec<f64> = (0..100).map(|i| (i % 10) as f64).collect();
        let var = variance(&values).unwrap();
        let config = VarianceConfig { range: Some((0.0, 10.0)), ..Default::default() };
        let ub = variance_upper_bounds(&values, &config).unwrap();
        assert_eq!(ub[0], var);
        assert!((ub[3] - (var + 3.0)).abs() < 1e-12);

        let ub = variance_upper_bounds(&values, &VarianceConfig::default()).unwrap();
        assert_eq!(ub[0], var);
        assert!(ub[1..].iter().all(|v| v.is_infinite()));

        let config = VarianceConfig { range: Some((0.0, 5.0)), ..Default::default() };
        assert!(matches!(variance_upper_bounds(&values, &config), Err(Error::InvalidInput(_))));
        let config = VarianceConfig { range: Some((5.0, 0.0)), ..Default::default() };
        assert!(variance_upper_bounds(&values, &config).is_err());
    }
}
