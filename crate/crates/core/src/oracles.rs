//! Brute-force reference implementations.
//!
//! Everything here is deliberately naive (subset enumeration, linear scans,
//! breakpoint sweeps) and shares no code path with the production modules it
//! checks. Only compiled with the `oracles` feature.

use rand::Rng;

use crate::bounds::OutputBounds;
use crate::mechanisms::OutputGrid;
use crate::{Error, Result};

/// Largest dataset [`brute_variance_lower`] will enumerate.
pub const MAX_BRUTE_N: usize = 12;

/// Two equal-length datasets that differ in exactly one coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborPair<T> {
    pub base: Vec<T>,
    pub perturbed: Vec<T>,
    pub index: usize,
}

impl<T: Clone + PartialEq> NeighborPair<T> {
    /// Replaces coordinate `index` of `base` with `replacement`.
    pub fn new(base: Vec<T>, index: usize, replacement: T) -> Result<Self> {
        if index >= base.len() {
            return Err(Error::InvalidParameter(format!(
                "index {index} out of range for {} items",
                base.len()
            )));
        }
        if base[index] == replacement {
            return Err(Error::InvalidParameter("replacement equals the original item".into()));
        }
        let mut perturbed = base.clone();
        perturbed[index] = replacement;
        Ok(Self { base, perturbed, index })
    }

    /// Hamming distance between the two datasets (always 1).
    pub fn hamming(&self) -> usize {
        self.base.iter().zip(&self.perturbed).filter(|(a, b)| a != b).count()
    }

    pub fn swapped(&self) -> Self {
        Self {
            base: self.perturbed.clone(),
            perturbed: self.base.clone(),
            index: self.index,
        }
    }
}

/// Draws a random neighbor of `base` by replacing one uniformly chosen item
/// with `draw(rng)`; retries until the replacement differs.
pub fn random_neighbor<T, R, F>(base: &[T], rng: &mut R, mut draw: F) -> NeighborPair<T>
where
    T: Clone + PartialEq,
    R: Rng,
    F: FnMut(&mut R) -> T,
{
    let index = rng.random_range(0..base.len());
    loop {
        let replacement = draw(rng);
        if replacement != base[index] {
            return NeighborPair::new(base.to_vec(), index, replacement).expect("valid neighbor");
        }
    }
}

fn naive_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

/// Variance through the pairwise form `(1/n^2) sum_{i<j} (x_i - x_j)^2`.
pub fn pairwise_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mut acc = 0.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            acc += (a - b) * (a - b);
        }
    }
    acc / (n * n)
}

/// Smallest variance reachable by replacing `l` values, by enumerating every
/// size-`l` subset `S`: `min_S ((n - l)/n) Var(x without S)`. The replaced
/// values all move to the mean of the kept ones.
pub fn brute_variance_lower(values: &[f64], l: usize) -> Result<f64> {
    let n = values.len();
    if n == 0 || n > MAX_BRUTE_N {
        return Err(Error::InvalidParameter(format!(
            "brute force needs 1 <= n <= {MAX_BRUTE_N}, got {n}"
        )));
    }
    if l > n {
        return Err(Error::InvalidParameter(format!("l = {l} exceeds n = {n}")));
    }
    if l == n {
        return Ok(0.0);
    }
    let mut best = f64::INFINITY;
    let mut kept = Vec::with_capacity(n);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != l {
            continue;
        }
        kept.clear();
        kept.extend((0..n).filter(|i| mask & (1 << i) == 0).map(|i| values[i]));
        let v = (n - l) as f64 / n as f64 * naive_variance(&kept);
        best = best.min(v);
    }
    Ok(best)
}

/// `inf { l : L^l <= t <= U^l }` by a linear scan.
pub fn scan_inverse_sensitivity(bounds: &OutputBounds, t: f64) -> Option<usize> {
    (0..=bounds.n()).find(|&l| bounds.lower()[l] <= t && t <= bounds.upper()[l])
}

/// Reflective value by linear scan, as a plain `f64`.
pub fn scan_reflective(bounds: &OutputBounds, t: f64) -> f64 {
    let c = bounds.center();
    if t == c {
        return 0.0;
    }
    let sign = if t > c { 1.0 } else { -1.0 };
    match scan_inverse_sensitivity(bounds, t) {
        Some(l) => sign * (l as f64 - 0.5),
        None => sign * f64::INFINITY,
    }
}

/// Outcome of [`zero_noise_scan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanResult {
    pub value: f64,
    pub exhausted: bool,
}

/// Noise-free ASM on a single-pass grid: the first grid point whose
/// reflective value is `>= 0`, else the last point flagged as exhausted.
pub fn zero_noise_scan(bounds: &OutputBounds, grid: &OutputGrid) -> ScanResult {
    zero_noise_scan_points(bounds, grid.values())
}

/// [`zero_noise_scan`] over an explicit list of candidate outputs.
pub fn zero_noise_scan_points<I: IntoIterator<Item = f64>>(bounds: &OutputBounds, points: I) -> ScanResult {
    let mut last = f64::NAN;
    for t in points {
        if scan_reflective(bounds, t) >= 0.0 {
            return ScanResult { value: t, exhausted: false };
        }
        last = t;
    }
    ScanResult { value: last, exhausted: true }
}

/// One constant piece of a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPiece {
    pub low: f64,
    pub high: f64,
    pub height: f64,
}

impl DensityPiece {
    pub fn mass(&self) -> f64 {
        (self.high - self.low) * self.height
    }
}

/// Exact ISM density `exp(-len(t) eps / 2) / Z` as constant pieces between
/// consecutive distinct bound values. `len` is evaluated at each piece's
/// midpoint by linear scan; zero-width pieces are dropped.
pub fn analytic_ism_density(bounds: &OutputBounds, epsilon: f64) -> Result<Vec<DensityPiece>> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be nonnegative, got {epsilon}")));
    }
    if !bounds.is_bounded() {
        return Err(Error::UnboundedDomain("analytic density needs finite bounds".into()));
    }
    let mut breaks: Vec<f64> = bounds.lower().iter().chain(bounds.upper()).copied().collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut raw = Vec::new();
    for w in breaks.windows(2) {
        let (low, high) = (w[0], w[1]);
        let mid = 0.5 * (low + high);
        let l = scan_inverse_sensitivity(bounds, mid).expect("midpoint inside the outer bounds");
        raw.push((low, high, l));
    }
    if raw.is_empty() {
        return Err(Error::DegenerateBounds("support has zero length".into()));
    }
    let min_l = raw.iter().map(|p| p.2).min().unwrap_or(0);
    let unnormalized: Vec<DensityPiece> = raw
        .into_iter()
        .map(|(low, high, l)| DensityPiece {
            low,
            high,
            height: if epsilon == 0.0 { 1.0 } else { (-((l - min_l) as f64) * epsilon / 2.0).exp() },
        })
        .collect();
    let z: f64 = unnormalized.iter().map(DensityPiece::mass).sum();
    Ok(unnormalized
        .into_iter()
        .map(|p| DensityPiece { height: p.height / z, ..p })
        .collect())
}

/// Probability mass strictly above the center under [`analytic_ism_density`].
pub fn analytic_mass_above_center(bounds: &OutputBounds, epsilon: f64) -> Result<f64> {
    let c = bounds.center();
    Ok(analytic_ism_density(bounds, epsilon)?
        .iter()
        .filter(|p| p.low >= c)
        .map(DensityPiece::mass)
        .sum())
}

/// Lower and upper bounds of a linearly separable function for one `l`, by
/// enumerating which `l` items move to the per-item extremes.
pub fn brute_linsep_bounds(losses: &[f64], a: f64, b: f64, l: usize) -> Result<(f64, f64)> {
    let n = losses.len();
    if n == 0 || n > MAX_BRUTE_N || l > n {
        return Err(Error::InvalidParameter(format!("need 1 <= n <= {MAX_BRUTE_N} and l <= n")));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != l {
            continue;
        }
        let kept: f64 = (0..n).filter(|i| mask & (1 << i) == 0).map(|i| losses[i]).sum();
        lo = lo.min(kept + l as f64 * a);
        hi = hi.max(kept + l as f64 * b);
    }
    Ok((lo, hi))
}
