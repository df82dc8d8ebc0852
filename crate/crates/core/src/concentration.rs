//! Medians, empirical lower bounds on the concentration function, deviation
//! curves of Lipschitz functionals and the analytic profile catalog.
//!
//! The concentration function is a supremum over all sets of measure at
//! least one half. We only ever bound it from below, using half-spaces cut at
//! the empirical median of a linear functional; the ε-expansion of a
//! half-space `{⟨θ,x⟩ ≤ t}` under a norm is exactly `{⟨θ,x⟩ ≤ t + ε‖θ‖_*}`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{invalid, Error, Result};
use crate::measures::{Points, SampleBatch};
use crate::normspace::NormSpec;
use crate::rng;

/// Minimum sample size accepted by [`empirical_median`].
pub const MIN_MEDIAN_SAMPLES: usize = 100;

/// Default number of random directions added to the coordinate axes.
pub const DEFAULT_RANDOM_DIRECTIONS: usize = 256;

const Z95: f64 = 1.96;

/// Sample median with a distribution-free 95% interval from order statistics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MedianEstimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub count: usize,
}

impl MedianEstimate {
    /// Larger of the two distances from the estimate to its interval ends.
    pub fn half_width(&self) -> f64 {
        (self.value - self.ci_low).max(self.ci_high - self.value)
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// Median of `values` with order-statistic confidence bounds.
pub fn empirical_median(values: &[f64]) -> Result<MedianEstimate> {
    if values.len() < MIN_MEDIAN_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_MEDIAN_SAMPLES,
            got: values.len(),
        });
    }
    check_finite(values)?;
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(median_of_sorted(&sorted))
}

/// As [`empirical_median`] for data that is already sorted ascending.
pub fn median_of_sorted(sorted: &[f64]) -> MedianEstimate {
    let n = sorted.len();
    let value = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    // Ranks N/2 ∓ z·√N/2 bracket the median with ≈95% coverage (1-based).
    let half = 0.5 * Z95 * (n as f64).sqrt();
    let lo_rank = ((n as f64 / 2.0 - half).floor() as usize).clamp(1, n);
    let hi_rank = ((n as f64 / 2.0 + half).ceil() as usize + 1).clamp(1, n);
    MedianEstimate {
        value,
        ci_low: sorted[lo_rank - 1].min(value),
        ci_high: sorted[hi_rank - 1].max(value),
        count: n,
    }
}

/// Sample mean with a normal-approximation 95% half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub value: f64,
    pub ci: f64,
    pub count: usize,
}

pub fn empirical_mean(values: &[f64]) -> Result<MeanEstimate> {
    if values.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: values.len(),
        });
    }
    check_finite(values)?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    Ok(MeanEstimate {
        value: mean,
        ci: Z95 * (var / n).sqrt(),
        count: values.len(),
    })
}

/// The half-space `{x : ⟨θ, x⟩ ≤ t}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalfSpace {
    pub theta: Vec<f64>,
    pub threshold: f64,
}

impl HalfSpace {
    pub fn contains(&self, x: &[f64]) -> bool {
        dot(&self.theta, x) <= self.threshold
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The ε-expansion of `{⟨θ,x⟩ ≤ t}` in the distance induced by `metric`.
pub fn halfspace_expansion(theta: &[f64], t: f64, eps: f64, metric: &NormSpec) -> Result<HalfSpace> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(invalid("eps", format!("must be finite and nonnegative, got {eps}")));
    }
    let reach = metric.dual().eval(theta)?;
    if reach == 0.0 {
        return Err(Error::ZeroDirection);
    }
    Ok(HalfSpace {
        theta: theta.to_vec(),
        threshold: t + eps * reach,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionKind {
    /// Standard Gaussian entries.
    #[default]
    Gaussian,
    /// Independent random signs.
    Rademacher,
}

/// Test directions used for the half-space lower bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DirectionFamily {
    /// Include the `n` coordinate axes.
    pub axes: bool,
    /// Include the all-ones direction.
    pub diagonal: bool,
    /// Number of random directions.
    pub random: usize,
    pub kind: DirectionKind,
    pub seed: u64,
}

impl Default for DirectionFamily {
    fn default() -> Self {
        DirectionFamily {
            axes: true,
            diagonal: false,
            random: DEFAULT_RANDOM_DIRECTIONS,
            kind: DirectionKind::Gaussian,
            seed: 0,
        }
    }
}

impl DirectionFamily {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_kind(mut self, kind: DirectionKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn size(&self, dim: usize) -> usize {
        (if self.axes { dim } else { 0 }) + usize::from(self.diagonal) + self.random
    }

    /// Direction number `index` in a fixed order: axes, diagonal, random.
    pub fn direction(&self, dim: usize, index: usize) -> Vec<f64> {
        let mut index = index;
        if self.axes {
            if index < dim {
                let mut e = vec![0.0; dim];
                e[index] = 1.0;
                return e;
            }
            index -= dim;
        }
        if self.diagonal {
            if index == 0 {
                return vec![1.0; dim];
            }
            index -= 1;
        }
        let key = rng::derive_seed(self.seed, "directions");
        let mut r = rng::stream(key, index as u64);
        match self.kind {
            DirectionKind::Gaussian => (0..dim).map(|_| r.sample(StandardNormal)).collect(),
            DirectionKind::Rademacher => (0..dim)
                .map(|_| if r.random::<bool>() { 1.0 } else { -1.0 })
                .collect(),
        }
    }

    /// All directions, in order.
    pub fn directions(&self, dim: usize) -> Vec<Vec<f64>> {
        (0..self.size(dim)).map(|i| self.direction(dim, i)).collect()
    }
}

/// Empirical lower bound on the concentration function over an ε grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationCurve {
    pub eps: Vec<f64>,
    /// Monotone (isotonic) lower bound, the reported estimate.
    pub alpha_hat: Vec<f64>,
    /// Raw maxima over the direction family before isotonic cleanup.
    pub alpha_raw: Vec<f64>,
    /// 95% binomial half-widths with continuity correction.
    pub ci: Vec<f64>,
    /// Maximizing oriented direction per grid point: `2·d` for the lower
    /// side `{⟨θ_d,x⟩ ≤ m}`, `2·d + 1` for the upper side.
    pub direction_id: Vec<usize>,
    pub metric: NormSpec,
    pub family_size: usize,
    pub sample_count: usize,
}

impl ConcentrationCurve {
    /// CSV with columns `eps, alpha_hat, ci, direction_id_of_max`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["eps", "alpha_hat", "ci", "direction_id_of_max"])?;
        for i in 0..self.eps.len() {
            out.write_record([
                self.eps[i].to_string(),
                self.alpha_hat[i].to_string(),
                self.ci[i].to_string(),
                self.direction_id[i].to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// 95% normal-approximation half-width for a proportion, with continuity
/// correction.
pub fn binomial_ci(p: f64, count: usize) -> f64 {
    let n = count as f64;
    Z95 * (p * (1.0 - p) / n).sqrt() + 0.5 / n
}

/// Pool-adjacent-violators fit of a nonincreasing sequence.
pub fn isotonic_nonincreasing(values: &[f64]) -> Vec<f64> {
    // Blocks of (mean, weight).
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m1, w1) = blocks[blocks.len() - 1];
            let (m0, w0) = blocks[blocks.len() - 2];
            if m0 >= m1 {
                break;
            }
            blocks.pop();
            let w = w0 + w1;
            *blocks.last_mut().unwrap() = ((m0 * w0 as f64 + m1 * w1 as f64) / w as f64, w);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, w)| std::iter::repeat_n(m, w))
        .collect()
}

fn check_grid(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::Empty("eps grid"));
    }
    check_finite(eps)?;
    if eps[0] <= 0.0 || eps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("eps", "grid must be positive and strictly increasing"));
    }
    Ok(())
}

// Directions per matrix product; bounds the projection buffer to N × CHUNK.
const CHUNK: usize = 32;

/// Per-direction exceedance counts: `(lower side, upper side)` for every ε.
fn direction_counts(proj: &mut [f64], reach: f64, eps: &[f64]) -> Vec<(usize, usize)> {
    proj.sort_unstable_by(f64::total_cmp);
    let m = median_of_sorted(proj).value;
    let n = proj.len();
    eps.iter()
        .map(|&e| {
            let shift = e * reach;
            // outside {⟨θ,x⟩ ≤ m + shift}
            let upper = n - proj.partition_point(|&v| v <= m + shift);
            // outside {⟨θ,x⟩ ≥ m − shift}
            let lower = proj.partition_point(|&v| v < m - shift);
            (upper, lower)
        })
        .collect()
}

/// Half-space lower bound on the concentration function of the empirical
/// measure of `points` in the distance induced by `metric`.
///
/// For every direction θ of the family, both half-spaces cut at the sample
/// median of `⟨θ, x⟩` carry at least half of the sample; the estimate at ε is
/// the largest sample fraction outside one of their exact ε-expansions.
pub fn concentration_lower_curve(
    points: Points<'_>,
    metric: &NormSpec,
    eps: &[f64],
    family: &DirectionFamily,
) -> Result<ConcentrationCurve> {
    check_grid(eps)?;
    let dim = points.dim();
    if metric.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: metric.dim(),
        });
    }
    let count = points.count();
    if count < MIN_MEDIAN_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_MEDIAN_SAMPLES,
            got: count,
        });
    }
    let size = family.size(dim);
    if size == 0 {
        return Err(Error::Empty("direction family"));
    }
    let dual = metric.dual();
    let x = DMatrix::from_row_slice(count, dim, points.data());

    let mut best = vec![(0usize, 0usize); eps.len()];
    for start in (0..size).step_by(CHUNK) {
        let end = (start + CHUNK).min(size);
        let dirs: Vec<Vec<f64>> = (start..end).map(|i| family.direction(dim, i)).collect();
        let d = DMatrix::from_fn(dim, dirs.len(), |r, c| dirs[c][r]);
        let mut proj = &x * d;
        let counts: Vec<Vec<(usize, usize)>> = proj
            .as_mut_slice()
            .par_chunks_mut(count)
            .zip(dirs.par_iter())
            .map(|(column, theta)| {
                let reach = dual.norm(theta);
                direction_counts(column, reach, eps)
            })
            .collect();
        for (offset, per_eps) in counts.iter().enumerate() {
            let base = 2 * (start + offset);
            for (j, &(upper, lower)) in per_eps.iter().enumerate() {
                // Ties keep the smallest id.
                if lower > best[j].0 {
                    best[j] = (lower, base);
                }
                if upper > best[j].0 {
                    best[j] = (upper, base + 1);
                }
            }
        }
    }
    let n = count as f64;
    let alpha_raw: Vec<f64> = best.iter().map(|&(c, _)| c as f64 / n).collect();
    let alpha_hat = isotonic_nonincreasing(&alpha_raw);
    let ci = alpha_hat.iter().map(|&p| binomial_ci(p, count)).collect();
    Ok(ConcentrationCurve {
        eps: eps.to_vec(),
        alpha_hat,
        alpha_raw,
        ci,
        direction_id: best.iter().map(|&(_, id)| id).collect(),
        metric: metric.clone(),
        family_size: size,
        sample_count: count,
    })
}

/// [`concentration_lower_curve`] over a sample batch.
pub fn concentration_curve_for_batch(
    batch: &SampleBatch,
    metric: &NormSpec,
    eps: &[f64],
    family: &DirectionFamily,
) -> Result<ConcentrationCurve> {
    concentration_lower_curve(batch.points(), metric, eps, family)
}

/// Two-sided deviation curve `μ̂(|f − m_f| ≥ ε)` of a Lipschitz functional.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationCurve {
    pub eps: Vec<f64>,
    pub deviation: Vec<f64>,
    pub ci: Vec<f64>,
    pub median: MedianEstimate,
    pub lip: f64,
}

impl DeviationCurve {
    /// Grid points where the curve exceeds `2·profile(ε/lip)` beyond its CI.
    pub fn violations(&self, profile: &AnalyticProfile) -> Vec<usize> {
        (0..self.eps.len())
            .filter(|&i| {
                self.deviation[i] - self.ci[i] > 2.0 * profile.eval(self.eps[i] / self.lip)
            })
            .collect()
    }
}

pub fn lipschitz_deviation_curve<F>(
    points: Points<'_>,
    f: F,
    lip: f64,
    eps: &[f64],
) -> Result<DeviationCurve>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    check_grid(eps)?;
    if !(lip > 0.0) || !lip.is_finite() {
        return Err(invalid("lip", format!("must be positive, got {lip}")));
    }
    let mut values = points.map_rows(f);
    check_finite(&values)?;
    if values.len() < MIN_MEDIAN_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_MEDIAN_SAMPLES,
            got: values.len(),
        });
    }
    values.sort_unstable_by(f64::total_cmp);
    let median = median_of_sorted(&values);
    let m = median.value;
    let count = values.len();
    let deviation: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let below = values.partition_point(|&v| v <= m - e);
            let above = count - values.partition_point(|&v| v < m + e);
            (below + above) as f64 / count as f64
        })
        .collect();
    let ci = deviation.iter().map(|&p| binomial_ci(p, count)).collect();
    Ok(DeviationCurve {
        eps: eps.to_vec(),
        deviation,
        ci,
        median,
        lip,
    })
}

/// Catalog keys for analytic profiles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileName {
    Sphere,
    Gaussian,
    Gamma1,
    Custom,
}

impl std::str::FromStr for ProfileName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" => Ok(ProfileName::Sphere),
            "gaussian" => Ok(ProfileName::Gaussian),
            "gamma1" => Ok(ProfileName::Gamma1),
            "custom" => Ok(ProfileName::Custom),
            other => Err(Error::UnknownProfile(other.to_string())),
        }
    }
}

/// Optional replacements for catalog constants.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileOverrides {
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub prefactor: Option<f64>,
    #[serde(rename = "c", default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    /// Multiplier of `ε²` besides `c`; defaults per profile.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent_scale: Option<f64>,
}

/// `α(ε) = C·exp(−c·ε²·s)` where `s` is the profile's exponent scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnalyticProfile {
    pub name: ProfileName,
    #[serde(rename = "C")]
    pub prefactor: f64,
    #[serde(rename = "c")]
    pub rate: f64,
    pub n: usize,
    pub exponent_scale: f64,
}

impl AnalyticProfile {
    pub fn eval(&self, eps: f64) -> f64 {
        self.prefactor * (-self.rate * eps * eps * self.exponent_scale).exp()
    }

    /// Smallest `ε ≥ 0` with `eval(ε) ≤ level`, for `level > 0`.
    pub fn inverse(&self, level: f64) -> f64 {
        if level >= self.prefactor {
            return 0.0;
        }
        ((self.prefactor / level).ln() / (self.rate * self.exponent_scale)).sqrt()
    }
}

/// Catalog profile for dimension `n`.
///
/// | name | C | c | exponent scale |
/// |---|---|---|---|
/// | sphere | 1 | 1/4 | n |
/// | gaussian | 1 | 1/2 | 1 |
/// | gamma1 | 2 | 1/16 | 1/n |
/// | custom | required | required | n |
///
/// The exponential product measure concentrates in the ℓ1 distance at the
/// scale `√n`, which is why `gamma1` divides by `n`.
pub fn analytic_profile(name: ProfileName, n: usize, overrides: ProfileOverrides) -> Result<AnalyticProfile> {
    if n == 0 {
        return Err(invalid("n", "must be positive"));
    }
    let nf = n as f64;
    let (c0, r0, s0) = match name {
        ProfileName::Sphere => (Some(1.0), Some(0.25), nf),
        ProfileName::Gaussian => (Some(1.0), Some(0.5), 1.0),
        ProfileName::Gamma1 => (Some(2.0), Some(1.0 / 16.0), 1.0 / nf),
        ProfileName::Custom => (None, None, nf),
    };
    let missing = || Error::UnknownProfile("custom profile needs both C and c".into());
    let prefactor = overrides.prefactor.or(c0).ok_or_else(missing)?;
    let rate = overrides.rate.or(r0).ok_or_else(missing)?;
    let exponent_scale = overrides.exponent_scale.unwrap_or(s0);
    if !(prefactor > 0.0) || !prefactor.is_finite() {
        return Err(invalid("C", format!("must be positive, got {prefactor}")));
    }
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(invalid("c", format!("must be positive, got {rate}")));
    }
    if !(exponent_scale > 0.0) || !exponent_scale.is_finite() {
        return Err(invalid("exponent_scale", format!("must be positive, got {exponent_scale}")));
    }
    Ok(AnalyticProfile {
        name,
        prefactor,
        rate,
        n,
        exponent_scale,
    })
}

/// Fitted sub-Gaussian rate: the largest `c` with `α̂(ε) ≤ K·exp(−c·ε²·n)` on
/// every grid point where `α̂(ε) ≥ floor`. `None` if no grid point qualifies.
pub fn fit_subgaussian_rate(curve: &ConcentrationCurve, n: usize, k: f64, floor: f64) -> Option<f64> {
    curve
        .eps
        .iter()
        .zip(&curve.alpha_hat)
        .filter(|&(_, &a)| a >= floor && a > 0.0)
        .map(|(&e, &a)| (k / a).ln() / (e * e * n as f64))
        .min_by(f64::total_cmp)
}
