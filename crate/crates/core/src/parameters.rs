//! Weighted containment functionals β and β̃, the ℓ∞ embedding lower bound
//! and the cube bounds.
//!
//! β and β̃ are infima over linear maps `T` with `L ⊆ TK ⊆ λL`. We search
//! restricted families (positive scalars, or diagonal maps), so every value
//! returned here is an upper bound on the true infimum.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::concentration::{empirical_mean, empirical_median, MeanEstimate, MedianEstimate};
use crate::error::{invalid, Error, Result};
use crate::measures::SampleBatch;
use crate::normspace::{containment_lambda, ContainmentConstant, NormSpec, Transform};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaVariant {
    /// Ratio of medians.
    Beta,
    /// Ratio of means.
    BetaTilde,
}

/// Candidate maps `T`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum TransformFamily {
    /// `T = s·I` over a geometric grid of `s`.
    #[default]
    Scalars,
    /// `T = diag(d)`: the identity plus `candidates` random log-normal
    /// diagonals with log-spread `spread`. Containment is estimated
    /// heuristically for non-identity candidates.
    Diagonal { candidates: usize, spread: f64, seed: u64 },
}

/// The minimizing map.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ChosenTransform {
    Scalar { s: f64 },
    Diagonal { entries: Vec<f64> },
}

/// Median and mean of a norm over a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormStatistics {
    pub median: MedianEstimate,
    pub mean: MeanEstimate,
}

impl NormStatistics {
    fn of(values: &[f64]) -> Result<Self> {
        Ok(NormStatistics {
            median: empirical_median(values)?,
            mean: empirical_mean(values)?,
        })
    }

    fn pick(&self, variant: BetaVariant) -> f64 {
        match variant {
            BetaVariant::Beta => self.median.value,
            BetaVariant::BetaTilde => self.mean.value,
        }
    }

    /// `mean / median`, printed alongside every estimate.
    pub fn mean_to_median(&self) -> f64 {
        self.mean.value / self.median.value
    }
}

/// Upper bound on β or β̃ over a transform family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BetaEstimate {
    pub variant: BetaVariant,
    pub value: f64,
    pub transform: ChosenTransform,
    /// Containment of `L` and `TK` at the minimizer, normalized so `scale = 1`.
    pub lambda: ContainmentConstant,
    /// `m_K` or `E‖·‖_K`.
    pub numerator: f64,
    /// `m_{T⁻¹L}` or `E‖·‖_{T⁻¹L}` at the minimizer.
    pub denominator: f64,
    pub k_stats: NormStatistics,
    /// Statistics of `‖T·‖_L` at the minimizer.
    pub l_stats: NormStatistics,
    pub candidates: usize,
    pub sample_count: usize,
    /// True when λ comes from a closed form rather than a random search.
    pub exact: bool,
}

/// Scalar grid: `s = s_min·2^{j/4}` for `j = 0..SCALAR_STEPS`.
const SCALAR_STEPS: usize = 17;

struct Candidate {
    transform: ChosenTransform,
    lambda: ContainmentConstant,
    value: f64,
    denominator: f64,
    l_stats: NormStatistics,
}

/// `β` (medians) or `β̃` (means) of `(K, μ)` against `L`, with μ the law of `batch`.
pub fn beta_with(
    batch: &SampleBatch,
    k: &NormSpec,
    l: &NormSpec,
    variant: BetaVariant,
    family: TransformFamily,
) -> Result<BetaEstimate> {
    let n = batch.dim();
    for norm in [k, l] {
        if norm.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: norm.dim(),
            });
        }
    }
    let points = batch.points();
    let k_stats = NormStatistics::of(&points.map_rows(|x| k.norm(x)))?;
    let numerator = k_stats.pick(variant);
    let l_stats = NormStatistics::of(&points.map_rows(|x| l.norm(x)))?;

    let base = containment_lambda(k, l)?;
    // T = s·I: ‖·‖_{sK} = ‖·‖_K/s, ‖·‖_{T⁻¹L} = s‖·‖_L. Feasible iff s ≥ 1/σ,
    // where λ(s) = s·σ·Λ and the value does not depend on s.
    let s_min = 1.0 / base.scale;
    let scalar = |s: f64| -> Candidate {
        let lambda = s * base.scale * base.lambda;
        let denominator = s * l_stats.pick(variant);
        Candidate {
            transform: ChosenTransform::Scalar { s },
            lambda: ContainmentConstant {
                lambda,
                scale: 1.0,
                exact: base.exact,
            },
            value: lambda * numerator / denominator,
            denominator,
            l_stats: NormStatistics {
                median: scale_median(&l_stats.median, s),
                mean: scale_mean(&l_stats.mean, s),
            },
        }
    };

    let candidates: Vec<Result<Candidate>> = match family {
        TransformFamily::Scalars => (0..SCALAR_STEPS)
            .into_par_iter()
            .map(|j| Ok(scalar(s_min * 2f64.powf(j as f64 / 4.0))))
            .collect(),
        TransformFamily::Diagonal {
            candidates,
            spread,
            seed,
        } => {
            if !(spread >= 0.0) || !spread.is_finite() {
                return Err(invalid("spread", format!("must be finite and nonnegative, got {spread}")));
            }
            let key = rng::derive_seed(seed, "diagonal-transforms");
            (0..=candidates)
                .into_par_iter()
                .map(|j| {
                    if j == 0 {
                        return Ok(scalar(s_min));
                    }
                    let mut r = rng::stream(key, j as u64);
                    let d: Vec<f64> = (0..n)
                        .map(|_| (spread * r.sample::<f64, _>(StandardNormal)).exp())
                        .collect();
                    diagonal_candidate(batch, k, l, &d, variant, numerator)
                })
                .collect()
        }
    };

    let mut best: Option<Candidate> = None;
    let mut count = 0;
    for c in candidates {
        let c = match c {
            Ok(c) => c,
            // An ill-conditioned random diagonal is simply not a candidate.
            Err(Error::IllConditioned { .. }) => continue,
            Err(e) => return Err(e),
        };
        count += 1;
        // Strict improvement only, so the earliest (smallest scalar) wins ties.
        if best.as_ref().is_none_or(|b| c.value < b.value * (1.0 - 1e-12)) {
            best = Some(c);
        }
    }
    let best = best.ok_or(Error::NoFeasibleTransform)?;
    Ok(BetaEstimate {
        variant,
        value: best.value,
        exact: best.lambda.exact,
        transform: best.transform,
        lambda: best.lambda,
        numerator,
        denominator: best.denominator,
        k_stats,
        l_stats: best.l_stats,
        candidates: count,
        sample_count: batch.count(),
    })
}

fn scale_median(m: &MedianEstimate, s: f64) -> MedianEstimate {
    MedianEstimate {
        value: s * m.value,
        ci_low: s * m.ci_low,
        ci_high: s * m.ci_high,
        count: m.count,
    }
}

fn scale_mean(m: &MeanEstimate, s: f64) -> MeanEstimate {
    MeanEstimate {
        value: s * m.value,
        ci: s * m.ci,
        count: m.count,
    }
}

fn diagonal_candidate(
    batch: &SampleBatch,
    k: &NormSpec,
    l: &NormSpec,
    d: &[f64],
    variant: BetaVariant,
    numerator: f64,
) -> Result<Candidate> {
    // ‖x‖_{DK} = ‖D⁻¹x‖_K.
    let inv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
    let dk = k.clone().with_transform(Transform::diagonal(&inv)?)?;
    let c = containment_lambda(&dk, l)?;
    // Rescale D by σ so that L ⊆ DK ⊆ λL.
    let d: Vec<f64> = d.iter().map(|v| v * c.scale).collect();
    let tl = l.clone().with_transform(Transform::diagonal(&d)?)?;
    let l_stats = NormStatistics::of(&batch.points().map_rows(|x| tl.norm(x)))?;
    let denominator = l_stats.pick(variant);
    Ok(Candidate {
        transform: ChosenTransform::Diagonal { entries: d },
        lambda: ContainmentConstant {
            lambda: c.lambda,
            scale: 1.0,
            exact: c.exact,
        },
        value: c.lambda * numerator / denominator,
        denominator,
        l_stats,
    })
}

/// Median-based β over positive scalars.
pub fn beta(batch: &SampleBatch, k: &NormSpec, l: &NormSpec) -> Result<BetaEstimate> {
    beta_with(batch, k, l, BetaVariant::Beta, TransformFamily::Scalars)
}

/// Mean-based β̃ over positive scalars.
pub fn beta_tilde(batch: &SampleBatch, k: &NormSpec, l: &NormSpec) -> Result<BetaEstimate> {
    beta_with(batch, k, l, BetaVariant::BetaTilde, TransformFamily::Scalars)
}

/// Lower bound on the target dimension `N` of a d-embedding into ℓ∞^N.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EmbeddingBound {
    /// `(1 − μ(dεK)) / (2α)`; infinite when `α = 0`.
    #[serde(serialize_with = "serialize_extended")]
    pub value: f64,
    pub infinite: bool,
}

/// Writes infinities as the string `"inf"` since JSON has no literal for them.
pub fn serialize_extended<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*v)
    }
}

fn check_mass(name: &'static str, mass: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&mass) {
        return Err(invalid(name, format!("must lie in [0, 1], got {mass}")));
    }
    Ok(())
}

#[allow(non_snake_case)]
pub fn embedding_lower_bound_N(alpha_at_eps: f64, small_ball_mass: f64) -> Result<EmbeddingBound> {
    check_mass("small_ball_mass", small_ball_mass)?;
    if !(0.0..=1.0).contains(&alpha_at_eps) {
        return Err(invalid("alpha", format!("must lie in [0, 1], got {alpha_at_eps}")));
    }
    let num = 1.0 - small_ball_mass;
    if alpha_at_eps == 0.0 {
        // With no mass outside the small ball there is nothing to bound.
        let infinite = num > 0.0;
        return Ok(EmbeddingBound {
            value: if infinite { f64::INFINITY } else { 0.0 },
            infinite,
        });
    }
    Ok(EmbeddingBound {
        value: num / (2.0 * alpha_at_eps),
        infinite: false,
    })
}

/// `(1 − ν(εB∞)) / (2n)`.
pub fn cube_concentration_floor(small_ball_mass: f64, n: usize) -> Result<f64> {
    check_mass("small_ball_mass", small_ball_mass)?;
    if n == 0 {
        return Err(invalid("n", "must be positive"));
    }
    Ok((1.0 - small_ball_mass) / (2.0 * n as f64))
}

/// `√(ln 16C)/28 · √(cn)/ln(64Cn)`.
pub fn cube_beta_lower_bound(big_c: f64, c: f64, n: usize) -> Result<f64> {
    if !(big_c >= 1.0 / 16.0) || !big_c.is_finite() {
        return Err(invalid("C", format!("must be at least 1/16, got {big_c}")));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid("c", format!("must be positive, got {c}")));
    }
    let nf = n as f64;
    let denom = (64.0 * big_c * nf).ln();
    if n == 0 || denom <= 0.0 {
        return Err(invalid("n", "need 64·C·n > 1"));
    }
    Ok((16.0 * big_c).ln().sqrt() / 28.0 * (c * nf).sqrt() / denom)
}

/// Median threshold `½√(ln 16C / ln 64Cn)` that `m_K` must exceed for
/// [`cube_beta_lower_bound`] to apply.
pub fn cube_beta_median_threshold(big_c: f64, n: usize) -> f64 {
    0.5 * ((16.0 * big_c).ln() / (64.0 * big_c * n as f64).ln()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{sample, MeasureSpec};

    #[test]
    fn identical_norms_give_one() {
        let n = 6;
        let b = sample(&MeasureSpec::uniform_ball(NormSpec::l2(n)).unwrap(), 5_000, 1).unwrap();
        for variant in [BetaVariant::Beta, BetaVariant::BetaTilde] {
            let e = beta_with(&b, &NormSpec::l2(n), &NormSpec::l2(n), variant, TransformFamily::Scalars).unwrap();
            assert!((e.value - 1.0).abs() < 1e-12);
            assert_eq!(e.transform, ChosenTransform::Scalar { s: 1.0 });
        }
        // A scaled L is absorbed by the scalar.
        let e = beta(&b, &NormSpec::l2(n), &NormSpec::l2(n).scaled(2.0).unwrap()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        assert_eq!(e.transform, ChosenTransform::Scalar { s: 0.5 });
    }

    #[test]
    fn scalar_invariance_is_exact() {
        let n = 16;
        let b = sample(&MeasureSpec::cone_surface(NormSpec::l2(n)).unwrap(), 5_000, 2).unwrap();
        let a = beta_tilde(&b, &NormSpec::l2(n), &NormSpec::l1(n)).unwrap();
        let z = beta_tilde(&b, &NormSpec::l2(n), &NormSpec::l1(n).scaled(3.7).unwrap()).unwrap();
        assert!((a.value - z.value).abs() < 1e-12 * a.value);
        assert!(a.value <= a.lambda.lambda);
    }

    #[test]
    fn sphere_against_l1() {
        // E‖x‖_1 = n·E|x_1| with E|x_1| = Γ(n/2)/(√π·Γ((n+1)/2)), so
        // β̃ = √n / (n·E|x_1|) → √(π/2).
        let n = 64;
        let b = sample(&MeasureSpec::cone_surface(NormSpec::l2(n)).unwrap(), 50_000, 3).unwrap();
        let e = beta_tilde(&b, &NormSpec::l2(n), &NormSpec::l1(n)).unwrap();
        let ln_g = crate::measures::gamma::ln_gamma;
        let e_abs = (ln_g(n as f64 / 2.0) - ln_g((n as f64 + 1.0) / 2.0)).exp() / std::f64::consts::PI.sqrt();
        let oracle = (n as f64).sqrt() / (n as f64 * e_abs);
        assert!((e.value - oracle).abs() < 0.01 * oracle, "{} vs {oracle}", e.value);
        assert!((e.value - (std::f64::consts::PI / 2.0).sqrt()).abs() < 0.05 * 1.2533);
        assert!((e.k_stats.median.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_family_never_worse() {
        let n = 4;
        let b = sample(&MeasureSpec::cone_surface(NormSpec::l2(n)).unwrap(), 3_000, 3).unwrap();
        let (k, l) = (NormSpec::l2(n), NormSpec::l1(n));
        let s = beta_with(&b, &k, &l, BetaVariant::Beta, TransformFamily::Scalars).unwrap();
        let d = beta_with(
            &b,
            &k,
            &l,
            BetaVariant::Beta,
            TransformFamily::Diagonal { candidates: 4, spread: 0.3, seed: 1 },
        )
        .unwrap();
        assert!(d.value <= s.value);
        assert!(d.candidates >= 1);
    }

    #[test]
    fn embedding_bound_arithmetic() {
        assert_eq!(embedding_lower_bound_N(0.01, 0.5).unwrap().value, 25.0);
        assert_eq!(embedding_lower_bound_N(0.3, 1.0).unwrap().value, 0.0);
        let inf = embedding_lower_bound_N(0.0, 0.5).unwrap();
        assert!(inf.infinite && inf.value.is_infinite());
        assert_eq!(serde_json::to_value(inf).unwrap()["value"], "inf");
        assert!(embedding_lower_bound_N(0.1, 1.5).is_err());
    }

    #[test]
    fn cube_floor_values() {
        assert!((cube_concentration_floor(0.25, 2).unwrap() - 0.1875).abs() < 1e-15);
        assert_eq!(cube_concentration_floor(1.0, 5).unwrap(), 0.0);
        assert!(cube_concentration_floor(-0.1, 5).is_err());
        for k in 0..=20 {
            let v = cube_concentration_floor(k as f64 / 20.0, 7).unwrap();
            assert!((0.0..=1.0 / 14.0).contains(&v));
        }
    }

    #[test]
    fn cube_beta_values() {
        let v = cube_beta_lower_bound(1.0, 1.0, 100).unwrap();
        let expected = 16f64.ln().sqrt() / 28.0 * 10.0 / 6400f64.ln();
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.0679).abs() < 5e-5);
        let mut prev = cube_beta_lower_bound(1.0, 1.0, 2).unwrap();
        for n in 3..2000 {
            let cur = cube_beta_lower_bound(1.0, 1.0, n).unwrap();
            if n >= 8 {
                assert!(cur > prev, "n={n}");
            }
            prev = cur;
        }
        assert!(cube_beta_lower_bound(0.01, 1.0, 10).is_err());
        // Lebesgue measure on the ball has m_K = 2^{-1/n}, above the threshold.
        for n in [2usize, 16, 256] {
            assert!(0.5f64.powf(1.0 / n as f64) > cube_beta_median_threshold(1.0, n));
        }
    }
}
