use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    default_directions, default_samples, sphere_profile, CheckReport, EpsGrid, ProfileSpec, Violations,
    LOWER_BOUND_NOTE,
};
use crate::concentration::{binomial_ci, concentration_lower_curve, dot, empirical_median, DirectionFamily};
use crate::error::{invalid, Error, Result};
use crate::measures::{sample, MeasureSpec};
use crate::normspace::{containment_lambda, Exponent, NormSpec};
use crate::parameters::{cube_concentration_floor, embedding_lower_bound_N};
use crate::rng;
use crate::transport::{pi_lipschitz_estimate, pushforward_batch, PushMap};

/// Maps accepted by [`check_prop_dec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case", deny_unknown_fields)]
pub enum SimpleMap {
    Identity,
    Scale { factor: f64 },
    Projection { coords: Vec<usize> },
}

impl From<&SimpleMap> for PushMap {
    fn from(m: &SimpleMap) -> Self {
        match m {
            SimpleMap::Identity => PushMap::Identity,
            SimpleMap::Scale { factor } => PushMap::Scale { factor: *factor },
            SimpleMap::Projection { coords } => PushMap::Projection { coords: coords.clone() },
        }
    }
}

fn default_lip_pairs() -> usize {
    10_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropDecConfig {
    pub measure: MeasureSpec,
    pub source_metric: NormSpec,
    pub map: SimpleMap,
    pub target_metric: NormSpec,
    /// Claimed Lipschitz constant of the map.
    pub lip: f64,
    pub profile: ProfileSpec,
    pub eps: EpsGrid,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_directions")]
    pub directions: DirectionFamily,
    /// Pairs used to confirm the Lipschitz claim before the main check.
    #[serde(default = "default_lip_pairs")]
    pub lip_pairs: usize,
}

/// Push-forward by a Lipschitz map: `α_ν(r) ≤ α_μ(r/lip)`, with the source
/// side taken from an analytic profile.
pub fn check_prop_dec(cfg: &PropDecConfig) -> Result<CheckReport> {
    let mut report = CheckReport::new("prop_dec", cfg);
    let eps = cfg.eps.values()?;
    if !(cfg.lip > 0.0) || !cfg.lip.is_finite() {
        return Err(invalid("lip", format!("must be positive, got {}", cfg.lip)));
    }
    let n = cfg.measure.dim();
    if cfg.source_metric.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: cfg.source_metric.dim(),
        });
    }
    let map = PushMap::from(&cfg.map);
    if cfg.target_metric.dim() != map.output_dim(n) {
        return Err(Error::DimensionMismatch {
            expected: map.output_dim(n),
            got: cfg.target_metric.dim(),
        });
    }
    let profile = cfg.profile.resolve(n)?;
    let batch = sample(&cfg.measure, cfg.samples, cfg.seed)?;
    let image = pushforward_batch(&map, &batch)?;

    // Lipschitz pre-check on independent and nearby pairs.
    let points = batch.points();
    let scale = empirical_median(&points.map_rows(|x| cfg.source_metric.norm(x)))?.value * 1e-3;
    let key = rng::derive_seed(cfg.seed, "prop-dec-pairs");
    let count = batch.count();
    let observed = (0..cfg.lip_pairs)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(key, i as u64);
            let x = points.row(r.random_range(0..count));
            let y: Vec<f64> = if i % 2 == 0 {
                points.row(r.random_range(0..count)).to_vec()
            } else {
                x.iter()
                    .map(|v| v + scale * r.sample::<f64, _>(StandardNormal))
                    .collect()
            };
            let d: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            let dx = cfg.source_metric.norm(&d);
            if dx == 0.0 {
                return 0.0;
            }
            let (fx, fy) = (map.apply(x), map.apply(&y));
            let df: Vec<f64> = fx.iter().zip(&fy).map(|(a, b)| a - b).collect();
            cfg.target_metric.norm(&df) / dx
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);
    if observed > cfg.lip * (1.0 + 1e-9) {
        return Err(Error::LipschitzPrecheck {
            observed,
            claimed: cfg.lip,
        });
    }

    let curve = concentration_lower_curve(image.image(), &cfg.target_metric, &eps, &cfg.directions)?;
    let rhs: Vec<f64> = eps.iter().map(|&r| profile.eval(r / cfg.lip)).collect();
    let mut v = Violations::none();
    for i in 0..eps.len() {
        v.record(curve.alpha_hat[i] - curve.ci[i] - rhs[i]);
    }
    report.quantity("lip", cfg.lip);
    report.quantity("observed_lip", observed);
    report.quantity("profile", profile);
    report.quantity("family_size", curve.family_size);
    report.quantity("samples", batch.count());
    report.precondition_satisfied = vec![true; eps.len()];
    report.column("eps", eps);
    report.column("lhs", curve.alpha_hat);
    report.column("slack", curve.ci);
    report.column("rhs", rhs);
    report.note(LOWER_BOUND_NOTE);
    Ok(report.finish(v))
}

fn default_pairs() -> usize {
    1000
}

fn default_per_direction() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedouxConfig {
    pub measure: MeasureSpec,
    pub metric: NormSpec,
    #[serde(default = "sphere_profile")]
    pub profile: ProfileSpec,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    /// Half-space pairs sharing one random direction.
    #[serde(default = "default_per_direction")]
    pub per_direction: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

/// `μ(A)·μ(B) ≤ 4·α(dist(A,B)/2)` over random parallel half-space pairs.
pub fn check_ledoux_lemma(cfg: &LedouxConfig) -> Result<CheckReport> {
    let mut report = CheckReport::new("ledoux_lemma", cfg);
    let n = cfg.measure.dim();
    if cfg.metric.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: cfg.metric.dim(),
        });
    }
    if cfg.per_direction == 0 || cfg.pairs == 0 {
        return Err(invalid("pairs", "need at least one pair per direction"));
    }
    let profile = cfg.profile.resolve(n)?;
    let batch = sample(&cfg.measure, cfg.samples, cfg.seed)?;
    let points = batch.points();
    let dual = cfg.metric.dual();
    let directions = cfg.pairs.div_ceil(cfg.per_direction);
    let dir_key = rng::derive_seed(cfg.seed, "ledoux-directions");
    let cut_key = rng::derive_seed(cfg.seed, "ledoux-cuts");
    let count = batch.count();
    let nf = count as f64;

    // (dist, lhs, ci, rhs) per pair.
    let rows: Vec<Vec<[f64; 4]>> = (0..directions)
        .into_par_iter()
        .map(|d| {
            let mut r = rng::stream(dir_key, d as u64);
            let theta: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
            let reach = dual.norm(&theta);
            let mut proj = points.map_rows(|x| dot(&theta, x));
            proj.sort_unstable_by(f64::total_cmp);
            let in_group = cfg.per_direction.min(cfg.pairs - d * cfg.per_direction);
            (0..in_group)
                .map(|j| {
                    let mut c = rng::stream(cut_key, (d * cfg.per_direction + j) as u64);
                    let qa: f64 = c.random();
                    // The first pair of every group touches.
                    let qb = if j == 0 { qa } else { qa + (1.0 - qa) * c.random::<f64>() };
                    let at = |q: f64| proj[((q * nf) as usize).min(count - 1)];
                    let (a, b) = (at(qa), at(qb));
                    let pa = proj.partition_point(|&v| v <= a) as f64 / nf;
                    let pb = (count - proj.partition_point(|&v| v < b)) as f64 / nf;
                    let dist = (b - a) / reach;
                    let lhs = pa * pb;
                    let ci = binomial_ci(pa, count) * pb + binomial_ci(pb, count) * pa;
                    [dist, lhs, ci, 4.0 * profile.eval(dist / 2.0)]
                })
                .collect()
        })
        .collect();

    let mut v = Violations::none();
    let mut cols: [Vec<f64>; 4] = Default::default();
    for row in rows.iter().flatten() {
        v.record(row[1] - row[2] - row[3]);
        for (c, x) in cols.iter_mut().zip(row) {
            c.push(*x);
        }
    }
    let [dist, lhs, ci, rhs] = cols;
    report.quantity("profile", profile);
    report.quantity("directions", directions);
    report.quantity("samples", count);
    report.precondition_satisfied = vec![true; dist.len()];
    report.column("dist", dist);
    report.column("lhs", lhs);
    report.column("slack", ci);
    report.column("rhs", rhs);
    Ok(report.finish(v))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorFarlinfConfig {
    pub n: usize,
    pub eps: EpsGrid,
    /// Symmetric measure on the cube; the uniform measure when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_directions")]
    pub directions: DirectionFamily,
}

/// `α(ε) ≥ (1 − ν(εB∞))/(2n)` for measures on the cube in the ℓ∞ distance.
pub fn check_cor_farlinf(cfg: &CorFarlinfConfig) -> Result<CheckReport> {
    let mut report = CheckReport::new("cor_farlinf", cfg);
    let n = cfg.n;
    let eps = cfg.eps.values()?;
    let measure = match &cfg.measure {
        Some(m) => m.clone(),
        None => MeasureSpec::uniform_ball(NormSpec::linf(n))?,
    };
    if measure.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: measure.dim(),
        });
    }
    let linf = NormSpec::linf(n);
    let batch = sample(&measure, cfg.samples, cfg.seed)?;
    let mut radii = batch.points().map_rows(|x| linf.norm(x));
    if let Some(r) = radii.iter().find(|&&r| r > 1.0 + 1e-12) {
        return Err(invalid("measure", format!("sample of sup-norm {r} lies outside the unit cube")));
    }
    radii.sort_unstable_by(f64::total_cmp);
    let curve = concentration_lower_curve(batch.points(), &linf, &eps, &cfg.directions)?;
    let count = batch.count() as f64;
    let mut v = Violations::none();
    let mut mass = Vec::with_capacity(eps.len());
    let mut floor = Vec::with_capacity(eps.len());
    for (i, &e) in eps.iter().enumerate() {
        let m = radii.partition_point(|&r| r <= e) as f64 / count;
        let f = cube_concentration_floor(m, n)?;
        // The estimate must stay above the floor.
        v.record(f - curve.alpha_hat[i] - curve.ci[i]);
        mass.push(m);
        floor.push(f);
    }
    report.quantity("n", n);
    report.quantity("family_size", curve.family_size);
    report.quantity("samples", batch.count());
    report.precondition_satisfied = vec![true; eps.len()];
    report.column("eps", eps);
    report.column("alpha_hat", curve.alpha_hat);
    report.column("slack", curve.ci);
    report.column("small_ball_mass", mass);
    report.column("floor", floor);
    report.note(LOWER_BOUND_NOTE);
    Ok(report.finish(v))
}

/// Linear functionals of a candidate embedding into ℓ∞^N.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Functionals {
    /// `f_i(x) = x_i`.
    Coordinates,
    /// `f_i(x) = ⟨row_i, x⟩`.
    Rows { rows: Vec<Vec<f64>> },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSource {
    /// Analytic upper bound: the computed N-bound is a true lower bound.
    #[default]
    Profile,
    /// Half-space lower bound: the computed N-bound over-estimates.
    Empirical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThmFarlinfConfig {
    pub measure: MeasureSpec,
    /// Norm of the embedded space.
    pub norm: NormSpec,
    pub functionals: Functionals,
    /// Distortion: `‖x‖/d ≤ max|f_i(x)| ≤ ‖x‖`.
    pub d: f64,
    pub eps: EpsGrid,
    #[serde(default)]
    pub alpha_source: AlphaSource,
    #[serde(default = "sphere_profile")]
    pub profile: ProfileSpec,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_directions")]
    pub directions: DirectionFamily,
}

/// `N ≥ (1 − μ(dεK))/(2α(ε))` for a d-embedding into ℓ∞^N and `0 < ε < 1/d`.
pub fn check_thm_farlinf(cfg: &ThmFarlinfConfig) -> Result<CheckReport> {
    let mut report = CheckReport::new("thm_farlinf", cfg);
    let n = cfg.measure.dim();
    let eps = cfg.eps.values()?;
    if cfg.norm.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: cfg.norm.dim(),
        });
    }
    if !(cfg.d >= 1.0) || !cfg.d.is_finite() {
        return Err(invalid("d", format!("distortion must be at least 1, got {}", cfg.d)));
    }
    let big_n = match &cfg.functionals {
        Functionals::Coordinates => n,
        Functionals::Rows { rows } => {
            if rows.is_empty() {
                return Err(Error::Empty("functionals"));
            }
            if let Some(r) = rows.iter().find(|r| r.len() != n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: r.len(),
                });
            }
            rows.len()
        }
    };
    let sup = |x: &[f64]| -> f64 {
        match &cfg.functionals {
            Functionals::Coordinates => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            Functionals::Rows { rows } => rows.iter().fold(0.0, |m, r| m.max(dot(r, x).abs())),
        }
    };
    let batch = sample(&cfg.measure, cfg.samples, cfg.seed)?;
    let points = batch.points();

    // Embedding pre-check on every sample.
    let worst = points
        .par_rows()
        .map(|x| {
            let nx = cfg.norm.norm(x);
            let f = sup(x);
            let tol = 1e-12 * nx;
            let low = nx / cfg.d - f - tol;
            let high = f - nx - tol;
            low.max(high)
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    if worst > 0.0 {
        return Err(Error::EmbeddingPrecheck(format!(
            "functionals violate ‖x‖/d ≤ max|f_i(x)| ≤ ‖x‖ by {worst:e} with d = {}",
            cfg.d
        )));
    }

    let profile = cfg.profile.resolve(n)?;
    let alpha: Vec<f64> = match cfg.alpha_source {
        AlphaSource::Profile => eps.iter().map(|&e| profile.eval(e)).collect(),
        AlphaSource::Empirical => {
            report.note(LOWER_BOUND_NOTE);
            report.note("empirical alpha over-estimates the N bound, so a failure is not a counterexample");
            concentration_lower_curve(points, &cfg.norm, &eps, &cfg.directions)?.alpha_hat
        }
    };
    let mut radii = points.map_rows(|x| cfg.norm.norm(x));
    radii.sort_unstable_by(f64::total_cmp);
    let count = batch.count() as f64;
    let mut v = Violations::none();
    let mut pre = Vec::with_capacity(eps.len());
    let mut mass = Vec::with_capacity(eps.len());
    let mut bound = Vec::with_capacity(eps.len());
    for (i, &e) in eps.iter().enumerate() {
        let m = radii.partition_point(|&r| r <= cfg.d * e) as f64 / count;
        let b = embedding_lower_bound_N(alpha[i], m)?.value;
        let ok = e * cfg.d < 1.0;
        if ok {
            v.record(b - big_n as f64);
        }
        pre.push(ok);
        mass.push(m);
        bound.push(b);
    }
    if v.checked == 0 {
        report.note("no grid point satisfies 0 < eps < 1/d");
    }
    report.quantity("N", big_n);
    report.quantity("d", cfg.d);
    report.quantity("profile", profile);
    report.quantity("samples", batch.count());
    report.precondition_satisfied = pre;
    report.column("eps", eps);
    report.column("alpha", alpha);
    report.column("small_ball_mass", mass);
    report.column("bound", bound);
    Ok(report.finish(v))
}

fn default_tolerance() -> f64 {
    0.01
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MedianLawConfig {
    pub n: usize,
    pub p: Exponent,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

/// The median of `‖·‖_K` under the uniform measure on `K` is `2^{−1/n}`.
pub fn check_median_law(cfg: &MedianLawConfig) -> Result<CheckReport> {
    let mut report = CheckReport::new("median_law", cfg);
    let norm = NormSpec::lp(cfg.n, cfg.p)?;
    let batch = sample(&MeasureSpec::uniform_ball(norm.clone())?, cfg.samples, cfg.seed)?;
    let m = empirical_median(&batch.points().map_rows(|x| norm.norm(x)))?;
    let target = 0.5f64.powf(1.0 / cfg.n as f64);
    let mut v = Violations::none();
    v.record((m.value - target).abs() - cfg.tolerance);
    report.quantity("median", m);
    report.quantity("target", target);
    report.precondition_satisfied = vec![true];
    Ok(report.finish(v))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MedianSandwichConfig {
    pub measure: MeasureSpec,
    pub k: NormSpec,
    pub l: NormSpec,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

/// `m_K ≤ m_L ≤ λ·m_K` within confidence intervals, after rescaling `L` so
/// that `‖·‖_K ≤ ‖·‖_L ≤ λ‖·‖_K`.
pub fn check_median_sandwich(cfg: &MedianSandwichConfig) -> Result<CheckReport> {
    let mut report = CheckReport::new("median_sandwich", cfg);
    let c = containment_lambda(&cfg.k, &cfg.l)?;
    let l = c.normalize(&cfg.l)?;
    let batch = sample(&cfg.measure, cfg.samples, cfg.seed)?;
    let points = batch.points();
    let mk = empirical_median(&points.map_rows(|x| cfg.k.norm(x)))?;
    let ml = empirical_median(&points.map_rows(|x| l.norm(x)))?;
    let mut v = Violations::none();
    v.record(mk.ci_low - ml.ci_high);
    v.record(ml.ci_low - c.lambda * mk.ci_high);
    if !c.exact {
        report.note("lambda is a random-search estimate and may understate the true constant");
    }
    report.quantity("m_K", mk);
    report.quantity("m_L", ml);
    report.quantity("lambda", c.lambda);
    report.quantity("containment", &c);
    report.precondition_satisfied = vec![true, true];
    Ok(report.finish(v))
}

fn default_pi_pairs() -> usize {
    100_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiLipschitzConfig {
    pub measure: MeasureSpec,
    pub k: NormSpec,
    pub l: NormSpec,
    #[serde(default = "default_pi_pairs")]
    pub pairs: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
}

/// `‖πx − πy‖_L ≤ (2λ+1)‖x − y‖_K` over random and nearby pairs.
pub fn check_pi_lipschitz(cfg: &PiLipschitzConfig) -> Result<CheckReport> {
    let mut report = CheckReport::new("pi_lipschitz", cfg);
    let batch = sample(&cfg.measure, cfg.samples, cfg.seed)?;
    let est = pi_lipschitz_estimate(&cfg.k, &cfg.l, batch.points(), cfg.pairs, cfg.seed)?;
    let checked = est.pairs - est.skipped;
    let v = Violations {
        count: est.violations,
        checked,
        worst_margin: (checked > 0).then(|| est.k_to_l - est.bound - 1e-9),
    };
    if !est.containment.exact {
        report.note("lambda is a random-search estimate and may understate the true constant");
    }
    report.quantity("estimate", &est);
    report.quantity("lambda", est.containment.upper());
    report.quantity("bound", est.bound);
    report.note("only the K-to-L pairing is asserted; the other three are reported");
    Ok(report.finish(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concentration::ProfileName;
    use crate::verify::Verdict;

    #[test]
    fn prop_dec_identity_and_contraction() {
        let n = 16;
        let base = PropDecConfig {
            measure: MeasureSpec::haar_sphere(n).unwrap(),
            source_metric: NormSpec::l2(n),
            map: SimpleMap::Identity,
            target_metric: NormSpec::l2(n),
            lip: 1.0,
            profile: ProfileSpec::named(ProfileName::Sphere),
            eps: EpsGrid::linear(0.05, 1.0, 20),
            samples: 20_000,
            seed: 3,
            directions: DirectionFamily::default(),
            lip_pairs: 2_000,
        };
        assert_eq!(check_prop_dec(&base).unwrap().verdict, Verdict::Pass);
        let half = PropDecConfig {
            map: SimpleMap::Scale { factor: 0.5 },
            lip: 0.5,
            ..base.clone()
        };
        assert_eq!(check_prop_dec(&half).unwrap().verdict, Verdict::Pass);
        let wrong = PropDecConfig {
            map: SimpleMap::Scale { factor: 2.0 },
            ..base.clone()
        };
        assert!(matches!(check_prop_dec(&wrong), Err(Error::LipschitzPrecheck { .. })));
        let proj = PropDecConfig {
            measure: MeasureSpec::gaussian(n).unwrap(),
            map: SimpleMap::Projection { coords: vec![0] },
            target_metric: NormSpec::l2(1),
            profile: ProfileSpec::named(ProfileName::Gaussian),
            ..base
        };
        assert_eq!(check_prop_dec(&proj).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn ledoux_small_run() {
        let n = 16;
        let cfg = LedouxConfig {
            measure: MeasureSpec::haar_sphere(n).unwrap(),
            metric: NormSpec::l2(n),
            profile: sphere_profile(),
            pairs: 100,
            per_direction: 10,
            samples: 10_000,
            seed: 1,
        };
        let r = check_ledoux_lemma(&cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.violations.checked, 100);
        // Touching pairs have distance zero.
        assert_eq!(r.grid["dist"][0], 0.0);
    }

    #[test]
    fn cube_floor_check() {
        let cfg = CorFarlinfConfig {
            n: 2,
            eps: EpsGrid::linear(0.1, 0.9, 9),
            measure: None,
            samples: 20_000,
            seed: 1,
            directions: DirectionFamily::default(),
        };
        let r = check_cor_farlinf(&cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let floor = &r.grid["floor"];
        assert!((floor[4] - (1.0 - r.grid["small_ball_mass"][4]) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn farlinf_checks() {
        let n = 16;
        let cfg = ThmFarlinfConfig {
            measure: MeasureSpec::haar_sphere(n).unwrap(),
            norm: NormSpec::l2(n),
            functionals: Functionals::Coordinates,
            d: (n as f64).sqrt(),
            eps: EpsGrid::List(vec![0.5 / (n as f64).sqrt(), 0.5]),
            alpha_source: AlphaSource::Profile,
            profile: sphere_profile(),
            samples: 5_000,
            seed: 2,
            directions: DirectionFamily::default(),
        };
        let r = check_thm_farlinf(&cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!(r.precondition_satisfied, vec![true, false]);
        let bad = ThmFarlinfConfig { d: 1.0, ..cfg };
        assert!(matches!(check_thm_farlinf(&bad), Err(Error::EmbeddingPrecheck(_))));
    }

    #[test]
    fn sandwich_and_median_law() {
        let r = check_median_sandwich(&MedianSandwichConfig {
            measure: MeasureSpec::uniform_ball(NormSpec::l2(8)).unwrap(),
            k: NormSpec::l2(8),
            l: NormSpec::l1(8),
            samples: 10_000,
            seed: 1,
        })
        .unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let r = check_median_law(&MedianLawConfig {
            n: 8,
            p: Exponent::ONE,
            samples: 100_000,
            seed: 1,
            tolerance: 0.01,
        })
        .unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
    }
}
