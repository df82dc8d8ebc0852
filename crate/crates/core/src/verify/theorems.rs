use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    default_directions, default_samples, derivative, sphere_profile, CheckReport, EpsGrid, ProfileSpec,
    Violations, LOWER_BOUND_NOTE,
};
use crate::concentration::{
    concentration_lower_curve, dot, empirical_median, fit_subgaussian_rate, AnalyticProfile, ConcentrationCurve,
    DirectionFamily, DirectionKind, MedianEstimate, ProfileName,
};
use crate::error::{invalid, Error, Result};
use crate::measures::{radial_cdf, sample, MeasureSpec};
use crate::normspace::{containment_lambda, ContainmentConstant, NormSpec};
use crate::rng;
use crate::transport::{lipschitz_constant, pi_map, pushforward_batch, radial_transport, PushMap};

/// Smallest `ε` with `holds(ε)` for a predicate that is monotone in `ε`.
fn threshold(holds: impl Fn(f64) -> bool) -> Option<f64> {
    let mut hi = 1.0;
    while !holds(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Containment with `L` rescaled so that `‖·‖_K ≤ ‖·‖_L ≤ λ‖·‖_K`.
fn normalized_pair(k: &NormSpec, l: &NormSpec) -> Result<(ContainmentConstant, NormSpec)> {
    let c = containment_lambda(k, l)?;
    let l = c.normalize(l)?;
    Ok((c, l))
}

fn positive_median(name: &str, m: &MedianEstimate) -> Result<()> {
    if m.value > 0.0 {
        Ok(())
    } else {
        Err(invalid("measure", format!("median of {name} must be positive, got {}", m.value)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThmMainConfig {
    pub measure: MeasureSpec,
    pub k: NormSpec,
    pub l: NormSpec,
    pub eps: EpsGrid,
    #[serde(default = "sphere_profile")]
    pub profile: ProfileSpec,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_directions")]
    pub directions: DirectionFamily,
}

/// Concentration of the π push-forward:
/// `α_ν(ε) ≤ 16·α_μ(ε m_L/(14 λ m_K))` wherever `16·α_μ(ε m_L/(7 λ m_K)) ≤ 1`.
pub fn check_thm_main(cfg: &ThmMainConfig) -> Result<CheckReport> {
    let mut report = CheckReport::new("thm_main", cfg);
    let n = cfg.measure.dim();
    let eps = cfg.eps.values()?;
    let (c, l) = normalized_pair(&cfg.k, &cfg.l)?;
    if l.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: l.dim() });
    }
    let lambda = c.lambda;
    let profile = cfg.profile.resolve(n)?;
    let batch = sample(&cfg.measure, cfg.samples, cfg.seed)?;
    let points = batch.points();
    let mk = empirical_median(&points.map_rows(|x| cfg.k.norm(x)))?;
    let ml = empirical_median(&points.map_rows(|x| l.norm(x)))?;
    positive_median("‖·‖_K", &mk)?;
    let sandwich = mk.value <= ml.value && ml.value <= lambda * mk.value * (1.0 + 1e-12);

    let image = pushforward_batch(&PushMap::Pi { k: cfg.k.clone(), l: l.clone() }, &batch)?;
    let curve = concentration_lower_curve(image.image(), &l, &eps, &cfg.directions)?;

    let arg = |e: f64, m_k: f64, m_l: f64, div: f64| e * m_l / (div * lambda * m_k);
    let rhs_at = |e: f64, m_k: f64, m_l: f64| 16.0 * profile.eval(arg(e, m_k, m_l, 14.0));
    let pre_at = |e: f64| 16.0 * profile.eval(arg(e, mk.value, ml.value, 7.0)) <= 1.0;

    let mut v = Violations::none();
    let mut pre = Vec::with_capacity(eps.len());
    let mut rhs = Vec::with_capacity(eps.len());
    let mut slack = Vec::with_capacity(eps.len());
    for (i, &e) in eps.iter().enumerate() {
        let r = rhs_at(e, mk.value, ml.value);
        let d_ml = derivative(|m| rhs_at(e, mk.value, m), ml.value).abs() * ml.half_width();
        let d_mk = derivative(|m| rhs_at(e, m, ml.value), mk.value).abs() * mk.half_width();
        let s = curve.ci[i] + d_ml + d_mk;
        let ok = pre_at(e);
        if ok {
            v.record(curve.alpha_hat[i] - s - r);
        }
        pre.push(ok);
        rhs.push(r);
        slack.push(s);
    }
    let eps_star = threshold(pre_at);
    if v.checked == 0 {
        report.note(format!(
            "precondition 16·alpha(eps·m_L/(7·lambda·m_K)) ≤ 1 holds only for eps ≥ {}",
            eps_star.map_or("inf".to_string(), |t| t.to_string())
        ));
    }
    if !sandwich {
        report.note("median sandwich m_K ≤ m_L ≤ lambda·m_K failed");
    }
    if !c.exact {
        report.note("lambda is a random-search estimate and may understate the true constant");
    }
    report.quantity("m_K", mk);
    report.quantity("m_L", ml);
    report.quantity("lambda", lambda);
    report.quantity("containment", &c);
    report.quantity("median_sandwich", sandwich);
    report.quantity("profile", profile);
    report.quantity("precondition_threshold", eps_star);
    report.quantity("family_size", curve.family_size);
    report.quantity("samples", batch.count());
    report.precondition_satisfied = pre;
    report.column("eps", eps);
    report.column("lhs", curve.alpha_hat);
    report.column("slack", slack);
    report.column("rhs", rhs);
    report.note(LOWER_BOUND_NOTE);
    Ok(report.finish(v))
}

fn default_probes() -> usize {
    100_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionConfig {
    pub measure: MeasureSpec,
    pub k: NormSpec,
    pub l: NormSpec,
    pub eps: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Pointwise inclusion `J^K_{δ m_L/λ} ⊂ π⁻¹(A^L_ε)` with `δ = ε/(7 m_K)`:
/// every probe `x` within `δ m_L/λ` of some `y ∈ J` must satisfy
/// `‖πx − πy‖_L ≤ 7δ m_K` and `πx ∈ A_ε`.
pub fn check_inclusion_lemma(cfg: &InclusionConfig) -> Result<CheckReport> {
    let mut report = CheckReport::new("inclusion_lemma", cfg);
    if !(cfg.eps > 0.0) || !cfg.eps.is_finite() {
        return Err(invalid("eps", format!("must be positive, got {}", cfg.eps)));
    }
    let n = cfg.measure.dim();
    let (c, l) = normalized_pair(&cfg.k, &cfg.l)?;
    let k = &cfg.k;
    let lambda = c.lambda;
    let batch = sample(&cfg.measure, cfg.samples, cfg.seed)?;
    let points = batch.points();
    let nk = points.map_rows(|x| k.norm(x));
    let nl = points.map_rows(|x| l.norm(x));
    let mk = empirical_median(&nk)?;
    let ml = empirical_median(&nl)?;
    positive_median("‖·‖_K", &mk)?;
    let (m_k, m_l) = (mk.value, ml.value);
    let delta = cfg.eps / (7.0 * m_k);

    // A: half-space of ν-mass ≥ 1/2 cut at the median of a random functional.
    let mut r = rng::stream(rng::derive_seed(cfg.seed, "inclusion-direction"), 0);
    let theta: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
    let image = pushforward_batch(&PushMap::Pi { k: k.clone(), l: l.clone() }, &batch)?;
    let proj = image.image().map_rows(|y| dot(&theta, y));
    let t = empirical_median(&proj)?.value;
    let t_eps = t + cfg.eps * l.dual().norm(&theta);
    let a_mass = proj.iter().filter(|&&v| v <= t).count() as f64 / batch.count() as f64;

    let j: Vec<usize> = (0..batch.count())
        .filter(|&i| {
            proj[i] <= t
                && ((1.0 - delta) * m_l) < nl[i]
                && nl[i] < (1.0 + delta) * m_l
                && ((1.0 - delta) * m_k) < nk[i]
                && nk[i] < (1.0 + delta) * m_k
        })
        .collect();
    report.quantity("m_K", mk);
    report.quantity("m_L", ml);
    report.quantity("lambda", lambda);
    report.quantity("containment", &c);
    report.quantity("delta", delta);
    report.quantity("J_size", j.len());
    report.quantity("A_mass", a_mass);
    let radius = delta * m_l / lambda;
    let bound = 7.0 * delta * m_k;
    report.quantity("probe_radius", radius);
    report.quantity("distance_bound", bound);
    if !c.exact {
        report.note("lambda is a random-search estimate; the chain needs the true constant");
    }
    if j.is_empty() {
        report.note("J is empty on the sample");
        return Ok(report.finish(Violations::none()));
    }

    let key = rng::derive_seed(cfg.seed, "inclusion-probes");
    let margins: Vec<[f64; 2]> = (0..cfg.probes)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(key, i as u64);
            let y = points.row(j[r.random_range(0..j.len())]);
            let x: Vec<f64> = match i % 3 {
                // Along the ray through y.
                1 => {
                    let s = radius * (2.0 * r.random::<f64>() - 1.0) / k.norm(y);
                    y.iter().map(|v| v * (1.0 + s)).collect()
                }
                kind => {
                    let g: Vec<f64> = (0..n).map(|_| r.sample(StandardNormal)).collect();
                    let rho = if kind == 0 { radius * r.random::<f64>() } else { radius };
                    let f = rho / k.norm(&g);
                    y.iter().zip(&g).map(|(a, b)| a + f * b).collect()
                }
            };
            let (px, py) = (pi_map(k, &l, &x), pi_map(k, &l, y));
            let diff: Vec<f64> = px.iter().zip(&py).map(|(a, b)| a - b).collect();
            let dist = l.norm(&diff);
            let reach = dot(&theta, &px);
            let m1 = dist - bound - 1e-12 * bound.max(dist);
            let m2 = reach - t_eps - 1e-12 * (t_eps.abs() + reach.abs());
            [m1, m2]
        })
        .collect();
    let mut v = Violations::none();
    let mut worst = [f64::NEG_INFINITY; 2];
    for m in &margins {
        v.record(m[0].max(m[1]));
        worst[0] = worst[0].max(m[0]);
        worst[1] = worst[1].max(m[1]);
    }
    report.quantity("worst_distance_margin", worst[0]);
    report.quantity("worst_expansion_margin", worst[1]);
    report.precondition_satisfied = vec![true];
    report.column("eps", vec![cfg.eps]);
    Ok(report.finish(v))
}

/// Grid and constants for fitting `α̂(ε) ≤ K·exp(−c ε² n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateFit {
    pub grid: EpsGrid,
    #[serde(rename = "K", default = "one")]
    pub prefactor: f64,
    /// Only grid points with `α̂ ≥ floor` enter the fit.
    #[serde(default = "fit_floor")]
    pub floor: f64,
}

fn one() -> f64 {
    1.0
}

fn fit_floor() -> f64 {
    0.01
}

impl Default for RateFit {
    fn default() -> Self {
        RateFit {
            grid: EpsGrid::linear(0.01, 1.0, 100),
            prefactor: 1.0,
            floor: 0.01,
        }
    }
}

fn default_rate_fit() -> Option<RateFit> {
    Some(RateFit::default())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThmMain1Config {
    pub p: f64,
    pub n: usize,
    pub eps: EpsGrid,
    /// Profile of the source measure; `gaussian` for `p = 2`, `gamma1` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSpec>,
    /// A second norm `K` with `‖·‖_K ≤ ‖·‖_L ≤ λ‖·‖_K`; reported without a verdict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<NormSpec>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    /// Test directions; random signs for `p = 1`, Gaussian otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<DirectionFamily>,
    #[serde(default = "default_rate_fit")]
    pub rate_fit: Option<RateFit>,
}

impl ThmMain1Config {
    pub fn resolved_profile(&self) -> ProfileSpec {
        self.profile.unwrap_or_else(|| {
            ProfileSpec::named(if self.p == 2.0 {
                ProfileName::Gaussian
            } else {
                ProfileName::Gamma1
            })
        })
    }

    pub fn resolved_directions(&self) -> DirectionFamily {
        self.directions.clone().unwrap_or_else(|| {
            let kind = if self.p == 1.0 {
                DirectionKind::Rademacher
            } else {
                DirectionKind::Gaussian
            };
            DirectionFamily::default().with_kind(kind).with_seed(self.seed)
        })
    }
}

fn restrict(curve: &ConcentrationCurve, idx: &[usize]) -> ConcentrationCurve {
    let pick = |v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<f64>>();
    ConcentrationCurve {
        eps: pick(&curve.eps),
        alpha_hat: pick(&curve.alpha_hat),
        alpha_raw: pick(&curve.alpha_raw),
        ci: pick(&curve.ci),
        direction_id: idx.iter().map(|&i| curve.direction_id[i]).collect(),
        metric: curve.metric.clone(),
        family_size: curve.family_size,
        sample_count: curve.sample_count,
    }
}

/// Radial transport from the generalized Gaussian product to the uniform
/// measure on the ℓp ball:
/// `α_ν(ε) ≤ 16·α_μ(ε/(14‖u‖λ))` wherever
/// `8(α_μ(ε/(7‖u‖λ)) + α_μ(ε m/(7‖u‖² m_L))) ≤ 1`.
pub fn check_thm_main1(cfg: &ThmMain1Config) -> Result<CheckReport> {
    let mut report = CheckReport::new("thm_main1", cfg);
    let n = cfg.n;
    let eps = cfg.eps.values()?;
    let l = NormSpec::l(n, cfg.p);
    let mu = MeasureSpec::generalized_gaussian(n, cfg.p)?;
    let nu = MeasureSpec::uniform_ball(l.clone())?;
    let (lambda, two_norm) = match &cfg.k {
        Some(k) if *k != l => {
            let c = containment_lambda(k, &l)?;
            if c.scale < 1.0 - 1e-12 {
                return Err(Error::ContainmentViolated { scale: c.scale });
            }
            (c.upper(), true)
        }
        _ => (1.0, false),
    };
    let metric_k = cfg.k.clone().unwrap_or_else(|| l.clone());
    let profile_spec = cfg.resolved_profile();
    let profile: AnalyticProfile = profile_spec.resolve(n)?;
    if cfg.p != 1.0 && cfg.p != 2.0 && cfg.profile.is_none() {
        report.note("default gamma1 profile is assumed valid for 1 < p < 2");
    }

    let u = radial_transport(&radial_cdf(&mu, &l)?, &radial_cdf(&nu, &l)?)?;
    let lip = lipschitz_constant(&u);
    let batch = sample(&mu, cfg.samples, cfg.seed)?;
    let radii = batch.points().map_rows(|x| l.norm(x));
    let ml = empirical_median(&radii)?;
    let m = empirical_median(&radii.iter().map(|&r| u.eval(r)).collect::<Vec<f64>>())?;
    positive_median("‖·‖_L", &ml)?;

    let image = pushforward_batch(&PushMap::Radial { u: u.clone(), norm: l.clone() }, &batch)?;
    let mut grid = eps.clone();
    let fit_eps = match &cfg.rate_fit {
        Some(f) => f.grid.values()?,
        None => Vec::new(),
    };
    grid.extend_from_slice(&fit_eps);
    grid.sort_unstable_by(f64::total_cmp);
    grid.dedup();
    let directions = cfg.resolved_directions();
    let curve = concentration_lower_curve(image.image(), &l, &grid, &directions)?;
    let locate = |e: &f64| grid.binary_search_by(|g| g.total_cmp(e)).expect("grid member");
    let main = restrict(&curve, &eps.iter().map(locate).collect::<Vec<_>>());

    // Conservative medians: the smaller m and larger m_L shrink the argument.
    let pre_at = |e: f64| {
        8.0 * (profile.eval(e / (7.0 * lip * lambda)) + profile.eval(e * m.ci_low / (7.0 * lip * lip * ml.ci_high)))
            <= 1.0
    };
    let mut v = Violations::none();
    let mut pre = Vec::with_capacity(eps.len());
    let mut rhs = Vec::with_capacity(eps.len());
    for (i, &e) in eps.iter().enumerate() {
        let r = 16.0 * profile.eval(e / (14.0 * lip * lambda));
        let ok = pre_at(e);
        if ok {
            v.record(main.alpha_hat[i] - main.ci[i] - r);
        }
        pre.push(ok);
        rhs.push(r);
    }
    let eps_star = threshold(pre_at);
    if let Some(f) = &cfg.rate_fit {
        let sub = restrict(&curve, &fit_eps.iter().map(locate).collect::<Vec<_>>());
        report.quantity("fitted_c", fit_subgaussian_rate(&sub, n, f.prefactor, f.floor));
    }
    if v.checked == 0 {
        report.note(format!(
            "precondition holds only for eps ≥ {}",
            eps_star.map_or("inf".to_string(), |t| t.to_string())
        ));
    }
    report.quantity("lipschitz_u", lip);
    report.quantity("n_times_lipschitz_u", n as f64 * lip);
    report.quantity("m_L", ml);
    report.quantity("m", m);
    report.quantity("lambda", lambda);
    report.quantity("k_metric", &metric_k);
    report.quantity("profile", profile);
    report.quantity("precondition_threshold", eps_star);
    report.quantity("knots", u.knots().len());
    report.quantity("family_size", curve.family_size);
    report.quantity("samples", batch.count());
    report.precondition_satisfied = pre;
    report.column("eps", eps);
    report.column("lhs", main.alpha_hat);
    report.column("slack", main.ci);
    report.column("rhs", rhs);
    report.note(LOWER_BOUND_NOTE);
    let mut report = report.finish(v);
    if two_norm {
        report.verdict = super::Verdict::NotApplicable;
        report.note("two-norm variant: violations are reported without an asserted verdict");
    }
    Ok(report)
}
