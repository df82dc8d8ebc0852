//! Theorem-check harness.
//!
//! Each check rebuilds a hypothesis numerically, evaluates both sides of an
//! inequality on a grid and reports violations. Left-hand sides are always
//! sound empirical lower bounds; right-hand sides come from analytic
//! profiles, so each comparison is one-sided.

mod lemmas;
mod theorems;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::concentration::{analytic_profile, AnalyticProfile, DirectionFamily, ProfileName, ProfileOverrides};
use crate::error::{invalid, Result};

pub use lemmas::{
    check_cor_farlinf, check_ledoux_lemma, check_median_law, check_median_sandwich, check_pi_lipschitz,
    check_prop_dec, check_thm_farlinf, AlphaSource, CorFarlinfConfig, Functionals, LedouxConfig,
    MedianLawConfig, MedianSandwichConfig, PiLipschitzConfig, PropDecConfig, SimpleMap, ThmFarlinfConfig,
};
pub use theorems::{
    check_inclusion_lemma, check_thm_main, check_thm_main1, InclusionConfig, RateFit, ThmMain1Config, ThmMainConfig,
};

/// Default sample size of every check.
pub const DEFAULT_SAMPLES: usize = 100_000;

pub(crate) fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "not-applicable",
        })
    }
}

/// Violation accounting over the grid points where the hypothesis holds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violations {
    pub count: usize,
    /// Grid points (or probes) actually checked.
    pub checked: usize,
    /// Largest `lhs − slack − rhs` over checked points; positive values are
    /// violations. Absent when nothing was checked.
    pub worst_margin: Option<f64>,
}

impl Violations {
    pub fn none() -> Self {
        Violations {
            count: 0,
            checked: 0,
            worst_margin: None,
        }
    }

    /// Records one checked point with margin `lhs − slack − rhs`.
    pub fn record(&mut self, margin: f64) {
        self.checked += 1;
        if margin > 0.0 || margin.is_nan() {
            self.count += 1;
        }
        self.worst_margin = Some(match self.worst_margin {
            Some(w) if !(margin > w) => w,
            _ => margin,
        });
    }

    pub fn verdict(&self) -> Verdict {
        if self.checked == 0 {
            Verdict::NotApplicable
        } else if self.count == 0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Machine-readable outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    /// The full resolved configuration; re-running it reproduces the report.
    pub inputs: serde_json::Value,
    pub quantities: BTreeMap<String, serde_json::Value>,
    /// Grid columns of equal length, such as `eps`, `lhs`, `rhs`, `slack`.
    pub grid: BTreeMap<String, Vec<f64>>,
    /// Per grid point: whether the hypothesis holds and the point is checked.
    pub precondition_satisfied: Vec<bool>,
    pub violations: Violations,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub(crate) fn new(check_id: &str, inputs: &impl Serialize) -> Self {
        CheckReport {
            check_id: check_id.to_string(),
            inputs: serde_json::to_value(inputs).expect("config serializes"),
            quantities: BTreeMap::new(),
            grid: BTreeMap::new(),
            precondition_satisfied: Vec::new(),
            violations: Violations::none(),
            verdict: Verdict::NotApplicable,
            notes: Vec::new(),
        }
    }

    pub(crate) fn quantity(&mut self, name: &str, value: impl Serialize) {
        self.quantities
            .insert(name.to_string(), serde_json::to_value(value).expect("quantity serializes"));
    }

    pub(crate) fn column(&mut self, name: &str, values: Vec<f64>) {
        self.grid.insert(name.to_string(), values);
    }

    pub(crate) fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub(crate) fn finish(mut self, violations: Violations) -> Self {
        self.violations = violations;
        self.verdict = violations.verdict();
        self
    }

    /// Numeric quantity by name, if present.
    pub fn number(&self, name: &str) -> Option<f64> {
        self.quantities.get(name).and_then(|v| v.as_f64())
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

pub(crate) const LOWER_BOUND_NOTE: &str =
    "alpha_hat is a statistical lower bound on the concentration function (half-spaces cut at empirical medians)";

/// ε grid: an explicit list, or `count` points between `from` and `to`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsGrid {
    List(Vec<f64>),
    Range(EpsRange),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsRange {
    pub from: f64,
    pub to: f64,
    pub count: usize,
    /// Geometric instead of arithmetic spacing.
    #[serde(default)]
    pub log: bool,
}

impl EpsGrid {
    pub fn linear(from: f64, to: f64, count: usize) -> Self {
        EpsGrid::Range(EpsRange { from, to, count, log: false })
    }

    pub fn geometric(from: f64, to: f64, count: usize) -> Self {
        EpsGrid::Range(EpsRange { from, to, count, log: true })
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        let v = match self {
            EpsGrid::List(v) => v.clone(),
            EpsGrid::Range(r) => {
                if r.count == 0 || !(r.from > 0.0) || !(r.to >= r.from) || !r.to.is_finite() {
                    return Err(invalid("eps", "range needs 0 < from ≤ to and count ≥ 1"));
                }
                if r.count == 1 {
                    vec![r.from]
                } else {
                    let k = (r.count - 1) as f64;
                    (0..r.count)
                        .map(|i| {
                            let t = i as f64 / k;
                            if r.log {
                                r.from * (r.to / r.from).powf(t)
                            } else {
                                r.from + (r.to - r.from) * t
                            }
                        })
                        .collect()
                }
            }
        };
        if v.is_empty() {
            return Err(invalid("eps", "grid is empty"));
        }
        if v.iter().any(|e| !(*e > 0.0) || !e.is_finite()) || v.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("eps", "grid must be positive, finite and strictly increasing"));
        }
        Ok(v)
    }
}

/// Profile selection with optional constant overrides.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub name: ProfileName,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub prefactor: Option<f64>,
    #[serde(rename = "c", default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent_scale: Option<f64>,
}

impl ProfileSpec {
    pub fn named(name: ProfileName) -> Self {
        ProfileSpec {
            name,
            prefactor: None,
            rate: None,
            exponent_scale: None,
        }
    }

    pub fn resolve(&self, n: usize) -> Result<AnalyticProfile> {
        analytic_profile(
            self.name,
            n,
            ProfileOverrides {
                prefactor: self.prefactor,
                rate: self.rate,
                exponent_scale: self.exponent_scale,
            },
        )
    }
}

pub(crate) fn sphere_profile() -> ProfileSpec {
    ProfileSpec::named(ProfileName::Sphere)
}

/// One configured check. The `check` field selects the variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum CheckConfig {
    PropDec(PropDecConfig),
    ThmMain(ThmMainConfig),
    InclusionLemma(InclusionConfig),
    LedouxLemma(LedouxConfig),
    CorFarlinf(CorFarlinfConfig),
    ThmFarlinf(ThmFarlinfConfig),
    ThmMain1(ThmMain1Config),
    MedianLaw(MedianLawConfig),
    MedianSandwich(MedianSandwichConfig),
    PiLipschitz(PiLipschitzConfig),
}

/// Identifiers accepted by [`CheckConfig`], in declaration order.
pub const CHECK_IDS: &[&str] = &[
    "prop_dec",
    "thm_main",
    "inclusion_lemma",
    "ledoux_lemma",
    "cor_farlinf",
    "thm_farlinf",
    "thm_main1",
    "median_law",
    "median_sandwich",
    "pi_lipschitz",
];

impl CheckConfig {
    pub fn id(&self) -> &'static str {
        match self {
            CheckConfig::PropDec(_) => "prop_dec",
            CheckConfig::ThmMain(_) => "thm_main",
            CheckConfig::InclusionLemma(_) => "inclusion_lemma",
            CheckConfig::LedouxLemma(_) => "ledoux_lemma",
            CheckConfig::CorFarlinf(_) => "cor_farlinf",
            CheckConfig::ThmFarlinf(_) => "thm_farlinf",
            CheckConfig::ThmMain1(_) => "thm_main1",
            CheckConfig::MedianLaw(_) => "median_law",
            CheckConfig::MedianSandwich(_) => "median_sandwich",
            CheckConfig::PiLipschitz(_) => "pi_lipschitz",
        }
    }

    /// Replaces the seed of the check.
    pub fn set_seed(&mut self, seed: u64) {
        match self {
            CheckConfig::PropDec(c) => c.seed = seed,
            CheckConfig::ThmMain(c) => c.seed = seed,
            CheckConfig::InclusionLemma(c) => c.seed = seed,
            CheckConfig::LedouxLemma(c) => c.seed = seed,
            CheckConfig::CorFarlinf(c) => c.seed = seed,
            CheckConfig::ThmFarlinf(c) => c.seed = seed,
            CheckConfig::ThmMain1(c) => c.seed = seed,
            CheckConfig::MedianLaw(c) => c.seed = seed,
            CheckConfig::MedianSandwich(c) => c.seed = seed,
            CheckConfig::PiLipschitz(c) => c.seed = seed,
        }
    }

    /// Runs the check; the report's `inputs` carry the `check` tag so they
    /// parse back into this config.
    pub fn run(&self) -> Result<CheckReport> {
        let mut report = match self {
            CheckConfig::PropDec(c) => check_prop_dec(c),
            CheckConfig::ThmMain(c) => check_thm_main(c),
            CheckConfig::InclusionLemma(c) => check_inclusion_lemma(c),
            CheckConfig::LedouxLemma(c) => check_ledoux_lemma(c),
            CheckConfig::CorFarlinf(c) => check_cor_farlinf(c),
            CheckConfig::ThmFarlinf(c) => check_thm_farlinf(c),
            CheckConfig::ThmMain1(c) => check_thm_main1(c),
            CheckConfig::MedianLaw(c) => check_median_law(c),
            CheckConfig::MedianSandwich(c) => check_median_sandwich(c),
            CheckConfig::PiLipschitz(c) => check_pi_lipschitz(c),
        }?;
        report.inputs = serde_json::to_value(self).expect("config serializes");
        Ok(report)
    }
}

pub(crate) fn default_directions() -> DirectionFamily {
    DirectionFamily::default()
}

/// Central finite-difference derivative.
pub(crate) fn derivative(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-6 * x.abs().max(1e-12);
    (f(x + h) - f(x - h)) / (2.0 * h)
}
