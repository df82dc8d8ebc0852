//! The norm-ratio map π, the radial transport map U and Lipschitz estimates.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use std::collections::BinaryHeap;
use std::io::Write;
use std::sync::Arc;

use crate::concentration::empirical_median;
use crate::error::{invalid, Error, Result};
use crate::measures::{Points, RadialCdf, SampleBatch};
use crate::normspace::{containment_lambda, ContainmentConstant, NormSpec};
use crate::rng;

/// `π(x) = x·‖x‖_K/‖x‖_L`, with `π(0) = 0`.
pub fn pi_map(k: &NormSpec, l: &NormSpec, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    pi_into(k, l, x, &mut out);
    out
}

fn pi_into(k: &NormSpec, l: &NormSpec, x: &[f64], out: &mut [f64]) {
    let nl = l.norm(x);
    if nl == 0.0 {
        out.fill(0.0);
        return;
    }
    let ratio = k.norm(x) / nl;
    for (o, v) in out.iter_mut().zip(x) {
        *o = v * ratio;
    }
}

/// Relative perturbation size for local pairs, in units of the median of `‖·‖_K`.
pub const PERTURBATION_SCALE: f64 = 1e-3;

/// Empirical Lipschitz ratios of π over random pairs, in the four
/// combinations of source and target distances.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PiLipschitzEstimate {
    /// `sup ‖πx − πy‖_L / ‖x − y‖_K`, the asserted pairing.
    pub k_to_l: f64,
    pub k_to_k: f64,
    pub l_to_l: f64,
    pub l_to_k: f64,
    pub containment: ContainmentConstant,
    /// `2λ + 1` with `λ` the containment ratio `sup ‖x‖_L/‖x‖_K`.
    pub bound: f64,
    /// Pairs whose `k_to_l` ratio exceeds `bound + 1e-9`.
    pub violations: usize,
    pub pairs: usize,
    pub skipped: usize,
}

/// Estimates the Lipschitz constant of π from `pairs` random pairs of rows.
///
/// Even-numbered pairs join two independent rows; odd-numbered pairs join a
/// row to a perturbation of it of size `1e-3·m_K` in `‖·‖_K`.
pub fn pi_lipschitz_estimate(
    k: &NormSpec,
    l: &NormSpec,
    points: Points<'_>,
    pairs: usize,
    seed: u64,
) -> Result<PiLipschitzEstimate> {
    let containment = containment_lambda(k, l)?;
    if containment.scale < 1.0 - 1e-12 {
        return Err(Error::ContainmentViolated {
            scale: containment.scale,
        });
    }
    if points.dim() != k.dim() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            got: points.dim(),
        });
    }
    let m_k = empirical_median(&points.map_rows(|x| k.norm(x)))?.value;
    let bound = 2.0 * containment.upper() + 1.0;
    let count = points.count();
    let dim = points.dim();
    let key = rng::derive_seed(seed, "pi-pairs");
    let h = PERTURBATION_SCALE * m_k;

    let ratios: Vec<Option<[f64; 4]>> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(key, i as u64);
            let x = points.row(r.random_range(0..count));
            let y: Vec<f64> = if i % 2 == 0 {
                points.row(r.random_range(0..count)).to_vec()
            } else {
                let g: Vec<f64> = (0..dim).map(|_| r.sample(StandardNormal)).collect();
                let gn = k.norm(&g);
                let step = h * r.random::<f64>() / gn;
                x.iter().zip(&g).map(|(a, b)| a + step * b).collect()
            };
            let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            let dk = k.norm(&diff);
            let dl = l.norm(&diff);
            if dk == 0.0 || dl == 0.0 {
                return None;
            }
            let px = pi_map(k, l, x);
            let py = pi_map(k, l, &y);
            let img: Vec<f64> = px.iter().zip(&py).map(|(a, b)| a - b).collect();
            let (nl, nk) = (l.norm(&img), k.norm(&img));
            Some([nl / dk, nk / dk, nl / dl, nk / dl])
        })
        .collect();

    let mut best = [0.0f64; 4];
    let mut violations = 0;
    let mut skipped = 0;
    for r in &ratios {
        match r {
            None => skipped += 1,
            Some(v) => {
                if v[0] > bound + 1e-9 {
                    violations += 1;
                }
                for (b, x) in best.iter_mut().zip(v) {
                    *b = b.max(*x);
                }
            }
        }
    }
    Ok(PiLipschitzEstimate {
        k_to_l: best[0],
        k_to_k: best[1],
        l_to_l: best[2],
        l_to_k: best[3],
        containment,
        bound,
        violations,
        pairs,
        skipped,
    })
}

/// Radial laws behind a transport map, kept for exact re-evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportGenerator {
    pub source: RadialCdf,
    pub target: RadialCdf,
}

impl TransportGenerator {
    /// `F_ν⁻¹(F_μ(r))`, through log-CDFs below the median and survival
    /// functions above it so both tails keep relative precision.
    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if self.source.eval(r) <= 0.5 {
            self.target.quantile_ln(self.source.ln_cdf(r))
        } else {
            self.target.quantile_upper(self.source.survival(r))
        }
    }
}

/// Nondecreasing piecewise-linear map with `u(0) = 0`, extended linearly past
/// the last knot.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneMap {
    knots: Vec<f64>,
    values: Vec<f64>,
    generator: Option<Arc<TransportGenerator>>,
}

impl Serialize for MonotoneMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Summary<'a> {
            knots: usize,
            last_knot: f64,
            last_value: f64,
            source: Option<&'a RadialCdf>,
            target: Option<&'a RadialCdf>,
        }
        Summary {
            knots: self.knots.len(),
            last_knot: *self.knots.last().unwrap(),
            last_value: *self.values.last().unwrap(),
            source: self.generator.as_ref().map(|g| &g.source),
            target: self.generator.as_ref().map(|g| &g.target),
        }
        .serialize(s)
    }
}

impl MonotoneMap {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(invalid("knots", "need at least two knots, one value each"));
        }
        if knots[0] != 0.0 || values[0] != 0.0 {
            return Err(invalid("knots", "map must start at u(0) = 0"));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(invalid("knots", "knots and values must be finite"));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("knots", "must be strictly increasing"));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("values", "must be nondecreasing"));
        }
        Ok(MonotoneMap {
            knots,
            values,
            generator: None,
        })
    }

    /// The identity on `[0, end]`.
    pub fn identity(end: f64) -> Self {
        MonotoneMap::new(vec![0.0, end], vec![0.0, end]).expect("identity map")
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn generator(&self) -> Option<&TransportGenerator> {
        self.generator.as_deref()
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let k = &self.knots;
        let i = k.partition_point(|&t| t <= r).clamp(1, k.len() - 1);
        let (r0, r1) = (k[i - 1], k[i]);
        let (u0, u1) = (self.values[i - 1], self.values[i]);
        u0 + (u1 - u0) * (r - r0) / (r1 - r0)
    }

    /// Slopes of the knot intervals.
    pub fn slopes(&self) -> Vec<f64> {
        self.knots
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(k, v)| (v[1] - v[0]) / (k[1] - k[0]))
            .collect()
    }

    /// Two-column CSV `r, u`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["r", "u"])?;
        for (r, u) in self.knots.iter().zip(&self.values) {
            out.write_record([r.to_string(), u.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Knot budget for [`radial_transport`].
pub const DEFAULT_KNOTS: usize = 4096;

struct Interval {
    err: f64,
    a: usize,
    b: usize,
    mid: f64,
    umid: f64,
}

impl PartialEq for Interval {
    fn eq(&self, o: &Self) -> bool {
        self.err.total_cmp(&o.err).is_eq()
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Interval {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        // Larger error first; ties broken by position for determinism.
        self.err.total_cmp(&o.err).then(o.a.cmp(&self.a))
    }
}

/// Monotone map `u = F_ν⁻¹ ∘ F_μ` matching the radial laws of two measures.
pub fn radial_transport(f_mu: &RadialCdf, f_nu: &RadialCdf) -> Result<MonotoneMap> {
    radial_transport_with(f_mu, f_nu, DEFAULT_KNOTS)
}

pub fn radial_transport_with(f_mu: &RadialCdf, f_nu: &RadialCdf, max_knots: usize) -> Result<MonotoneMap> {
    for (which, f) in [("source", f_mu), ("target", f_nu)] {
        if f.has_atom() {
            return Err(Error::Quantile(format!(
                "{which} radial law has an atom, so the quantile coupling is not a function"
            )));
        }
    }
    if max_knots < 16 {
        return Err(invalid("max_knots", "need at least 16 knots"));
    }
    let gen = TransportGenerator {
        source: f_mu.clone(),
        target: f_nu.clone(),
    };
    let end = f_mu
        .support_max()
        .unwrap_or_else(|| f_mu.quantile_upper(1e-12));
    let seed_count = max_knots / 4;

    let mut knots = vec![0.0, end];
    for k in 1..=12 {
        knots.push(f_mu.quantile_ln(-(k as f64) * std::f64::consts::LN_10));
    }
    let q = seed_count / 2;
    for i in 1..q {
        knots.push(f_mu.quantile(i as f64 / q as f64));
    }
    let g = seed_count - q;
    for i in 1..g {
        knots.push(end * i as f64 / g as f64);
    }
    knots.retain(|r| r.is_finite() && *r >= 0.0 && *r <= end);
    knots.sort_unstable_by(f64::total_cmp);
    knots.dedup_by(|a, b| *a <= *b * (1.0 + 1e-14));

    let mut values: Vec<f64> = knots.par_iter().map(|&r| gen.eval(r)).collect();
    values[0] = 0.0;
    check_values(&knots, &values)?;

    // Greedy bisection of the interval with the largest midpoint error.
    let probe = |a: usize, b: usize, k: &[f64], v: &[f64]| {
        let mid = 0.5 * (k[a] + k[b]);
        let umid = gen.eval(mid);
        let err = (umid - 0.5 * (v[a] + v[b])).abs();
        Interval { err, a, b, mid, umid }
    };
    // Work on an append-only node list with explicit neighbor links.
    let mut next: Vec<usize> = (1..knots.len()).chain([usize::MAX]).collect();
    let mut heap: BinaryHeap<Interval> = (0..knots.len() - 1)
        .map(|i| probe(i, i + 1, &knots, &values))
        .collect();
    let scale = values.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    while knots.len() < max_knots {
        let Some(top) = heap.pop() else { break };
        if top.err <= 1e-13 * scale {
            break;
        }
        if top.mid <= knots[top.a] || top.mid >= knots[top.b] {
            continue;
        }
        let m = knots.len();
        knots.push(top.mid);
        values.push(top.umid.clamp(values[top.a], values[top.b]));
        next.push(top.b);
        next[top.a] = m;
        heap.push(probe(top.a, m, &knots, &values));
        heap.push(probe(m, top.b, &knots, &values));
    }
    // Walk the links back into sorted order.
    let mut order = Vec::with_capacity(knots.len());
    let mut i = 0;
    while i < knots.len() {
        order.push(i);
        i = next[i];
    }
    let k: Vec<f64> = order.iter().map(|&i| knots[i]).collect();
    let v: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut map = MonotoneMap::new(k, v)?;
    map.generator = Some(Arc::new(gen));
    Ok(map)
}

fn check_values(knots: &[f64], values: &[f64]) -> Result<()> {
    for (r, u) in knots.iter().zip(values) {
        if !u.is_finite() {
            return Err(Error::Quantile(format!("non-finite transport value at r = {r}")));
        }
    }
    if values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Quantile("transport values are not monotone".into()));
    }
    Ok(())
}

/// Largest slope of `u`. With a generator attached, the knot interval of
/// largest slope is refined three times by a factor of ten using exact
/// evaluations.
pub fn lipschitz_constant(u: &MonotoneMap) -> f64 {
    let slopes = u.slopes();
    let (mut arg, mut best) = argmax(&slopes);
    let Some(gen) = u.generator() else {
        return best;
    };
    let k = u.knots();
    // Window: the argmax interval and its neighbors.
    let mut lo = k[arg.saturating_sub(1)];
    let mut hi = k[(arg + 2).min(k.len() - 1)];
    let mut pieces = 3 * 10;
    for _ in 0..3 {
        let grid: Vec<f64> = (0..=pieces)
            .map(|i| lo + (hi - lo) * i as f64 / pieces as f64)
            .collect();
        let vals: Vec<f64> = grid.iter().map(|&r| gen.eval(r)).collect();
        let s: Vec<f64> = grid
            .windows(2)
            .zip(vals.windows(2))
            .map(|(r, v)| (v[1] - v[0]) / (r[1] - r[0]))
            .collect();
        let (a, m) = argmax(&s);
        best = best.max(m);
        arg = a;
        let step = (hi - lo) / pieces as f64;
        let new_lo = (grid[arg] - step).max(lo);
        let new_hi = (grid[arg + 1] + step).min(hi);
        lo = new_lo;
        hi = new_hi;
        pieces = 30;
    }
    best
}

fn argmax(v: &[f64]) -> (usize, f64) {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(ia, a), (i, &x)| if x > a { (i, x) } else { (ia, a) })
}

/// `U(x) = x·u(‖x‖_L)/‖x‖_L`, with `U(0) = 0`.
pub fn u_map(u: &MonotoneMap, l: &NormSpec, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    u_into(u, l, x, &mut out);
    out
}

fn u_into(u: &MonotoneMap, l: &NormSpec, x: &[f64], out: &mut [f64]) {
    let r = l.norm(x);
    if r == 0.0 {
        out.fill(0.0);
        return;
    }
    let f = u.eval(r) / r;
    for (o, v) in out.iter_mut().zip(x) {
        *o = v * f;
    }
}

/// Row-wise maps applied by [`pushforward_batch`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum PushMap {
    Identity,
    /// `x ↦ factor·x`.
    Scale { factor: f64 },
    /// `x ↦ (x_{c_1}, …, x_{c_k})`.
    Projection { coords: Vec<usize> },
    /// The norm-ratio map from `k` to `l`.
    Pi { k: NormSpec, l: NormSpec },
    /// `x ↦ x·u(‖x‖)/‖x‖`.
    Radial { u: MonotoneMap, norm: NormSpec },
}

impl PushMap {
    /// Output dimension for an input of dimension `dim`.
    pub fn output_dim(&self, dim: usize) -> usize {
        match self {
            PushMap::Projection { coords } => coords.len(),
            _ => dim,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        let mismatch = |got: usize| Error::DimensionMismatch { expected: dim, got };
        match self {
            PushMap::Identity => Ok(()),
            PushMap::Scale { factor } if factor.is_finite() => Ok(()),
            PushMap::Scale { factor } => Err(invalid("factor", format!("must be finite, got {factor}"))),
            PushMap::Projection { coords } => {
                if coords.is_empty() {
                    return Err(Error::Empty("projection coordinates"));
                }
                match coords.iter().find(|&&c| c >= dim) {
                    Some(&c) => Err(invalid("coords", format!("coordinate {c} out of range for dimension {dim}"))),
                    None => Ok(()),
                }
            }
            PushMap::Pi { k, l } if k.dim() != dim => Err(mismatch(k.dim())),
            PushMap::Pi { l, .. } if l.dim() != dim => Err(mismatch(l.dim())),
            PushMap::Pi { .. } => Ok(()),
            PushMap::Radial { norm, .. } if norm.dim() != dim => Err(mismatch(norm.dim())),
            PushMap::Radial { .. } => Ok(()),
        }
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            PushMap::Identity => out.copy_from_slice(x),
            PushMap::Scale { factor } => {
                for (o, v) in out.iter_mut().zip(x) {
                    *o = factor * v;
                }
            }
            PushMap::Projection { coords } => {
                for (o, &c) in out.iter_mut().zip(coords) {
                    *o = x[c];
                }
            }
            PushMap::Pi { k, l } => pi_into(k, l, x, out),
            PushMap::Radial { u, norm } => u_into(u, norm, x, out),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.output_dim(x.len())];
        self.apply_into(x, &mut out);
        out
    }
}

/// Image of a sample batch under a [`PushMap`]; row `i` of the image is the
/// map applied to row `i` of the source.
#[derive(Clone, Debug)]
pub struct PushforwardBatch {
    pub source: SampleBatch,
    pub map: PushMap,
    image_dim: usize,
    image: Vec<f64>,
}

impl PushforwardBatch {
    pub fn image(&self) -> Points<'_> {
        Points::new(self.image_dim, &self.image).expect("image shape")
    }

    pub fn dim(&self) -> usize {
        self.image_dim
    }
}

pub fn pushforward_batch(map: &PushMap, batch: &SampleBatch) -> Result<PushforwardBatch> {
    let dim = batch.dim();
    map.validate(dim)?;
    if matches!(map, PushMap::Pi { .. }) {
        let zeros = batch
            .points()
            .rows()
            .filter(|x| x.iter().all(|&v| v == 0.0))
            .count();
        // One zero in N is within sampling noise of a null set.
        if zeros > 1 {
            return Err(Error::ChargesOrigin {
                zeros,
                count: batch.count(),
            });
        }
    }
    let out_dim = map.output_dim(dim);
    let mut image = vec![0.0; batch.count() * out_dim];
    image
        .par_chunks_mut(out_dim)
        .zip(batch.points().par_rows())
        .for_each(|(o, x)| map.apply_into(x, o));
    Ok(PushforwardBatch {
        source: batch.clone(),
        map: map.clone(),
        image_dim: out_dim,
        image,
    })
}
