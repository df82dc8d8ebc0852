//! Norm algebra on ℝⁿ: ℓ_p norms optionally composed with a scale and an
//! invertible linear map, their duals, and containment constants between
//! pairs of norms.
//!
//! A [`NormSpec`] evaluates `‖x‖ = scale · ‖T x‖_p`. The dual of that norm is
//! `(1/scale) · ‖T⁻ᵀ y‖_q` with `1/p + 1/q = 1`, which is what the exact
//! half-space expansions in [`crate::concentration`] rely on.

use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rng;

/// Transforms with a larger condition number are rejected.
pub const MAX_CONDITION: f64 = 1e8;

/// Random directions tried by the heuristic containment search.
const CONTAINMENT_SEARCH_DIRECTIONS: usize = 4096;

/// An ℓ_p exponent in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub const ONE: Exponent = Exponent(1.0);
    pub const TWO: Exponent = Exponent(2.0);
    pub const INFINITY: Exponent = Exponent(f64::INFINITY);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(invalid("p", format!("exponent must lie in [1, ∞], got {p}")));
        }
        Ok(Exponent(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }

    /// The Hölder conjugate `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Exponent {
        if self.0 == 1.0 {
            Exponent::INFINITY
        } else if self.is_infinite() {
            Exponent::ONE
        } else {
            Exponent(self.0 / (self.0 - 1.0))
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ExponentRepr {
    Number(f64),
    Text(String),
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            ExponentRepr::Text("inf".into()).serialize(s)
        } else {
            ExponentRepr::Number(self.0).serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match ExponentRepr::deserialize(d)? {
            ExponentRepr::Number(p) => Exponent::new(p).map_err(D::Error::custom),
            ExponentRepr::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "∞") => {
                Ok(Exponent::INFINITY)
            }
            ExponentRepr::Text(t) => Err(D::Error::custom(format!(
                "expected a number ≥ 1 or \"inf\", got \"{t}\""
            ))),
        }
    }
}

/// An invertible linear map with its cached inverse and condition number.
#[derive(Clone, Debug)]
pub struct Transform {
    matrix: DMatrix<f64>,
    inverse: DMatrix<f64>,
    condition: f64,
}

impl PartialEq for Transform {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl Transform {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(invalid("transform", "matrix must be square"));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(invalid("transform", "matrix entries must be finite"));
        }
        let singular = matrix.clone().svd(false, false).singular_values;
        let smax = singular.max();
        let smin = singular.min();
        if smin <= 0.0 || smax <= 0.0 {
            return Err(Error::SingularTransform);
        }
        let condition = smax / smin;
        if condition > MAX_CONDITION {
            return Err(Error::IllConditioned {
                condition,
                limit: MAX_CONDITION,
            });
        }
        let inverse = matrix.clone().try_inverse().ok_or(Error::SingularTransform)?;
        Ok(Transform {
            matrix,
            inverse,
            condition,
        })
    }

    /// Builds a transform from a row-major slice.
    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries)))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply_into(m: &DMatrix<f64>, x: &[f64], out: &mut [f64]) {
        let n = m.nrows();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = 0.0;
            for (j, xj) in x.iter().enumerate() {
                acc += m[(i, j)] * xj;
            }
            *o = acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        Self::apply_into(&self.matrix, x, &mut out);
        out
    }

    pub fn apply_inverse(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        Self::apply_into(&self.inverse, x, &mut out);
        out
    }

    /// The transform `T⁻ᵀ` used by dual norms.
    pub fn inverse_transpose(&self) -> Transform {
        Transform {
            matrix: self.inverse.transpose(),
            inverse: self.matrix.transpose(),
            condition: self.condition,
        }
    }

    /// `self ∘ other`, i.e. `x ↦ self(other(x))`.
    pub fn compose(&self, other: &Transform) -> Result<Transform> {
        Transform::new(&self.matrix * &other.matrix)
    }

    fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.matrix.row(i).iter().copied().collect())
            .collect()
    }
}

/// `scale · ‖T x‖_p` on ℝⁿ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NormSpecRepr", into = "NormSpecRepr")]
pub struct NormSpec {
    dim: usize,
    p: Exponent,
    scale: f64,
    transform: Option<Transform>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixRepr {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NormSpecRepr {
    kind: String,
    p: Exponent,
    dim: usize,
    #[serde(default, skip_serializing_if = "is_unit")]
    scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    transform: Option<MatrixRepr>,
}

fn is_unit(s: &Option<f64>) -> bool {
    s.map_or(true, |v| v == 1.0)
}

impl TryFrom<NormSpecRepr> for NormSpec {
    type Error = Error;

    fn try_from(r: NormSpecRepr) -> Result<Self> {
        if r.kind != "lp" {
            return Err(invalid("kind", format!("unsupported norm kind \"{}\"", r.kind)));
        }
        let mut norm = NormSpec::lp(r.dim, r.p)?;
        if let Some(s) = r.scale {
            norm = norm.scaled(s)?;
        }
        if let Some(m) = r.transform {
            let flat: Vec<f64> = match m {
                MatrixRepr::Rows(rows) => {
                    if rows.len() != r.dim || rows.iter().any(|row| row.len() != r.dim) {
                        return Err(invalid("transform", "matrix must be dim × dim"));
                    }
                    rows.into_iter().flatten().collect()
                }
                MatrixRepr::Flat(v) => v,
            };
            norm = norm.with_transform(Transform::from_row_major(r.dim, &flat)?)?;
        }
        Ok(norm)
    }
}

impl From<NormSpec> for NormSpecRepr {
    fn from(n: NormSpec) -> Self {
        NormSpecRepr {
            kind: "lp".into(),
            p: n.p,
            dim: n.dim,
            scale: Some(n.scale),
            transform: n.transform.as_ref().map(|t| MatrixRepr::Rows(t.to_rows())),
        }
    }
}

impl NormSpec {
    pub fn lp(dim: usize, p: Exponent) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "dimension must be positive"));
        }
        Ok(NormSpec {
            dim,
            p,
            scale: 1.0,
            transform: None,
        })
    }

    /// Shorthand for `ℓ_p` with a numeric exponent; panics on `p < 1`.
    pub fn l(dim: usize, p: f64) -> Self {
        Self::lp(dim, Exponent::new(p).expect("p ≥ 1")).expect("dim > 0")
    }

    pub fn l1(dim: usize) -> Self {
        Self::l(dim, 1.0)
    }

    pub fn l2(dim: usize) -> Self {
        Self::l(dim, 2.0)
    }

    pub fn linf(dim: usize) -> Self {
        Self::l(dim, f64::INFINITY)
    }

    /// Multiplies the norm by `factor > 0`.
    pub fn scaled(mut self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(invalid("scale", format!("must be finite and positive, got {factor}")));
        }
        self.scale *= factor;
        Ok(self)
    }

    /// Precomposes with `t`: the result evaluates `scale · ‖T_old · t · x‖_p`.
    pub fn with_transform(mut self, t: Transform) -> Result<Self> {
        if t.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: t.dim(),
            });
        }
        self.transform = Some(match self.transform.take() {
            Some(existing) => existing.compose(&t)?,
            None => t,
        });
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exponent(&self) -> Exponent {
        self.p
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn transform(&self) -> Option<&Transform> {
        self.transform.as_ref()
    }

    /// Condition number of the transform (1 for untransformed norms).
    pub fn condition(&self) -> f64 {
        self.transform.as_ref().map_or(1.0, |t| t.condition())
    }

    /// True when both norms are the same ℓ_p body up to a positive scale.
    pub fn same_shape(&self, other: &NormSpec) -> bool {
        self.dim == other.dim && self.p == other.p && self.transform == other.transform
    }

    /// Checked evaluation.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(self.norm(x))
    }

    /// Evaluation without validation, for hot loops over validated batches.
    #[inline]
    pub fn norm(&self, x: &[f64]) -> f64 {
        match &self.transform {
            None => self.scale * lp_norm(x, self.p),
            Some(t) => self.scale * lp_norm(&t.apply(x), self.p),
        }
    }

    pub fn dual(&self) -> NormSpec {
        NormSpec {
            dim: self.dim,
            p: self.p.conjugate(),
            scale: 1.0 / self.scale,
            transform: self.transform.as_ref().map(Transform::inverse_transpose),
        }
    }

    /// Short label such as `l1`, `2*l1.5` or `T*linf`.
    pub fn label(&self) -> String {
        let mut s = String::new();
        if self.scale != 1.0 {
            s.push_str(&format!("{}*", self.scale));
        }
        if self.transform.is_some() {
            s.push_str("T*");
        }
        s.push_str(&format!("l{}", self.p));
        s
    }
}

/// Unscaled ℓ_p norm with max-rescaling for large exponents.
#[inline]
pub fn lp_norm(x: &[f64], p: Exponent) -> f64 {
    let p = p.value();
    if p == 1.0 {
        return x.iter().map(|v| v.abs()).sum();
    }
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if p.is_infinite() || max == 0.0 {
        return max;
    }
    if p == 2.0 {
        let ss: f64 = x.iter().map(|v| v * v).sum();
        if ss.is_finite() && ss > 1e-280 {
            return ss.sqrt();
        }
        let ss: f64 = x.iter().map(|v| (v / max) * (v / max)).sum();
        return max * ss.sqrt();
    }
    let s: f64 = x.iter().map(|v| (v.abs() / max).powf(p)).sum();
    max * s.powf(1.0 / p)
}

/// The constants `scale`, `λ` with `scale·‖x‖_K ≤ ‖x‖_L ≤ scale·λ·‖x‖_K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainmentConstant {
    pub lambda: f64,
    pub scale: f64,
    /// Closed form (true) or a random-search estimate that bounds the true λ from below.
    pub exact: bool,
}

impl ContainmentConstant {
    /// Rescales `l` by `1/scale` so that `‖·‖_K ≤ ‖·‖_L' ≤ λ‖·‖_K`.
    pub fn normalize(&self, l: &NormSpec) -> Result<NormSpec> {
        l.clone().scaled(1.0 / self.scale)
    }

    /// Largest ratio `‖x‖_L / ‖x‖_K`.
    pub fn upper(&self) -> f64 {
        self.scale * self.lambda
    }
}

/// Containment constant between `k` and `l`, oriented as
/// `scale·‖·‖_K ≤ ‖·‖_L ≤ scale·λ·‖·‖_K`.
pub fn containment_lambda(k: &NormSpec, l: &NormSpec) -> Result<ContainmentConstant> {
    if k.dim != l.dim {
        return Err(Error::DimensionMismatch {
            expected: k.dim,
            got: l.dim,
        });
    }
    let n = k.dim as f64;
    if k.transform.is_none() && l.transform.is_none() {
        // ℓ_q ≤ ℓ_p ≤ n^{1/p−1/q} ℓ_q for p ≤ q.
        let gap = k.p.reciprocal() - l.p.reciprocal();
        let ratio = l.scale / k.scale;
        let (lo, hi) = if gap >= 0.0 {
            // L has the larger exponent, so ‖x‖_L ≤ ‖x‖_K.
            (n.powf(-gap), 1.0)
        } else {
            (1.0, n.powf(-gap))
        };
        return Ok(ContainmentConstant {
            lambda: hi / lo,
            scale: ratio * lo,
            exact: true,
        });
    }
    if let (Some(tk), Some(tl)) = (&k.transform, &l.transform) {
        if tk == tl {
            let plain = containment_lambda(
                &NormSpec::lp(k.dim, k.p)?.scaled(k.scale)?,
                &NormSpec::lp(l.dim, l.p)?.scaled(l.scale)?,
            )?;
            return Ok(plain);
        }
    }
    Ok(heuristic_containment(k, l))
}

fn heuristic_containment(k: &NormSpec, l: &NormSpec) -> ContainmentConstant {
    let n = k.dim;
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    let mut consider = |x: &[f64]| {
        let nk = k.norm(x);
        if nk > 0.0 {
            let r = l.norm(x) / nk;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    };
    let mut x = vec![0.0; n];
    for i in 0..n {
        x.fill(0.0);
        x[i] = 1.0;
        consider(&x);
    }
    x.fill(1.0);
    consider(&x);
    // Candidates are also pulled back through each transform so that the
    // extreme points of the transformed bodies are probed.
    let mut pulled = Vec::new();
    for t in [k.transform.as_ref(), l.transform.as_ref()].into_iter().flatten() {
        for i in 0..n {
            x.fill(0.0);
            x[i] = 1.0;
            pulled.push(t.apply_inverse(&x));
        }
        pulled.push(t.apply_inverse(&vec![1.0; n]));
    }
    for y in &pulled {
        consider(y);
    }
    let mut g = rng::stream(rng::derive_seed(0, "containment"), n as u64);
    for _ in 0..CONTAINMENT_SEARCH_DIRECTIONS {
        for v in x.iter_mut() {
            *v = g.sample(StandardNormal);
        }
        consider(&x);
        for v in x.iter_mut() {
            *v = if *v >= 0.0 { 1.0 } else { -1.0 };
        }
        consider(&x);
    }
    ContainmentConstant {
        lambda: hi / lo,
        scale: lo,
        exact: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn evaluates_basic_norms() {
        assert_eq!(NormSpec::l2(2).eval(&[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(NormSpec::linf(3).eval(&[1.0, -2.0, 0.5]).unwrap(), 2.0);
        for i in 0..4 {
            let mut e = vec![0.0; 4];
            e[i] = 1.0;
            assert_eq!(NormSpec::l1(4).eval(&e).unwrap(), 1.0);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            NormSpec::l2(3).eval(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        ));
        assert!(matches!(
            NormSpec::l2(2).eval(&[1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert!(Exponent::new(0.5).is_err());
    }

    #[test]
    fn large_exponent_does_not_overflow() {
        let x = vec![1e200; 1024];
        let v = NormSpec::l(1024, 64.0).norm(&x);
        assert!(v.is_finite());
        let expected = 1e200 * 1024f64.powf(1.0 / 64.0);
        assert!((v / expected - 1.0).abs() < 1e-12);
        let tiny = vec![1e-200; 16];
        assert!((NormSpec::l2(16).norm(&tiny) / 4e-200 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duals_are_conjugate() {
        assert!(NormSpec::l1(3).dual().exponent().is_infinite());
        assert_eq!(NormSpec::l2(3).dual().exponent().value(), 2.0);
        assert!((NormSpec::l(3, 4.0).dual().exponent().value() - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(NormSpec::linf(3).dual().exponent().value(), 1.0);
    }

    #[test]
    fn transformed_dual_matches_supremum() {
        // ‖y‖_* = sup ⟨y,x⟩/‖x‖; check ⟨y,x⟩ ≤ ‖y‖_*‖x‖ and tightness at an explicit maximiser.
        let t = Transform::from_row_major(2, &[2.0, 1.0, 0.0, 1.0]).unwrap();
        let norm = NormSpec::l2(2).scaled(3.0).unwrap().with_transform(t.clone()).unwrap();
        let dual = norm.dual();
        let y = [0.7, -1.3];
        let mut best = 0.0f64;
        for k in 0..20000 {
            let a = k as f64 / 20000.0 * std::f64::consts::TAU;
            let x = [a.cos(), a.sin()];
            best = best.max((y[0] * x[0] + y[1] * x[1]) / norm.norm(&x));
        }
        let d = dual.norm(&y);
        assert!(best <= d * (1.0 + 1e-12));
        assert!((best / d - 1.0).abs() < 1e-6);
    }

    #[test]
    fn containment_closed_forms() {
        for n in [2usize, 7, 64] {
            let c = containment_lambda(&NormSpec::l2(n), &NormSpec::l1(n)).unwrap();
            assert!(c.exact);
            assert!((c.scale - 1.0).abs() < 1e-15);
            assert!((c.lambda - (n as f64).sqrt()).abs() < 1e-12);

            let c = containment_lambda(&NormSpec::l(n, 1.5), &NormSpec::l(n, 4.0)).unwrap();
            let expected = (n as f64).powf(1.0 / 1.5 - 0.25);
            assert!((c.lambda - expected).abs() < 1e-12 * expected);
            assert!((c.scale * expected - 1.0).abs() < 1e-12);

            let same = containment_lambda(&NormSpec::l(n, 3.0), &NormSpec::l(n, 3.0)).unwrap();
            assert_eq!((same.scale, same.lambda), (1.0, 1.0));
        }
    }

    #[test]
    fn heuristic_containment_is_a_lower_bound() {
        let t = Transform::diagonal(&[1.0, 2.0, 4.0]).unwrap();
        let l = NormSpec::l2(3).with_transform(t).unwrap();
        let c = containment_lambda(&NormSpec::l2(3), &l).unwrap();
        assert!(!c.exact);
        // For a diagonal map the exact ratios are the extreme diagonal entries.
        assert!((c.scale - 1.0).abs() < 1e-12);
        assert!(c.lambda <= 4.0 + 1e-12);
        assert!(c.lambda > 3.99);
    }

    #[test]
    fn rejects_singular_and_ill_conditioned() {
        assert!(matches!(
            Transform::from_row_major(2, &[1.0, 2.0, 2.0, 4.0]),
            Err(Error::SingularTransform | Error::IllConditioned { .. })
        ));
        assert!(matches!(
            Transform::diagonal(&[1.0, 1e-9]),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn serde_round_trip_and_inf() {
        let json = r#"{"kind":"lp","p":"inf","dim":3}"#;
        let n: NormSpec = serde_json::from_str(json).unwrap();
        assert!(n.exponent().is_infinite());
        assert_eq!(serde_json::to_string(&n).unwrap(), json);
        let t: NormSpec =
            serde_json::from_str(r#"{"kind":"lp","p":2,"dim":2,"transform":[[1,0],[0,2]]}"#)
                .unwrap();
        assert_eq!(t.norm(&[0.0, 1.0]), 2.0);
        assert!(serde_json::from_str::<NormSpec>(r#"{"kind":"lp","p":2,"dim":2,"x":1}"#).is_err());
        assert!(serde_json::from_str::<NormSpec>(r#"{"kind":"lq","p":2,"dim":2}"#).is_err());
    }

    fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, n)
    }

    fn exponent_strategy() -> impl Strategy<Value = f64> {
        prop_oneof![Just(1.0), Just(2.0), Just(f64::INFINITY), 1.0f64..12.0]
    }

    proptest! {
        #[test]
        fn homogeneity_and_triangle(p in exponent_strategy(), x in vec_strategy(6), y in vec_strategy(6), c in -5.0f64..5.0) {
            let norm = NormSpec::l(6, p);
            let nx = norm.norm(&x);
            let cx: Vec<f64> = x.iter().map(|v| c * v).collect();
            prop_assert!((norm.norm(&cx) - c.abs() * nx).abs() <= 1e-12 * (1.0 + c.abs() * nx));
            let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            prop_assert!(norm.norm(&s) <= nx + norm.norm(&y) + 1e-12 * (1.0 + nx));
            prop_assert!((nx == 0.0) == x.iter().all(|v| *v == 0.0));
        }

        #[test]
        fn double_dual_is_identity(p in exponent_strategy(), x in vec_strategy(5), s in 0.1f64..10.0) {
            let t = Transform::from_row_major(5, &[
                2.0, 0.1, 0.0, 0.0, 0.3,
                0.0, 1.0, 0.2, 0.0, 0.0,
                0.0, 0.0, 1.5, 0.1, 0.0,
                0.4, 0.0, 0.0, 1.0, 0.0,
                0.0, 0.0, 0.0, 0.0, 0.5]).unwrap();
            let norm = NormSpec::l(5, p).scaled(s).unwrap().with_transform(t).unwrap();
            let back = norm.dual().dual();
            let a = norm.norm(&x);
            prop_assert!((back.norm(&x) - a).abs() <= 1e-12 * (1.0 + a));
        }

        #[test]
        fn lp_norms_decrease_in_p(p in 1.0f64..8.0, dq in 0.0f64..8.0, x in vec_strategy(7)) {
            let q = p + dq;
            prop_assert!(NormSpec::l(7, q).norm(&x) <= NormSpec::l(7, p).norm(&x) * (1.0 + 1e-12));
            prop_assert!(NormSpec::linf(7).norm(&x) <= NormSpec::l(7, p).norm(&x) * (1.0 + 1e-12));
        }
    }
}
