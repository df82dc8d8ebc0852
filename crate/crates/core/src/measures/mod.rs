//! Declarative measure catalog, reproducible samplers and radial laws.
//!
//! Samplers for ℓ_p bodies use the generalized-Gaussian representation: draw
//! `w_i ~ Gamma(1/p, 1)` and `|t_i| = w_i^{1/p}` with a random sign, so that
//! `t` has density proportional to `exp(−‖t‖_p^p)`. Then
//!
//! * `t / ‖t‖_p` follows the cone measure on `∂B_p^n`, and
//! * `t / (‖t‖_p^p + Z)^{1/p}` with an independent `Z ~ Exp(1)` is uniform on `B_p^n`.

pub mod gamma;
mod radial;

use std::io::Write;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::normspace::{Exponent, NormSpec};
use crate::rng::{self, StreamRng};

pub use gamma::gamma_cdf;
pub use radial::{radial_cdf, radial_cdf_with, RadialCdf, DEFAULT_EMPIRICAL_COUNT};

/// Per-coordinate normalizing constant of the generalized Gaussian density
/// `c_p⁻¹ exp(−|t|^p / p)`: `c_p = 2 Γ(1 + 1/p) p^{1/p}`.
pub fn generalized_gaussian_constant(p: f64) -> f64 {
    2.0 * gamma::ln_gamma(1.0 + 1.0 / p).exp() * p.powf(1.0 / p)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// Normalized Lebesgue measure on the unit ball of the norm.
    UniformBall(NormSpec),
    /// Cone measure on the unit sphere of the norm.
    ConeSurface(NormSpec),
    /// Product of `c_p⁻¹ exp(−|t|^p/p)` densities, `1 ≤ p ≤ 2`.
    GeneralizedGaussianProduct { p: f64 },
    StandardGaussian,
    HaarEuclideanSphere,
}

/// A measure on ℝⁿ from the catalog.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureRepr", into = "MeasureRepr")]
pub struct MeasureSpec {
    dim: usize,
    family: Family,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", try_from = "String")]
pub enum FamilyName {
    UniformBall,
    ConeSurface,
    Ggp,
    Gaussian,
    HaarSphere,
}

impl TryFrom<String> for FamilyName {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Ok(match s.as_str() {
            "uniform_ball" => FamilyName::UniformBall,
            "cone_surface" => FamilyName::ConeSurface,
            "ggp" => FamilyName::Ggp,
            "gaussian" => FamilyName::Gaussian,
            "haar_sphere" => FamilyName::HaarSphere,
            _ => {
                return Err(invalid(
                    "family",
                    format!("unknown measure family \"{s}\" (expected uniform_ball, cone_surface, ggp, gaussian or haar_sphere)"),
                ))
            }
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureRepr {
    family: FamilyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<Exponent>,
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    norm: Option<NormSpec>,
}

impl TryFrom<MeasureRepr> for MeasureSpec {
    type Error = Error;

    fn try_from(r: MeasureRepr) -> Result<Self> {
        let ball_norm = |r: &MeasureRepr| -> Result<NormSpec> {
            match (&r.norm, r.p) {
                (Some(norm), None) => Ok(norm.clone()),
                (None, Some(p)) => NormSpec::lp(r.dim, p),
                (Some(_), Some(_)) => Err(invalid("p", "give either `p` or `norm`, not both")),
                (None, None) => Err(invalid("p", "ball families need `p` or `norm`")),
            }
        };
        let no_extras = |r: &MeasureRepr, what: &str| -> Result<()> {
            if r.norm.is_some() {
                return Err(invalid("norm", format!("not accepted for {what}")));
            }
            Ok(())
        };
        match r.family {
            FamilyName::UniformBall => MeasureSpec::uniform_ball(ball_norm(&r)?),
            FamilyName::ConeSurface => MeasureSpec::cone_surface(ball_norm(&r)?),
            FamilyName::Ggp => {
                no_extras(&r, "ggp")?;
                let p = r.p.ok_or_else(|| invalid("p", "ggp requires `p`"))?;
                MeasureSpec::generalized_gaussian(r.dim, p.value())
            }
            FamilyName::Gaussian => {
                no_extras(&r, "gaussian")?;
                if r.p.is_some() {
                    return Err(invalid("p", "not accepted for gaussian"));
                }
                MeasureSpec::gaussian(r.dim)
            }
            FamilyName::HaarSphere => {
                no_extras(&r, "haar_sphere")?;
                if r.p.is_some() {
                    return Err(invalid("p", "not accepted for haar_sphere"));
                }
                MeasureSpec::haar_sphere(r.dim)
            }
        }
    }
}

impl From<MeasureSpec> for MeasureRepr {
    fn from(m: MeasureSpec) -> Self {
        let ball = |family, norm: NormSpec| {
            let plain = norm.transform().is_none() && norm.scale() == 1.0;
            MeasureRepr {
                family,
                p: plain.then(|| norm.exponent()),
                dim: m.dim,
                norm: (!plain).then_some(norm),
            }
        };
        match m.family.clone() {
            Family::UniformBall(n) => ball(FamilyName::UniformBall, n),
            Family::ConeSurface(n) => ball(FamilyName::ConeSurface, n),
            Family::GeneralizedGaussianProduct { p } => MeasureRepr {
                family: FamilyName::Ggp,
                p: Some(Exponent::new(p).expect("validated")),
                dim: m.dim,
                norm: None,
            },
            Family::StandardGaussian => MeasureRepr {
                family: FamilyName::Gaussian,
                p: None,
                dim: m.dim,
                norm: None,
            },
            Family::HaarEuclideanSphere => MeasureRepr {
                family: FamilyName::HaarSphere,
                p: None,
                dim: m.dim,
                norm: None,
            },
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(invalid("dim", "dimension must be positive"));
    }
    Ok(())
}

impl MeasureSpec {
    pub fn uniform_ball(norm: NormSpec) -> Result<Self> {
        Ok(MeasureSpec {
            dim: norm.dim(),
            family: Family::UniformBall(norm),
        })
    }

    pub fn cone_surface(norm: NormSpec) -> Result<Self> {
        Ok(MeasureSpec {
            dim: norm.dim(),
            family: Family::ConeSurface(norm),
        })
    }

    pub fn generalized_gaussian(dim: usize, p: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(1.0..=2.0).contains(&p) {
            return Err(Error::Unsupported(format!(
                "generalized Gaussian product needs 1 ≤ p ≤ 2, got {p}"
            )));
        }
        Ok(MeasureSpec {
            dim,
            family: Family::GeneralizedGaussianProduct { p },
        })
    }

    pub fn gaussian(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(MeasureSpec {
            dim,
            family: Family::StandardGaussian,
        })
    }

    pub fn haar_sphere(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(MeasureSpec {
            dim,
            family: Family::HaarEuclideanSphere,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn family_name(&self) -> FamilyName {
        match self.family {
            Family::UniformBall(_) => FamilyName::UniformBall,
            Family::ConeSurface(_) => FamilyName::ConeSurface,
            Family::GeneralizedGaussianProduct { .. } => FamilyName::Ggp,
            Family::StandardGaussian => FamilyName::Gaussian,
            Family::HaarEuclideanSphere => FamilyName::HaarSphere,
        }
    }

    /// The norm whose unit ball carries the measure, when there is one.
    pub fn body(&self) -> Option<NormSpec> {
        match &self.family {
            Family::UniformBall(n) | Family::ConeSurface(n) => Some(n.clone()),
            Family::HaarEuclideanSphere => Some(NormSpec::l2(self.dim)),
            _ => None,
        }
    }

    fn sampler(&self) -> Result<Sampler> {
        let coords = |p: Exponent| -> Result<Coordinate> {
            let p = p.value();
            Ok(if p.is_infinite() {
                Coordinate::Cube
            } else if p == 1.0 {
                Coordinate::Exponential
            } else if p == 2.0 {
                Coordinate::Normal
            } else {
                Coordinate::Gamma {
                    dist: Gamma::new(1.0 / p, 1.0)
                        .map_err(|e| Error::Unsupported(format!("gamma sampler: {e}")))?,
                    inv_p: 1.0 / p,
                }
            })
        };
        Ok(match &self.family {
            Family::UniformBall(norm) => Sampler::Ball {
                coord: coords(norm.exponent())?,
                p: norm.exponent().value(),
                norm: norm.clone(),
            },
            Family::ConeSurface(norm) => Sampler::Cone {
                coord: coords(norm.exponent())?,
                p: norm.exponent().value(),
                norm: norm.clone(),
            },
            Family::GeneralizedGaussianProduct { p } => Sampler::Product {
                coord: coords(Exponent::new(*p)?)?,
                p: *p,
            },
            Family::StandardGaussian => Sampler::Product {
                coord: Coordinate::Normal,
                p: 2.0,
            },
            Family::HaarEuclideanSphere => Sampler::Cone {
                coord: Coordinate::Normal,
                p: 2.0,
                norm: NormSpec::l2(self.dim),
            },
        })
    }
}

/// One coordinate of the exp(−|t|^p) representation, returning `(t, |t|^p)`.
enum Coordinate {
    Exponential,
    Normal,
    Gamma { dist: Gamma<f64>, inv_p: f64 },
    Cube,
}

impl Coordinate {
    #[inline]
    fn draw(&self, rng: &mut StreamRng) -> (f64, f64) {
        match self {
            Coordinate::Exponential => {
                let w: f64 = Exp1.sample(rng);
                (if rng.random::<bool>() { w } else { -w }, w)
            }
            Coordinate::Normal => {
                let g: f64 = StandardNormal.sample(rng);
                let t = g * std::f64::consts::FRAC_1_SQRT_2;
                (t, t * t)
            }
            Coordinate::Gamma { dist, inv_p } => {
                let w = dist.sample(rng);
                let t = w.powf(*inv_p);
                (if rng.random::<bool>() { t } else { -t }, w)
            }
            Coordinate::Cube => (rng.random_range(-1.0..=1.0), 0.0),
        }
    }
}

enum Sampler {
    Ball { coord: Coordinate, p: f64, norm: NormSpec },
    Cone { coord: Coordinate, p: f64, norm: NormSpec },
    Product { coord: Coordinate, p: f64 },
}

/// Maps a point of the plain ℓ_p body onto the body of `norm`.
fn pull_back(norm: &NormSpec, row: &mut [f64]) {
    if let Some(t) = norm.transform() {
        let y = t.apply_inverse(row);
        row.copy_from_slice(&y);
    }
    if norm.scale() != 1.0 {
        let s = 1.0 / norm.scale();
        row.iter_mut().for_each(|v| *v *= s);
    }
}

impl Sampler {
    fn fill(&self, rng: &mut StreamRng, row: &mut [f64]) {
        match self {
            Sampler::Ball { coord, p, norm } => {
                let mut power_sum = 0.0;
                for v in row.iter_mut() {
                    let (t, w) = coord.draw(rng);
                    *v = t;
                    power_sum += w;
                }
                if !p.is_infinite() {
                    let z: f64 = Exp1.sample(rng);
                    let r = (power_sum + z).powf(-1.0 / p);
                    row.iter_mut().for_each(|v| *v *= r);
                }
                pull_back(norm, row);
            }
            Sampler::Cone { coord, p, norm } => {
                if p.is_infinite() {
                    // Cone measure on the cube surface: a uniformly chosen facet.
                    for v in row.iter_mut() {
                        *v = rng.random_range(-1.0..=1.0);
                    }
                    let face = rng.random_range(0..row.len());
                    row[face] = if rng.random::<bool>() { 1.0 } else { -1.0 };
                } else {
                    for v in row.iter_mut() {
                        *v = coord.draw(rng).0;
                    }
                }
                pull_back(norm, row);
                let r = norm.norm(row);
                row.iter_mut().for_each(|v| *v /= r);
            }
            Sampler::Product { coord, p } => {
                // (t, |t|^p) under exp(−|t|^p) rescales to exp(−|t|^p/p) by p^{1/p}.
                let s = p.powf(1.0 / p);
                for v in row.iter_mut() {
                    *v = coord.draw(rng).0 * s;
                }
            }
        }
    }
}

/// Borrowed view of an `N × n` row-major point cloud.
#[derive(Clone, Copy, Debug)]
pub struct Points<'a> {
    dim: usize,
    data: &'a [f64],
}

impl<'a> Points<'a> {
    pub fn new(dim: usize, data: &'a [f64]) -> Result<Self> {
        if dim == 0 || data.len() % dim != 0 {
            return Err(invalid("data", "length must be a multiple of a positive dimension"));
        }
        Ok(Points { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn count(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'a, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn par_rows(&self) -> rayon::slice::ChunksExact<'a, f64> {
        self.data.par_chunks_exact(self.dim)
    }

    pub fn data(&self) -> &'a [f64] {
        self.data
    }

    /// `f` applied to every row, in row order.
    pub fn map_rows<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        self.par_rows().map(f).collect()
    }

    /// Writes one point per line under a `x0,…,x{n−1}` header.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record((0..self.dim).map(|i| format!("x{i}")))?;
        for row in self.rows() {
            out.write_record(row.iter().map(|v| v.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Immutable `count × dim` sample from a catalog measure.
#[derive(Clone, Debug)]
pub struct SampleBatch {
    measure: MeasureSpec,
    seed: u64,
    count: usize,
    data: Arc<[f64]>,
}

impl SampleBatch {
    pub fn measure(&self) -> &MeasureSpec {
        &self.measure
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn dim(&self) -> usize {
        self.measure.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn points(&self) -> Points<'_> {
        Points {
            dim: self.measure.dim,
            data: &self.data,
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.points().row(i)
    }
}

/// Draws `count` i.i.d. points; row `i` depends only on `(seed, i)`.
pub fn sample(measure: &MeasureSpec, count: usize, seed: u64) -> Result<SampleBatch> {
    if count == 0 {
        return Err(invalid("count", "need at least one sample"));
    }
    let sampler = measure.sampler()?;
    let dim = measure.dim;
    let key = rng::derive_seed(seed, "sample");
    let mut data = vec![0.0; count * dim];
    data.par_chunks_mut(dim).enumerate().for_each(|(i, row)| {
        let mut g = rng::stream(key, i as u64);
        sampler.fill(&mut g, row);
    });
    Ok(SampleBatch {
        measure: measure.clone(),
        seed,
        count,
        data: data.into(),
    })
}

/// One-sample Kolmogorov–Smirnov statistic of `values` against `cdf`.
pub fn ks_statistic(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_marginals_are_uniform() {
        let m = MeasureSpec::uniform_ball(NormSpec::linf(3)).unwrap();
        let b = sample(&m, 100_000, 1).unwrap();
        for j in 0..3 {
            let col: Vec<f64> = b.points().rows().map(|r| r[j]).collect();
            let ks = ks_statistic(&col, |t| ((t + 1.0) / 2.0).clamp(0.0, 1.0));
            assert!(ks <= 0.01, "coordinate {j}: ks={ks}");
        }
    }

    #[test]
    fn cone_samples_lie_on_sphere() {
        for (m, norm) in [
            (MeasureSpec::haar_sphere(9).unwrap(), NormSpec::l2(9)),
            (MeasureSpec::cone_surface(NormSpec::l(9, 1.5)).unwrap(), NormSpec::l(9, 1.5)),
            (MeasureSpec::cone_surface(NormSpec::linf(9)).unwrap(), NormSpec::linf(9)),
            (MeasureSpec::cone_surface(NormSpec::l1(9)).unwrap(), NormSpec::l1(9)),
        ] {
            let b = sample(&m, 2000, 3).unwrap();
            for row in b.points().rows() {
                assert!((norm.norm(row) - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn l1_disc_radial_law_matches_rejection_oracle() {
        // Rejection sampling from the square as an independent reference.
        let m = MeasureSpec::uniform_ball(NormSpec::l1(2)).unwrap();
        let b = sample(&m, 100_000, 5).unwrap();
        let radii: Vec<f64> = b.points().rows().map(|r| r[0].abs() + r[1].abs()).collect();
        let mut g = rng::stream(99, 0);
        let mut oracle = Vec::new();
        while oracle.len() < 100_000 {
            let x: f64 = g.random_range(-1.0..1.0);
            let y: f64 = g.random_range(-1.0..1.0);
            if x.abs() + y.abs() <= 1.0 {
                oracle.push(x.abs() + y.abs());
            }
        }
        assert!(ks_statistic(&radii, |r| (r * r).min(1.0)) <= 0.01);
        assert!(ks_statistic(&oracle, |r| (r * r).min(1.0)) <= 0.01);
    }

    #[test]
    fn uniform_ball_radial_law_all_p() {
        let n_samples = 50_000;
        let tol = 1.36 / (n_samples as f64).sqrt() + 0.005;
        for &p in &[1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            for &n in &[1usize, 3, 10] {
                let norm = NormSpec::l(n, p);
                let m = MeasureSpec::uniform_ball(norm.clone()).unwrap();
                let b = sample(&m, n_samples, 11).unwrap();
                let radii = b.points().map_rows(|r| norm.norm(r));
                assert!(radii.iter().all(|&r| r <= 1.0 + 1e-12));
                let ks = ks_statistic(&radii, |r| r.min(1.0).powi(n as i32));
                assert!(ks <= tol, "p={p} n={n} ks={ks}");
            }
        }
    }

    #[test]
    fn transformed_ball_stays_inside() {
        let t = crate::normspace::Transform::from_row_major(2, &[1.0, 0.5, 0.0, 2.0]).unwrap();
        let norm = NormSpec::l1(2).scaled(3.0).unwrap().with_transform(t).unwrap();
        let b = sample(&MeasureSpec::uniform_ball(norm.clone()).unwrap(), 10_000, 2).unwrap();
        let radii = b.points().map_rows(|r| norm.norm(r));
        assert!(radii.iter().all(|&r| r <= 1.0 + 1e-12));
        assert!(ks_statistic(&radii, |r| (r * r).min(1.0)) < 0.02);
    }

    #[test]
    fn generalized_gaussian_density_integrates_to_one() {
        // Composite Simpson on [−60, 60].
        for &p in &[1.0, 1.25, 1.5, 2.0] {
            let c = generalized_gaussian_constant(p);
            let steps = 400_000;
            let h = 120.0 / steps as f64;
            let f = |t: f64| (-t.abs().powf(p) / p).exp() / c;
            let mut s = f(-60.0) + f(60.0);
            for k in 1..steps {
                let t = -60.0 + k as f64 * h;
                s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(t);
            }
            let integral = s * h / 3.0;
            assert!((integral - 1.0).abs() < 1e-9, "p={p}: {integral}");
        }
        assert!((generalized_gaussian_constant(2.0) - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-12);
        assert!((generalized_gaussian_constant(1.0) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn generalized_gaussian_marginal_matches_density() {
        for &p in &[1.0, 1.5, 2.0] {
            let m = MeasureSpec::generalized_gaussian(2, p).unwrap();
            let b = sample(&m, 100_000, 4).unwrap();
            let col: Vec<f64> = b.points().rows().map(|r| r[1]).collect();
            // |t|^p/p ~ Gamma(1/p): P(t ≤ x) = ½ + sign(x)·½·P(1/p, |x|^p/p)
            let cdf = |x: f64| {
                let g = gamma::gamma_p(1.0 / p, x.abs().powf(p) / p);
                0.5 + 0.5 * x.signum() * g
            };
            assert!(ks_statistic(&col, cdf) <= 0.01, "p={p}");
        }
        assert!(MeasureSpec::generalized_gaussian(2, 3.0).is_err());
    }

    #[test]
    fn batch_means_are_centered() {
        let n = 6;
        for m in [
            MeasureSpec::uniform_ball(NormSpec::l1(n)).unwrap(),
            MeasureSpec::cone_surface(NormSpec::l(n, 3.0)).unwrap(),
            MeasureSpec::generalized_gaussian(n, 1.2).unwrap(),
            MeasureSpec::gaussian(n).unwrap(),
            MeasureSpec::haar_sphere(n).unwrap(),
            MeasureSpec::uniform_ball(NormSpec::linf(n)).unwrap(),
            MeasureSpec::cone_surface(NormSpec::linf(n)).unwrap(),
        ] {
            let b = sample(&m, 50_000, 8).unwrap();
            let count = b.count() as f64;
            for j in 0..n {
                let mean = b.points().rows().map(|r| r[j]).sum::<f64>() / count;
                let var = b.points().rows().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / count;
                assert!(mean.abs() <= 5.0 * (var / count).sqrt(), "{m:?} coord {j}");
            }
        }
    }

    #[test]
    fn sampling_is_reproducible_across_pools() {
        let m = MeasureSpec::uniform_ball(NormSpec::l(5, 1.5)).unwrap();
        let a = sample(&m, 4000, 42).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| sample(&m, 4000, 42).unwrap());
        assert_eq!(a.data(), b.data());
        let c = sample(&m, 4000, 43).unwrap();
        assert_ne!(a.data(), c.data());
        // Prefix stability: row i does not depend on the batch size.
        let short = sample(&m, 10, 42).unwrap();
        assert_eq!(&a.data()[..50], short.data());
    }

    #[test]
    fn measure_json_schema() {
        let m: MeasureSpec =
            serde_json::from_str(r#"{"family":"uniform_ball","p":"inf","dim":4}"#).unwrap();
        assert_eq!(m, MeasureSpec::uniform_ball(NormSpec::linf(4)).unwrap());
        let s = serde_json::to_string(&MeasureSpec::generalized_gaussian(3, 1.5).unwrap()).unwrap();
        assert_eq!(s, r#"{"family":"ggp","p":1.5,"dim":3}"#);
        let err = serde_json::from_str::<MeasureSpec>(r#"{"family":"torus","dim":4}"#);
        assert!(err.is_err());
        assert!(serde_json::from_str::<MeasureSpec>(r#"{"family":"gaussian","dim":4,"p":2}"#).is_err());
        let m: MeasureSpec = serde_json::from_str(
            r#"{"family":"cone_surface","dim":2,"norm":{"kind":"lp","p":1,"dim":2,"scale":2}}"#,
        )
        .unwrap();
        assert_eq!(serde_json::from_str::<MeasureSpec>(&serde_json::to_string(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn csv_export_has_header_and_rows() {
        let b = sample(&MeasureSpec::gaussian(2).unwrap(), 3, 0).unwrap();
        let mut buf = Vec::new();
        b.points().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("x0,x1\n"));
    }
}
