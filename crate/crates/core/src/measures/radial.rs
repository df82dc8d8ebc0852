use serde::Serialize;

use super::gamma;
use super::{sample, Family, MeasureSpec};
use crate::error::Result;
use crate::normspace::NormSpec;
use crate::rng;

/// Sample size used when a radial law has no catalog entry.
pub const DEFAULT_EMPIRICAL_COUNT: usize = 100_000;

/// Law of `‖X‖` for a radially symmetric measure.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum RadialCdf {
    /// `F(r) = min(r / radius, 1)^dim`: uniform measure on a ball.
    Power { dim: usize, radius: f64 },
    /// `F(r) = P(shape, (r/scale)^p / p)`: generalized Gaussian products.
    GammaPower { shape: f64, p: f64, scale: f64 },
    /// All mass at one radius (cone measures).
    PointMass { radius: f64 },
    /// Piecewise-linear interpolation through midpoint plotting positions
    /// `(r_(i), (i − ½)/N)`, anchored at `(0, 0)`.
    Empirical {
        #[serde(skip)]
        radii: Vec<f64>,
        count: usize,
    },
}

impl RadialCdf {
    /// Builds an empirical law from observed radii.
    pub fn empirical(mut radii: Vec<f64>) -> Self {
        radii.sort_unstable_by(f64::total_cmp);
        let count = radii.len();
        RadialCdf::Empirical { radii, count }
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self, RadialCdf::Empirical { .. })
    }

    /// True when the law has an atom, so quantile matching is ill-posed.
    pub fn has_atom(&self) -> bool {
        match self {
            RadialCdf::PointMass { .. } => true,
            RadialCdf::Empirical { radii, .. } => radii.windows(2).any(|w| w[0] == w[1]),
            _ => false,
        }
    }

    /// Upper end of the support, if bounded.
    pub fn support_max(&self) -> Option<f64> {
        match self {
            RadialCdf::Power { radius, .. } | RadialCdf::PointMass { radius } => Some(*radius),
            RadialCdf::GammaPower { .. } => None,
            RadialCdf::Empirical { radii, .. } => Some(empirical_end(radii)),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        match self {
            RadialCdf::Power { dim, radius } => (r / radius).min(1.0).powi(*dim as i32),
            RadialCdf::GammaPower { shape, p, scale } => {
                gamma::gamma_p(*shape, (r / scale).powf(*p) / p)
            }
            RadialCdf::PointMass { radius } => {
                if r >= *radius {
                    1.0
                } else {
                    0.0
                }
            }
            RadialCdf::Empirical { radii, .. } => empirical_eval(radii, r),
        }
    }

    /// `1 − F(r)`, accurate in the upper tail.
    pub fn survival(&self, r: f64) -> f64 {
        match self {
            RadialCdf::Power { dim, radius } => {
                if r >= *radius {
                    0.0
                } else if r <= 0.0 {
                    1.0
                } else {
                    -((*dim as f64) * (r / radius).ln()).exp_m1()
                }
            }
            RadialCdf::GammaPower { shape, p, scale } => {
                gamma::gamma_q(*shape, (r.max(0.0) / scale).powf(*p) / p)
            }
            _ => 1.0 - self.eval(r),
        }
    }

    /// `ln F(r)`, accurate in the lower tail.
    pub fn ln_cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return f64::NEG_INFINITY;
        }
        match self {
            RadialCdf::Power { dim, radius } => (*dim as f64) * (r / radius).min(1.0).ln(),
            RadialCdf::GammaPower { shape, p, scale } => {
                gamma::ln_gamma_p_at_ln(*shape, (r / scale).ln() * p - p.ln())
            }
            _ => self.eval(r).ln(),
        }
    }

    /// Inverse of [`eval`](Self::eval) on `[0, 1]`.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u <= 0.5 {
            self.quantile_ln(u.ln())
        } else {
            self.quantile_upper(1.0 - u)
        }
    }

    /// The radius with `ln F(r) = ln_u`.
    pub fn quantile_ln(&self, ln_u: f64) -> f64 {
        if ln_u >= 0.0 {
            return self.quantile_upper(0.0);
        }
        match self {
            RadialCdf::Power { dim, radius } => radius * (ln_u / *dim as f64).exp(),
            RadialCdf::GammaPower { shape, p, scale } => {
                // w = (r/scale)^p / p, so r = scale · (p w)^{1/p}
                let ln_w = gamma::gamma_p_inv_ln(*shape, ln_u);
                scale * ((p.ln() + ln_w) / p).exp()
            }
            RadialCdf::PointMass { radius } => *radius,
            RadialCdf::Empirical { radii, .. } => empirical_quantile(radii, ln_u.exp()),
        }
    }

    /// The radius with `1 − F(r) = s`.
    pub fn quantile_upper(&self, s: f64) -> f64 {
        if s >= 1.0 {
            return 0.0;
        }
        match self {
            RadialCdf::Power { dim, radius } => {
                if s <= 0.0 {
                    *radius
                } else {
                    radius * ((-s).ln_1p() / *dim as f64).exp()
                }
            }
            RadialCdf::GammaPower { shape, p, scale } => {
                if s <= 0.0 {
                    return f64::INFINITY;
                }
                let w = gamma::gamma_q_inv_ln(*shape, s.ln());
                scale * (p * w).powf(1.0 / p)
            }
            RadialCdf::PointMass { radius } => *radius,
            RadialCdf::Empirical { radii, .. } => empirical_quantile(radii, 1.0 - s),
        }
    }
}

fn empirical_end(radii: &[f64]) -> f64 {
    match radii {
        [] => 0.0,
        [only] => 2.0 * only,
        [.., a, b] => b + (b - a).max(f64::EPSILON * b.abs()),
    }
}

fn empirical_eval(radii: &[f64], r: f64) -> f64 {
    let n = radii.len();
    if n == 0 {
        return 1.0;
    }
    let nf = n as f64;
    let end = empirical_end(radii);
    if r >= end {
        return 1.0;
    }
    // Number of order statistics ≤ r.
    let k = radii.partition_point(|&v| v <= r);
    let (r0, f0) = if k == 0 {
        (0.0, 0.0)
    } else {
        (radii[k - 1], (k as f64 - 0.5) / nf)
    };
    let (r1, f1) = if k == n {
        (end, 1.0)
    } else {
        (radii[k], (k as f64 + 0.5) / nf)
    };
    if r1 <= r0 {
        return f1;
    }
    f0 + (f1 - f0) * (r - r0) / (r1 - r0)
}

fn empirical_quantile(radii: &[f64], u: f64) -> f64 {
    let n = radii.len();
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let u = u.clamp(0.0, 1.0);
    // Knot j sits at probability (j − ½)/N for j = 1..=N, with (0,0) and (end,1) around them.
    let pos = u * nf + 0.5;
    let j = pos.floor() as usize;
    let frac = pos - j as f64;
    let at = |j: usize| -> f64 {
        if j == 0 {
            0.0
        } else if j > n {
            empirical_end(radii)
        } else {
            radii[j - 1]
        }
    };
    if j == 0 {
        // between (0,0) and (r_1, ½/N)
        return radii[0] * (u * nf / 0.5).min(1.0);
    }
    if j >= n {
        let tail = (u - (nf - 0.5) / nf) / (0.5 / nf);
        return at(n) + (at(n + 1) - at(n)) * tail.clamp(0.0, 1.0);
    }
    at(j) + (at(j + 1) - at(j)) * frac
}

fn scale_ratio(norm: &NormSpec, body: &NormSpec) -> f64 {
    norm.scale() / body.scale()
}

/// Radial law of `norm` under `measure`, using the analytic catalog when the
/// pair is compatible and an empirical law from a fresh sample otherwise.
pub fn radial_cdf(measure: &MeasureSpec, norm: &NormSpec) -> Result<RadialCdf> {
    radial_cdf_with(
        measure,
        norm,
        DEFAULT_EMPIRICAL_COUNT,
        rng::derive_seed(0, "radial-cdf"),
    )
}

/// As [`radial_cdf`], with explicit size and seed for the empirical fallback.
pub fn radial_cdf_with(
    measure: &MeasureSpec,
    norm: &NormSpec,
    count: usize,
    seed: u64,
) -> Result<RadialCdf> {
    let n = measure.dim();
    if norm.dim() != n {
        return Err(crate::error::Error::DimensionMismatch {
            expected: n,
            got: norm.dim(),
        });
    }
    let plain = norm.transform().is_none();
    let analytic = match measure.family() {
        Family::UniformBall(body) if norm.same_shape(body) => Some(RadialCdf::Power {
            dim: n,
            radius: scale_ratio(norm, body),
        }),
        Family::ConeSurface(body) if norm.same_shape(body) => Some(RadialCdf::PointMass {
            radius: scale_ratio(norm, body),
        }),
        Family::HaarEuclideanSphere if plain && norm.exponent().value() == 2.0 => {
            Some(RadialCdf::PointMass {
                radius: norm.scale(),
            })
        }
        Family::GeneralizedGaussianProduct { p } if plain && norm.exponent().value() == *p => {
            Some(RadialCdf::GammaPower {
                shape: n as f64 / p,
                p: *p,
                scale: norm.scale(),
            })
        }
        Family::StandardGaussian if plain && norm.exponent().value() == 2.0 => {
            Some(RadialCdf::GammaPower {
                shape: n as f64 / 2.0,
                p: 2.0,
                scale: norm.scale(),
            })
        }
        _ => None,
    };
    if let Some(cdf) = analytic {
        return Ok(cdf);
    }
    let batch = sample(measure, count, seed)?;
    Ok(RadialCdf::empirical(batch.points().map_rows(|x| norm.norm(x))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::ks_statistic;

    #[test]
    fn catalog_entries() {
        let ball = MeasureSpec::uniform_ball(NormSpec::l1(3)).unwrap();
        let cdf = radial_cdf(&ball, &NormSpec::l1(3)).unwrap();
        assert_eq!(cdf, RadialCdf::Power { dim: 3, radius: 1.0 });
        for r in [0.1, 0.5, 0.9] {
            assert!((cdf.eval(r) - r * r * r).abs() < 1e-15);
        }
        let doubled = radial_cdf(&ball, &NormSpec::l1(3).scaled(2.0).unwrap()).unwrap();
        assert_eq!(doubled, RadialCdf::Power { dim: 3, radius: 2.0 });

        let ggp = MeasureSpec::generalized_gaussian(5, 1.0).unwrap();
        let cdf = radial_cdf(&ggp, &NormSpec::l1(5)).unwrap();
        for x in [0.5, 3.0, 5.0, 12.0] {
            assert!((cdf.eval(x) - gamma::gamma_p(5.0, x)).abs() < 1e-15);
        }
        assert!(matches!(
            radial_cdf(&MeasureSpec::haar_sphere(4).unwrap(), &NormSpec::l2(4)).unwrap(),
            RadialCdf::PointMass { radius } if radius == 1.0
        ));
    }

    #[test]
    fn monte_carlo_agrees_with_gamma_laws() {
        let n = 5;
        let m = MeasureSpec::generalized_gaussian(n, 1.0).unwrap();
        let cdf = radial_cdf(&m, &NormSpec::l1(n)).unwrap();
        let b = sample(&m, 100_000, 21).unwrap();
        let radii = b.points().map_rows(|x| NormSpec::l1(n).norm(x));
        assert!(ks_statistic(&radii, |r| cdf.eval(r)) <= 0.01);

        let n = 7;
        let m = MeasureSpec::generalized_gaussian(n, 2.0).unwrap();
        let cdf = radial_cdf(&m, &NormSpec::l2(n)).unwrap();
        let b = sample(&m, 100_000, 22).unwrap();
        let radii = b.points().map_rows(|x| NormSpec::l2(n).norm(x));
        // chi law: P(Gamma(n/2) ≤ r²/2)
        assert!(ks_statistic(&radii, |r| gamma::gamma_p(n as f64 / 2.0, r * r / 2.0)) <= 0.01);
        assert!(ks_statistic(&radii, |r| cdf.eval(r)) <= 0.01);
    }

    #[test]
    fn quantile_inverts_eval() {
        let laws = [
            RadialCdf::Power { dim: 7, radius: 1.5 },
            RadialCdf::GammaPower { shape: 12.0, p: 1.0, scale: 1.0 },
            RadialCdf::GammaPower { shape: 2.5, p: 2.0, scale: 0.5 },
            RadialCdf::GammaPower { shape: 64.0 / 1.3, p: 1.3, scale: 1.0 },
        ];
        for law in &laws {
            let mut u = 0.001;
            while u <= 0.999 {
                let r = law.quantile(u);
                assert!((law.eval(r) - u).abs() < 1e-9, "{law:?} u={u}");
                u += 0.0037;
            }
            let mut prev = 0.0;
            for k in 0..1000 {
                let f = law.eval(k as f64 * 0.01);
                assert!(f >= prev);
                prev = f;
            }
        }
    }

    #[test]
    fn empirical_law_is_monotone_and_invertible() {
        let law = RadialCdf::empirical(vec![0.3, 0.1, 0.7, 0.5, 0.9, 0.2]);
        assert!(!law.is_analytic());
        let mut prev = 0.0;
        for k in 0..=200 {
            let f = law.eval(k as f64 * 0.01);
            assert!(f >= prev && f <= 1.0);
            prev = f;
        }
        assert!((law.eval(0.1) - 0.5 / 6.0).abs() < 1e-15);
        assert!((law.eval(0.9) - 5.5 / 6.0).abs() < 1e-15);
        let mut u = 0.001;
        while u <= 0.999 {
            assert!((law.eval(law.quantile(u)) - u).abs() < 1e-9, "u={u}");
            u += 0.001;
        }
    }

    #[test]
    fn falls_back_to_empirical() {
        let m = MeasureSpec::uniform_ball(NormSpec::l2(3)).unwrap();
        let law = radial_cdf_with(&m, &NormSpec::l1(3), 5000, 1).unwrap();
        assert!(!law.is_analytic());
        assert_eq!(law, radial_cdf_with(&m, &NormSpec::l1(3), 5000, 1).unwrap());
    }
}
