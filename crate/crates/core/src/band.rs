//! Band products of two anchored factor spaces.
//!
//! Given pointed factors `(X₁, z₁)` and `(X₂, z₂)` and a width `Δ ≥ 0`,
//! the band is the set of pairs `(x₁, x₂)` whose anchor values differ by at
//! most `Δ`, where the anchor is either the radial distance `d_i(x_i, z_i)`
//! or the Busemann value `B_i(x_i)` along the designated ray. The band is
//! metrized by the max metric or by the Euclidean product metric.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{FiniteMetricSpace, MetricError};
use crate::model::{ModelError, ModelPoint, ModelSpace, ModelSpaceSpec};
use crate::model::{DEFAULT_BUSEMANN_STEP, DEFAULT_BUSEMANN_T_MAX};
use crate::rng::SplitMix64;
use crate::space::SpaceMetric;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum BandError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("band membership violated: |h1 - h2| = {gap} exceeds delta = {delta}")]
    MembershipViolation { gap: f64, delta: f64 },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("invalid sample request: {0}")]
    InvalidSample(String),
    #[error("operation requires {0:?} anchors")]
    WrongAnchor(AnchorKind),
    #[error("operation requires the {0:?} product metric")]
    WrongMetric(ProductMetricKind),
}

/// How factor points are anchored: by distance to the basepoint or by
/// Busemann value along the designated ray. Both factors use the same kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorKind {
    Radial,
    Busemann,
}

/// The product metric on the band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductMetricKind {
    Max,
    Euclidean,
}

/// A point of the band: one point per factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub p1: ModelPoint,
    pub p2: ModelPoint,
}

/// Membership verdict with the slack `Δ − |h₁ − h₂|` (negative outside).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Membership {
    pub inside: bool,
    pub slack: f64,
}

/// Serializable band description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandSpec {
    pub factor1: ModelSpaceSpec,
    pub factor2: ModelSpaceSpec,
    pub delta: f64,
    pub anchor: AnchorKind,
    pub metric: ProductMetricKind,
    #[serde(default = "default_t_max")]
    pub busemann_t_max: f64,
    #[serde(default = "default_step")]
    pub busemann_step: f64,
}

fn default_t_max() -> f64 {
    DEFAULT_BUSEMANN_T_MAX
}

fn default_step() -> f64 {
    DEFAULT_BUSEMANN_STEP
}

/// The band product `Y_Δ ⊂ X₁ × X₂`.
#[derive(Debug, Clone)]
pub struct BandSpace {
    factor1: ModelSpace,
    factor2: ModelSpace,
    delta: f64,
    anchor: AnchorKind,
    metric: ProductMetricKind,
    busemann_t_max: f64,
    busemann_step: f64,
}

impl BandSpace {
    pub fn new(
        factor1: ModelSpace,
        factor2: ModelSpace,
        delta: f64,
        anchor: AnchorKind,
        metric: ProductMetricKind,
    ) -> Result<Self, BandError> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(BandError::InvalidSample(format!(
                "delta must be a nonnegative real, got {delta}"
            )));
        }
        Ok(Self {
            factor1,
            factor2,
            delta,
            anchor,
            metric,
            busemann_t_max: DEFAULT_BUSEMANN_T_MAX,
            busemann_step: DEFAULT_BUSEMANN_STEP,
        })
    }

    pub fn from_spec(spec: &BandSpec) -> Result<Self, BandError> {
        let mut band = Self::new(
            ModelSpace::from_spec(&spec.factor1)?,
            ModelSpace::from_spec(&spec.factor2)?,
            spec.delta,
            spec.anchor,
            spec.metric,
        )?;
        band.busemann_t_max = spec.busemann_t_max;
        band.busemann_step = spec.busemann_step;
        Ok(band)
    }

    pub fn factor(&self, index: usize) -> &ModelSpace {
        match index {
            1 => &self.factor1,
            2 => &self.factor2,
            _ => panic!("band factors are indexed 1 and 2"),
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn anchor(&self) -> AnchorKind {
        self.anchor
    }

    pub fn metric(&self) -> ProductMetricKind {
        self.metric
    }

    pub fn busemann_params(&self) -> (f64, f64) {
        (self.busemann_t_max, self.busemann_step)
    }

    /// The distinguished base pair: `(z₁, z₂)` for radial anchors,
    /// `(γ₁(0), γ₂(0))` for Busemann anchors (the same points here, since
    /// rays start at the basepoints).
    pub fn base_pair(&self) -> BandPoint {
        BandPoint {
            p1: self.factor1.basepoint(),
            p2: self.factor2.basepoint(),
        }
    }

    /// Anchor value of a factor point. Busemann anchors use the closed
    /// form; it agrees with the truncated grid evaluation to within the
    /// membership tolerance for every point this crate constructs.
    pub fn anchor_value(&self, factor: usize, p: &ModelPoint) -> Result<f64, BandError> {
        let space = self.factor(factor);
        Ok(match self.anchor {
            AnchorKind::Radial => space.model_distance(p, &space.basepoint())?,
            AnchorKind::Busemann => space.busemann_exact(p)?,
        })
    }

    /// Whether `(p1, p2)` lies in the band, with the signed slack.
    pub fn band_membership(&self, p1: &ModelPoint, p2: &ModelPoint) -> Result<Membership, BandError> {
        let h1 = self.anchor_value(1, p1)?;
        let h2 = self.anchor_value(2, p2)?;
        let gap = (h1 - h2).abs();
        Ok(Membership {
            inside: gap <= self.delta + 1e-9,
            slack: self.delta - gap,
        })
    }

    fn require_member(&self, p: &BandPoint) -> Result<(), BandError> {
        let m = self.band_membership(&p.p1, &p.p2)?;
        if m.inside {
            Ok(())
        } else {
            Err(BandError::MembershipViolation {
                gap: self.delta - m.slack,
                delta: self.delta,
            })
        }
    }

    /// Product distance between two band points (max or Euclidean).
    /// Rejects points that fail the band constraint beyond tolerance.
    pub fn product_distance(&self, p: &BandPoint, q: &BandPoint) -> Result<f64, BandError> {
        self.require_member(p)?;
        self.require_member(q)?;
        self.product_distance_unchecked(p, q)
    }

    /// Product distance without the membership gate; used by inner loops
    /// that already validated their points.
    pub fn product_distance_unchecked(&self, p: &BandPoint, q: &BandPoint) -> Result<f64, BandError> {
        let d1 = self.factor1.model_distance(&p.p1, &q.p1)?;
        let d2 = self.factor2.model_distance(&p.p2, &q.p2)?;
        Ok(match self.metric {
            ProductMetricKind::Max => d1.max(d2),
            ProductMetricKind::Euclidean => d1.hypot(d2),
        })
    }

    /// Factor distances `(d₁, d₂)` of a pair of band points.
    pub fn factor_distances(&self, p: &BandPoint, q: &BandPoint) -> Result<(f64, f64), BandError> {
        Ok((
            self.factor1.model_distance(&p.p1, &q.p1)?,
            self.factor2.model_distance(&p.p2, &q.p2)?,
        ))
    }

    /// Draw `n` band points, deterministically in `seed`. Point 0 is the
    /// base pair. Radial anchors jitter the two factor radii independently
    /// within `Δ/2` of a common target so membership holds by
    /// construction; Busemann anchors place factor points on horospheres
    /// at jittered common levels.
    pub fn sample_band(
        &self,
        n: usize,
        radius_cap: f64,
        seed: u64,
    ) -> Result<Vec<BandPoint>, BandError> {
        if n < 1 {
            return Err(BandError::InvalidSample("need n >= 1 points".into()));
        }
        if radius_cap <= 0.0 || radius_cap.is_nan() {
            return Err(BandError::InvalidSample(format!(
                "radius cap must be positive, got {radius_cap}"
            )));
        }
        let mut rng = SplitMix64::new(seed);
        let mut points = vec![self.base_pair()];
        match self.anchor {
            AnchorKind::Radial => {
                for _ in 1..n {
                    let r = rng.next_range(0.0, radius_cap);
                    let lo = (r - self.delta / 2.0).max(0.0);
                    let hi = r + self.delta / 2.0;
                    let r1 = rng.next_range(lo, hi);
                    let r2 = rng.next_range(lo, hi);
                    let s1 = rng.next_u64();
                    let s2 = rng.next_u64();
                    points.push(BandPoint {
                        p1: self.factor1.radial_point(r1, s1)?,
                        p2: self.factor2.radial_point(r2, s2)?,
                    });
                }
            }
            AnchorKind::Busemann => {
                let (lo, hi) = self.level_range(radius_cap);
                for _ in 1..n {
                    let level = rng.next_range(lo, hi);
                    let l1 = level + rng.next_range(-self.delta / 2.0, self.delta / 2.0);
                    let l2 = level + rng.next_range(-self.delta / 2.0, self.delta / 2.0);
                    let lat1 = rng.next_range(-radius_cap / 2.0, radius_cap / 2.0);
                    let lat2 = rng.next_range(-radius_cap / 2.0, radius_cap / 2.0);
                    points.push(BandPoint {
                        p1: self.factor1.horosphere_point(l1, lat1, &mut rng)?,
                        p2: self.factor2.horosphere_point(l2, lat2, &mut rng)?,
                    });
                }
            }
        }
        Ok(points)
    }

    /// Level interval every jittered draw can realize in both factors.
    pub fn level_range(&self, radius_cap: f64) -> (f64, f64) {
        let factor_range = |space: &ModelSpace| -> (f64, f64) {
            match space.as_tree() {
                Some(tree) => (-0.9 * tree.ray_length(), 0.0),
                None => (-radius_cap / 2.0, radius_cap / 2.0),
            }
        };
        let (lo1, hi1) = factor_range(&self.factor1);
        let (lo2, hi2) = factor_range(&self.factor2);
        let lo = lo1.max(lo2) + self.delta / 2.0;
        let hi = (hi1.min(hi2) - self.delta / 2.0).max(lo);
        (lo.min(0.0), hi.max(lo.min(0.0)))
    }

    /// Materialize band points as a finite metric space under the product
    /// metric, base at index 0.
    pub fn materialize(&self, points: &[BandPoint]) -> Result<FiniteMetricSpace, BandError> {
        for p in points {
            self.require_member(p)?;
        }
        let n = points.len();
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = self.product_distance_unchecked(&points[i], &points[j])?;
                rows[i][j] = d;
                rows[j][i] = d;
            }
        }
        Ok(FiniteMetricSpace::validate_metric(&rows)?)
    }

    /// Raw four-point defect of an explicit quadruple: the largest pairing
    /// sum minus the better of the other two (twice the δ-unit defect).
    pub fn four_point_defect(&self, pts: &[BandPoint; 4]) -> Result<f64, BandError> {
        let d = |a: usize, b: usize| self.product_distance_unchecked(&pts[a], &pts[b]);
        let s1 = d(0, 1)? + d(2, 3)?;
        let s2 = d(0, 2)? + d(1, 3)?;
        let s3 = d(0, 3)? + d(1, 2)?;
        let mut sums = [s1, s2, s3];
        sums.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok((sums[0] - sums[1]).max(0.0))
    }

    /// The divergence quadruple for a Busemann-anchored band over two
    /// half-plane factors: `y` and `z` sit on the level-0 horocycle at
    /// hyperbolic distance `d1` apart (identical in both factors), `x` is
    /// their geodesic midpoint, and `w` mixes the factors (`w₁ = y₁`,
    /// `w₂ = z₂`). All four lie in `Y₀`. Under the Euclidean product
    /// metric the quadruple defect grows like `(√2 − 1)·d1`; under the max
    /// metric it stays bounded.
    pub fn counterexample_family(&self, d1: f64) -> Result<[BandPoint; 4], BandError> {
        if self.anchor != AnchorKind::Busemann {
            return Err(BandError::WrongAnchor(AnchorKind::Busemann));
        }
        if self.factor1.is_tree() || self.factor2.is_tree() {
            return Err(BandError::InvalidSample(
                "the divergence family needs two half-plane factors".into(),
            ));
        }
        if d1 < 0.0 || d1.is_nan() {
            return Err(BandError::InvalidSample(format!(
                "factor distance must be nonnegative, got {d1}"
            )));
        }
        // Solve d((−s,1),(s,1)) = acosh(1 + 2s²) = d1 for s by bisection.
        // d1 = 0 degenerates to four coinciding points.
        let s = if d1 == 0.0 {
            0.0
        } else {
            let dist_at = |s: f64| (1.0 + 2.0 * s * s).acosh();
            let mut lo = 0.0f64;
            let mut hi = 1.0f64;
            while dist_at(hi) < d1 {
                hi *= 2.0;
            }
            while hi - lo > 1e-12 * hi.max(1.0) {
                let mid = 0.5 * (lo + hi);
                if dist_at(mid) < d1 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let apex_height = (1.0 + s * s).sqrt();

        let place = |factor: &ModelSpace, ms: f64, height: f64| -> Result<ModelPoint, BandError> {
            // Positions relative to the factor basepoint: the level-0
            // horocycle is y = z.y, and lateral offsets scale with z.y.
            match factor.basepoint() {
                ModelPoint::H2(base) => {
                    let x = base.x() + base.y() * ms;
                    let y = base.y() * height;
                    Ok(ModelPoint::H2(crate::model::h2::H2Point::new(x, y)?))
                }
                ModelPoint::Tree(_) => unreachable!("tree factors rejected above"),
            }
        };

        let x = BandPoint {
            p1: place(&self.factor1, 0.0, apex_height)?,
            p2: place(&self.factor2, 0.0, apex_height)?,
        };
        let y = BandPoint {
            p1: place(&self.factor1, -s, 1.0)?,
            p2: place(&self.factor2, -s, 1.0)?,
        };
        let z = BandPoint {
            p1: place(&self.factor1, s, 1.0)?,
            p2: place(&self.factor2, s, 1.0)?,
        };
        let w = BandPoint {
            p1: y.p1,
            p2: z.p2,
        };
        Ok([x, y, z, w])
    }
}

impl SpaceMetric for BandSpace {
    type Point = BandPoint;
    type Error = BandError;

    fn distance(&self, a: &BandPoint, b: &BandPoint) -> Result<f64, BandError> {
        self.product_distance_unchecked(a, b)
    }
}
