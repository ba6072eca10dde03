//! Rough-isometry audits, rough geodesics, thin triangles, and the
//! almost-geodesic witness construction inside a band.
//!
//! The witness for a max-metric band follows a case ladder: for
//! `t ≤ Δ` the witness is the start point and for `t ≥ d(x,y) − Δ` the end
//! point; otherwise, with factors ordered so the first realizes the max
//! distance, the witness is the pair of factor points at the common anchor
//! value `h₁(x₁) − t` on the geodesics toward the anchor base (radial) or
//! toward the ray's ideal point (Busemann). Parameters past the Gromov
//! product of the major factor mirror the construction from the far end.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::band::{AnchorKind, BandError, BandPoint, BandSpace, ProductMetricKind};
use crate::metric::MetricError;
use crate::model::{ModelError, ModelPoint, ModelSpace};
use crate::space::{GeodesicSpace, SpaceMetric};

const TOL: f64 = 1e-9;

#[derive(Error, Debug)]
pub enum RoughError {
    #[error("need at least {need} samples, got {got}")]
    InsufficientSamples { need: usize, got: usize },
    #[error("triangle side endpoints do not match (gap {gap})")]
    EndpointsMismatch { gap: f64 },
    #[error("parameter {value} outside [{lo}, {hi}]")]
    ParameterOutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("rough path is malformed: {0}")]
    InvalidPath(String),
    #[error("witness construction requires the max product metric")]
    RequiresMaxMetric,
    #[error(transparent)]
    Band(#[from] BandError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// A finite parameterized point sequence with a roughness constant `k`:
/// for all `i, j`, `|d(points[i], points[j]) − |t_i − t_j|| ≤ k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoughPath<P> {
    pub params: Vec<f64>,
    pub points: Vec<P>,
    pub k: f64,
}

impl<P> RoughPath<P> {
    pub fn new(params: Vec<f64>, points: Vec<P>, k: f64) -> Result<Self, RoughError> {
        if params.len() != points.len() {
            return Err(RoughError::InvalidPath(format!(
                "{} params vs {} points",
                params.len(),
                points.len()
            )));
        }
        if params.is_empty() {
            return Err(RoughError::InvalidPath("empty path".into()));
        }
        if params.windows(2).any(|w| w[1] < w[0]) {
            return Err(RoughError::InvalidPath("params must be nondecreasing".into()));
        }
        Ok(Self { params, points, k })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn start(&self) -> &P {
        &self.points[0]
    }

    pub fn end(&self) -> &P {
        self.points.last().unwrap()
    }

    /// Largest gap between consecutive parameters (discretization slack).
    pub fn max_param_gap(&self) -> f64 {
        self.params
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

/// Result of auditing a path: the minimal `k` making the rough-path
/// invariant hold, and the pair of sample indices achieving it.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PathAudit {
    pub k: f64,
    pub worst: (usize, usize),
}

/// Minimal roughness constant of a path under the ambient metric.
pub fn rough_path_audit<S>(space: &S, path: &RoughPath<S::Point>) -> Result<PathAudit, RoughError>
where
    S: SpaceMetric,
    RoughError: From<S::Error>,
{
    if path.len() < 2 {
        return Err(RoughError::InsufficientSamples {
            need: 2,
            got: path.len(),
        });
    }
    let mut k = 0.0f64;
    let mut worst = (0, 0);
    for i in 0..path.len() {
        for j in (i + 1)..path.len() {
            let d = space.distance(&path.points[i], &path.points[j])?;
            let gap = (d - (path.params[j] - path.params[i]).abs()).abs();
            if gap > k {
                k = gap;
                worst = (i, j);
            }
        }
    }
    Ok(PathAudit { k, worst })
}

/// Embedding class of a sampled map, in the sandwich
/// `(1/λ)·d₁(x, x') − k ≤ d₂(f(x), f(x')) ≤ λ·d₁(x, x') + k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingTag {
    Isometric,
    Rough,
    Bilipschitz,
    Quasi,
    None,
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingClass {
    pub lambda: f64,
    pub k: f64,
    pub tag: EmbeddingTag,
    /// Minimal additive constant for the λ = 1 fit.
    pub rough_k: f64,
    /// Smallest grid λ admitting a k = 0 sandwich, when one exists.
    pub bilipschitz_lambda: Option<f64>,
}

/// Classify a sampled map from pairwise distances on `samples.len()`
/// source/image pairs.
///
/// Any finite sample admits both a rough and a bilipschitz description, so
/// classification picks the dimensionally smaller distortion: the λ = 1
/// fit wins when its additive constant is under 5% of the source diameter,
/// otherwise an exact multiplicative fit is preferred.
pub fn embedding_audit<S1, S2>(
    src: &S1,
    dst: &S2,
    samples: &[(S1::Point, S2::Point)],
) -> Result<EmbeddingClass, RoughError>
where
    S1: SpaceMetric,
    S2: SpaceMetric,
    RoughError: From<S1::Error> + From<S2::Error>,
{
    if samples.len() < 2 {
        return Err(RoughError::InsufficientSamples {
            need: 2,
            got: samples.len(),
        });
    }
    let mut dists = Vec::new();
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            let d1 = src.distance(&samples[i].0, &samples[j].0)?;
            let d2 = dst.distance(&samples[i].1, &samples[j].1)?;
            dists.push((d1, d2));
        }
    }
    if dists.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
        return Ok(EmbeddingClass {
            lambda: f64::NAN,
            k: f64::NAN,
            tag: EmbeddingTag::None,
            rough_k: f64::NAN,
            bilipschitz_lambda: Option::None,
        });
    }

    let rough_k = dists
        .iter()
        .map(|(d1, d2)| (d2 - d1).abs())
        .fold(0.0, f64::max);
    let diameter = dists.iter().map(|(d1, _)| *d1).fold(0.0, f64::max);

    let sandwich_k = |lambda: f64| -> f64 {
        dists
            .iter()
            .map(|(d1, d2)| (d2 - lambda * d1).max(d1 / lambda - d2).max(0.0))
            .fold(0.0, f64::max)
    };
    let grid: Vec<f64> = (0..=60).map(|i| 1.0 + 0.05 * i as f64).collect();
    let bilipschitz_lambda = grid.iter().copied().find(|&l| sandwich_k(l) <= TOL);
    let min_k = grid.iter().map(|&l| sandwich_k(l)).fold(f64::INFINITY, f64::min);
    let quasi_lambda = grid
        .iter()
        .copied()
        .find(|&l| sandwich_k(l) <= 1.05 * min_k + TOL)
        .unwrap_or(1.0);

    let class = if rough_k <= TOL {
        EmbeddingClass {
            lambda: 1.0,
            k: 0.0,
            tag: EmbeddingTag::Isometric,
            rough_k,
            bilipschitz_lambda,
        }
    } else if rough_k <= 0.05 * diameter {
        EmbeddingClass {
            lambda: 1.0,
            k: rough_k,
            tag: EmbeddingTag::Rough,
            rough_k,
            bilipschitz_lambda,
        }
    } else if let Some(l) = bilipschitz_lambda {
        EmbeddingClass {
            lambda: l,
            k: 0.0,
            tag: EmbeddingTag::Bilipschitz,
            rough_k,
            bilipschitz_lambda,
        }
    } else {
        EmbeddingClass {
            lambda: quasi_lambda,
            k: sandwich_k(quasi_lambda),
            tag: EmbeddingTag::Quasi,
            rough_k,
            bilipschitz_lambda,
        }
    };
    Ok(class)
}

/// Sample the exact geodesic from `a` to `b` at the given step, with the
/// final parameter pinned to the exact endpoint.
pub fn sample_geodesic<S>(
    space: &S,
    a: &S::Point,
    b: &S::Point,
    step: f64,
) -> Result<RoughPath<S::Point>, RoughError>
where
    S: GeodesicSpace,
    RoughError: From<S::Error>,
{
    if step <= 0.0 || step.is_nan() {
        return Err(RoughError::ParameterOutOfRange {
            value: step,
            lo: f64::MIN_POSITIVE,
            hi: f64::INFINITY,
        });
    }
    let total = space.distance(a, b)?;
    let mut params: Vec<f64> = (0..)
        .map(|i| i as f64 * step)
        .take_while(|t| *t < total)
        .collect();
    params.push(total);
    let mut points = Vec::with_capacity(params.len());
    for &t in &params {
        points.push(space.geodesic_point(a, b, t)?);
    }
    let mut path = RoughPath::new(params, points, 0.0)?;
    path.points[0] = a.clone();
    *path.points.last_mut().unwrap() = b.clone();
    Ok(path)
}

/// Discretized thinness of a triangle given by three sampled sides
/// `(x→y, x→z, y→z)`: the largest distance from a sampled side point to
/// the nearest sample on the union of the other two sides. Over- or
/// under-estimates the true thinness by at most one sample gap.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Thinness {
    pub delta: f64,
    /// Largest parameter gap among the sides; the stated additive slack.
    pub slack: f64,
}

pub fn thin_triangle_delta<S>(
    space: &S,
    sides: &[RoughPath<S::Point>; 3],
) -> Result<Thinness, RoughError>
where
    S: SpaceMetric,
    RoughError: From<S::Error>,
{
    // Sides (x→y, x→z, y→z): starts of the first two meet at x, the end of
    // the first meets the start of the third at y, ends of the last two at z.
    let checks = [
        (sides[0].start(), sides[1].start()),
        (sides[0].end(), sides[2].start()),
        (sides[1].end(), sides[2].end()),
    ];
    for (a, b) in checks {
        let gap = space.distance(a, b)?;
        if gap > TOL {
            return Err(RoughError::EndpointsMismatch { gap });
        }
    }
    let mut delta = 0.0f64;
    for i in 0..3 {
        let others: Vec<&S::Point> = (0..3)
            .filter(|&j| j != i)
            .flat_map(|j| sides[j].points.iter())
            .collect();
        for p in &sides[i].points {
            let mut nearest = f64::INFINITY;
            for q in &others {
                let d = space.distance(p, q)?;
                if d < nearest {
                    nearest = d;
                }
            }
            if nearest > delta {
                delta = nearest;
            }
        }
    }
    let slack = sides.iter().map(|s| s.max_param_gap()).fold(0.0, f64::max);
    Ok(Thinness { delta, slack })
}

/// One checked inequality of the triangle ledger.
#[derive(Debug, Clone, Serialize)]
pub struct LedgerEntry {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Internal points of a rough-geodesic triangle and the checked bounds
/// relating them: with the decomposition `(a, b, c)` and internal points
/// `z̃ = γ_xy(a)`, `ỹ = γ_xz(a)`, `x̃ = γ_yz(b)`, a `(δ,k)`-thin triangle
/// satisfies `d(z, z̃) ≤ c + 2δ + 4k`, keeps `γ_xy` and `γ_xz` within
/// `4δ + 15k` of each other on `[0, a]`, and its internal points have
/// pairwise distance at most `4δ + 15k`.
#[derive(Debug, Clone, Serialize)]
pub struct TriangleReport<P> {
    pub vertices: [P; 3],
    pub decomposition: (f64, f64, f64),
    pub thinness: f64,
    pub slack: f64,
    pub k: f64,
    pub internal: [P; 3],
    pub checks: Vec<LedgerEntry>,
}

impl<P> TriangleReport<P> {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

pub fn internal_points_report<S>(
    space: &S,
    x: &S::Point,
    y: &S::Point,
    z: &S::Point,
    thinness: &Thinness,
    k: f64,
    grid_step: f64,
) -> Result<TriangleReport<S::Point>, RoughError>
where
    S: GeodesicSpace,
    RoughError: From<S::Error>,
{
    let dxy = space.distance(x, y)?;
    let dxz = space.distance(x, z)?;
    let dyz = space.distance(y, z)?;
    let a = 0.5 * (dxy + dxz - dyz);
    let b = 0.5 * (dxy + dyz - dxz);
    let c = 0.5 * (dxz + dyz - dxy);

    let z_tilde = space.geodesic_point(x, y, a.clamp(0.0, dxy))?;
    let y_tilde = space.geodesic_point(x, z, a.clamp(0.0, dxz))?;
    let x_tilde = space.geodesic_point(y, z, b.clamp(0.0, dyz))?;

    let delta_eff = thinness.delta + thinness.slack;
    let wide = 4.0 * delta_eff + 15.0 * k;
    let mut checks = Vec::new();

    let lhs = space.distance(z, &z_tilde)?;
    checks.push(entry("d(z, z~) <= c + 2*delta + 4k", lhs, c + 2.0 * delta_eff + 4.0 * k));

    let mut sync = 0.0f64;
    let mut t = 0.0;
    while t < a {
        let on_xy = space.geodesic_point(x, y, t)?;
        let on_xz = space.geodesic_point(x, z, t)?;
        sync = sync.max(space.distance(&on_xy, &on_xz)?);
        t += grid_step;
    }
    let on_xy = space.geodesic_point(x, y, a.clamp(0.0, dxy))?;
    let on_xz = space.geodesic_point(x, z, a.clamp(0.0, dxz))?;
    sync = sync.max(space.distance(&on_xy, &on_xz)?);
    checks.push(entry(
        "d(gamma_xy(t), gamma_xz(t)) <= 4*delta + 15k on [0, a]",
        sync,
        wide,
    ));

    let pairwise = space
        .distance(&x_tilde, &y_tilde)?
        .max(space.distance(&x_tilde, &z_tilde)?)
        .max(space.distance(&y_tilde, &z_tilde)?);
    checks.push(entry(
        "pairwise internal distances <= 4*delta + 15k",
        pairwise,
        wide,
    ));

    let reversed = space.geodesic_point(z, x, c.clamp(0.0, dxz))?;
    let gap = space.distance(&y_tilde, &reversed)?;
    checks.push(entry(
        "parameterization reversal gap <= 2k",
        gap,
        2.0 * k,
    ));

    Ok(TriangleReport {
        vertices: [x.clone(), y.clone(), z.clone()],
        decomposition: (a, b, c),
        thinness: thinness.delta,
        slack: thinness.slack,
        k,
        internal: [x_tilde, y_tilde, z_tilde],
        checks,
    })
}

fn entry(name: &str, lhs: f64, rhs: f64) -> LedgerEntry {
    LedgerEntry {
        name: name.to_string(),
        lhs,
        rhs,
        pass: lhs <= rhs + TOL,
    }
}

/// Which branch of the case ladder produced a witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WitnessCase {
    /// `t ≤ Δ`: the witness is the start point.
    AtStart,
    /// `t ≥ d(x,y) − Δ`: the witness is the end point.
    AtEnd,
    /// Constructed from the start point at anchor target `h(x₁) − t`.
    FromStart,
    /// Mirrored: constructed from the end point at target `h(y₁) − (d−t)`.
    FromEnd,
}

#[derive(Debug, Clone, Copy)]
pub struct WitnessPlan {
    pub case: WitnessCase,
    /// Factor index (1 or 2) realizing the max distance.
    pub major: usize,
}

/// The almost-geodesic witness `w` for `t ∈ [0, d_m(x, y)]`; see the
/// module docs for the case ladder. Only defined for max-metric bands.
pub fn almost_geodesic_witness(
    band: &BandSpace,
    x: &BandPoint,
    y: &BandPoint,
    t: f64,
) -> Result<BandPoint, RoughError> {
    almost_geodesic_witness_planned(band, x, y, t).map(|(w, _)| w)
}

/// Witness together with the branch taken, for audits that need to check
/// per-case guarantees.
pub fn almost_geodesic_witness_planned(
    band: &BandSpace,
    x: &BandPoint,
    y: &BandPoint,
    t: f64,
) -> Result<(BandPoint, WitnessPlan), RoughError> {
    if band.metric() != ProductMetricKind::Max {
        return Err(RoughError::RequiresMaxMetric);
    }
    let total = band.product_distance_unchecked(x, y)?;
    if t < -TOL || t > total + TOL {
        return Err(RoughError::ParameterOutOfRange {
            value: t,
            lo: 0.0,
            hi: total,
        });
    }
    let t = t.clamp(0.0, total);
    let (d1, d2) = band.factor_distances(x, y)?;
    let major = if d2 > d1 { 2 } else { 1 };
    if t <= band.delta() {
        return Ok((x.clone(), WitnessPlan { case: WitnessCase::AtStart, major }));
    }
    if t >= total - band.delta() {
        return Ok((y.clone(), WitnessPlan { case: WitnessCase::AtEnd, major }));
    }

    let coord = |p: &BandPoint, i: usize| -> ModelPoint {
        if i == 1 {
            p.p1
        } else {
            p.p2
        }
    };
    let hx = band.anchor_value(major, &coord(x, major))?;
    let hy = band.anchor_value(major, &coord(y, major))?;
    let gromov_a = 0.5 * (total + hx - hy);
    let (endpoint, tt, case) = if t <= gromov_a {
        (x, t, WitnessCase::FromStart)
    } else {
        (y, total - t, WitnessCase::FromEnd)
    };
    let h_end = band.anchor_value(major, &coord(endpoint, major))?;
    let target = h_end - tt;

    let build = |factor: usize| -> Result<ModelPoint, RoughError> {
        let space = band.factor(factor);
        let p = coord(endpoint, factor);
        match band.anchor() {
            AnchorKind::Radial => {
                let base = space.basepoint();
                let reach = space.model_distance(&base, &p)?;
                Ok(space.model_geodesic_point(&base, &p, target.clamp(0.0, reach))?)
            }
            AnchorKind::Busemann => {
                let level = space.busemann_exact(&p)?;
                Ok(space.point_at_level_toward_ideal(&p, target.min(level))?)
            }
        }
    };
    let w = BandPoint {
        p1: build(1)?,
        p2: build(2)?,
    };
    Ok((w, WitnessPlan { case, major }))
}

/// A rough geodesic from `x` to `y` realized by repeated witnesses on the
/// grid `{0, step, 2·step, …, d(x,y)}`; the endpoints are exactly `x` and
/// `y` and `k` is the audited roughness of the result.
pub fn rough_geodesic_between(
    band: &BandSpace,
    x: &BandPoint,
    y: &BandPoint,
    step: f64,
) -> Result<RoughPath<BandPoint>, RoughError> {
    if step <= 0.0 || step.is_nan() {
        return Err(RoughError::ParameterOutOfRange {
            value: step,
            lo: f64::MIN_POSITIVE,
            hi: f64::INFINITY,
        });
    }
    let total = band.product_distance_unchecked(x, y)?;
    let mut params: Vec<f64> = (0..)
        .map(|i| i as f64 * step)
        .take_while(|v| *v < total)
        .collect();
    params.push(total);
    let mut points = Vec::with_capacity(params.len());
    for &t in &params {
        points.push(almost_geodesic_witness(band, x, y, t)?);
    }
    points[0] = x.clone();
    *points.last_mut().unwrap() = y.clone();
    if points.len() < 2 {
        return RoughPath::new(params, points, 0.0);
    }
    let mut path = RoughPath::new(params, points, 0.0)?;
    let audit = rough_path_audit(band, &path)?;
    path.k = audit.k;
    Ok(path)
}

/// Options for [`almost_geodesic_audit`].
#[derive(Debug, Clone, Copy)]
pub struct AuditOptions {
    /// Number of grid values of `t` per pair (including both endpoints).
    pub t_grid: usize,
    /// Sampling step for the factor-thinness measurement.
    pub thinness_step: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            t_grid: 10,
            thinness_step: 0.25,
        }
    }
}

/// Empirical almost-geodesicity audit over a set of band point pairs.
#[derive(Debug, Clone, Serialize)]
pub struct AlmostGeodesicAudit {
    /// Largest witness deviation `max(|d(x,w) − t|, |d(y,w) − (d−t)|)`.
    pub k_emp: f64,
    /// Assembled bound `2k + δ′ + Δ + 4k` with `δ′ = 4·δ̃ + 30k`, `k = 0`,
    /// and `δ̃` the measured factor thinness (plus its sampling slack).
    pub k_theory: f64,
    pub factor_thinness: [f64; 2],
    pub thinness_slack: f64,
    /// Pair index, `t`, and deviation of the worst witness.
    pub worst: (usize, f64, f64),
    /// Largest excess of `d_minor(w, e) − d_major(w, e) − Δ` over the
    /// constructed witnesses: the minor factor never overshoots the major
    /// by more than the band width.
    pub comparison_max_excess: f64,
    /// Smallest membership slack among all witnesses.
    pub min_membership_slack: f64,
    pub witnesses: usize,
}

pub fn almost_geodesic_audit(
    band: &BandSpace,
    pairs: &[(BandPoint, BandPoint)],
    opts: AuditOptions,
) -> Result<AlmostGeodesicAudit, RoughError> {
    if pairs.is_empty() {
        return Err(RoughError::InsufficientSamples { need: 1, got: 0 });
    }
    if opts.t_grid < 2 {
        return Err(RoughError::ParameterOutOfRange {
            value: opts.t_grid as f64,
            lo: 2.0,
            hi: f64::INFINITY,
        });
    }

    struct PairOutcome {
        k_emp: f64,
        worst: (usize, f64, f64),
        comparison_excess: f64,
        slack: f64,
        thinness: [f64; 2],
        witnesses: usize,
    }

    let outcomes: Result<Vec<PairOutcome>, RoughError> = pairs
        .par_iter()
        .enumerate()
        .map(|(idx, (x, y))| {
            let total = band.product_distance_unchecked(x, y)?;
            let mut k_emp = 0.0f64;
            let mut worst = (idx, 0.0, 0.0);
            let mut comparison_excess = f64::NEG_INFINITY;
            let mut slack = f64::INFINITY;
            let mut witnesses = 0usize;
            for g in 0..opts.t_grid {
                let t = if total == 0.0 {
                    0.0
                } else {
                    total * g as f64 / (opts.t_grid - 1) as f64
                };
                let (w, plan) = almost_geodesic_witness_planned(band, x, y, t)?;
                witnesses += 1;
                let m = band.band_membership(&w.p1, &w.p2)?;
                slack = slack.min(m.slack);
                let dxw = band.product_distance_unchecked(x, &w)?;
                let dyw = band.product_distance_unchecked(y, &w)?;
                let dev = (dxw - t).abs().max((dyw - (total - t)).abs());
                if dev > k_emp {
                    k_emp = dev;
                    worst = (idx, t, dev);
                }
                if matches!(plan.case, WitnessCase::FromStart | WitnessCase::FromEnd) {
                    let e = if plan.case == WitnessCase::FromStart { x } else { y };
                    let (f1, f2) = band.factor_distances(&w, e)?;
                    let (dmaj, dmin) = if plan.major == 1 { (f1, f2) } else { (f2, f1) };
                    comparison_excess = comparison_excess.max(dmin - dmaj - band.delta());
                }
            }
            let thinness = [
                factor_thinness(band, 1, x, y, opts.thinness_step)?,
                factor_thinness(band, 2, x, y, opts.thinness_step)?,
            ];
            Ok(PairOutcome {
                k_emp,
                worst,
                comparison_excess,
                slack,
                thinness,
                witnesses,
            })
        })
        .collect();
    let outcomes = outcomes?;

    let mut k_emp = 0.0f64;
    let mut worst = (0usize, 0.0, 0.0);
    let mut comparison_excess = f64::NEG_INFINITY;
    let mut slack = f64::INFINITY;
    let mut thinness = [0.0f64; 2];
    let mut witnesses = 0;
    for o in &outcomes {
        if o.k_emp > k_emp || (o.k_emp == k_emp && o.worst.0 < worst.0 && k_emp > 0.0) {
            k_emp = o.k_emp;
            worst = o.worst;
        }
        comparison_excess = comparison_excess.max(o.comparison_excess);
        slack = slack.min(o.slack);
        thinness[0] = thinness[0].max(o.thinness[0]);
        thinness[1] = thinness[1].max(o.thinness[1]);
        witnesses += o.witnesses;
    }
    let delta_tilde = thinness[0].max(thinness[1]) + opts.thinness_step;
    Ok(AlmostGeodesicAudit {
        k_emp,
        k_theory: 4.0 * delta_tilde + band.delta(),
        factor_thinness: thinness,
        thinness_slack: opts.thinness_step,
        worst,
        comparison_max_excess: comparison_excess,
        min_membership_slack: slack,
        witnesses,
    })
}

/// Discretized thinness of the anchor triangle of one factor: the factor
/// coordinates of the pair plus the anchor vertex (the basepoint for
/// radial anchors, the truncated ray end for Busemann anchors).
fn factor_thinness(
    band: &BandSpace,
    factor: usize,
    x: &BandPoint,
    y: &BandPoint,
    step: f64,
) -> Result<f64, RoughError> {
    let space: &ModelSpace = band.factor(factor);
    let (xf, yf) = if factor == 1 {
        (&x.p1, &y.p1)
    } else {
        (&x.p2, &y.p2)
    };
    let anchor_vertex = match band.anchor() {
        AnchorKind::Radial => space.basepoint(),
        AnchorKind::Busemann => {
            let (t_max, _) = band.busemann_params();
            space.ray(t_max).point_at(space.ray(t_max).t_max)?
        }
    };
    if space.model_distance(xf, yf)? <= TOL {
        return Ok(0.0);
    }
    let sides = [
        sample_geodesic(space, xf, yf, step)?,
        sample_geodesic(space, xf, &anchor_vertex, step)?,
        sample_geodesic(space, yf, &anchor_vertex, step)?,
    ];
    Ok(thin_triangle_delta(space, &sides)?.delta)
}
