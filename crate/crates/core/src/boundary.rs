//! Finite-window probes of convergence to infinity.
//!
//! A sequence converges to infinity when its pairwise Gromov products at
//! the basepoint grow without bound; two such sequences are equivalent
//! when the cross products do too. Neither limit is computable from finite
//! data, so the probes replace it with a minimum over a tail window and
//! report the window and threshold with every verdict.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::SpaceMetric;

#[derive(Error, Debug)]
pub enum ProbeError {
    #[error("sequences have different lengths: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("window {window} does not fit sequences of length {len} (need 2 <= window <= len)")]
    WindowTooLarge { window: usize, len: usize },
    #[error("sequence is empty")]
    EmptySequence,
    #[error("space error: {0}")]
    Space(String),
}

/// A sequence of points in one ambient space together with the basepoint
/// its Gromov products are taken at.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointSequence<P> {
    pub points: Vec<P>,
    pub base: P,
}

impl<P> PointSequence<P> {
    pub fn new(points: Vec<P>, base: P) -> Result<Self, ProbeError> {
        if points.is_empty() {
            return Err(ProbeError::EmptySequence);
        }
        Ok(Self { points, base })
    }

    /// Probe this sequence against another sharing the same basepoint.
    pub fn probe_against<S>(
        &self,
        space: &S,
        other: &PointSequence<P>,
        window: usize,
        threshold: f64,
    ) -> Result<ClassProbe, ProbeError>
    where
        S: SpaceMetric<Point = P>,
        P: Clone,
    {
        class_probe(
            space,
            &self.points,
            &other.points,
            &self.base,
            window,
            threshold,
        )
    }
}

/// Verdict for one sequence at an explicit window and threshold.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProbeVerdict {
    pub min_tail_product: f64,
    pub converges: bool,
    pub window: usize,
    pub threshold: f64,
}

/// Verdicts for a pair of sequences plus the equivalence flag.
#[derive(Debug, Clone, Serialize)]
pub struct ClassProbe {
    pub first: ProbeVerdict,
    pub second: ProbeVerdict,
    pub cross_min: f64,
    pub equivalent: bool,
}

fn space_err<E: std::error::Error>(e: E) -> ProbeError {
    ProbeError::Space(e.to_string())
}

/// Minimum Gromov product `(x^i · y^j)_base` over the last `window`
/// indices of both sequences.
pub fn tail_gromov_min<S>(
    space: &S,
    seq1: &[S::Point],
    seq2: &[S::Point],
    base: &S::Point,
    window: usize,
) -> Result<f64, ProbeError>
where
    S: SpaceMetric,
{
    if seq1.is_empty() || seq2.is_empty() {
        return Err(ProbeError::EmptySequence);
    }
    if seq1.len() != seq2.len() {
        return Err(ProbeError::LengthMismatch(seq1.len(), seq2.len()));
    }
    if window < 2 || window > seq1.len() {
        return Err(ProbeError::WindowTooLarge {
            window,
            len: seq1.len(),
        });
    }
    let start = seq1.len() - window;
    let mut min = f64::INFINITY;
    for p in &seq1[start..] {
        for q in &seq2[start..] {
            let g = space.gromov_product(p, q, base).map_err(space_err)?;
            if g < min {
                min = g;
            }
        }
    }
    Ok(min)
}

/// Classify two sequences: each converges iff its self tail minimum
/// exceeds the threshold; they are equivalent iff both converge and the
/// cross tail minimum does too.
pub fn class_probe<S>(
    space: &S,
    seq1: &[S::Point],
    seq2: &[S::Point],
    base: &S::Point,
    window: usize,
    threshold: f64,
) -> Result<ClassProbe, ProbeError>
where
    S: SpaceMetric,
{
    let self1 = tail_gromov_min(space, seq1, seq1, base, window)?;
    let self2 = tail_gromov_min(space, seq2, seq2, base, window)?;
    let cross = tail_gromov_min(space, seq1, seq2, base, window)?;
    let first = ProbeVerdict {
        min_tail_product: self1,
        converges: self1 > threshold,
        window,
        threshold,
    };
    let second = ProbeVerdict {
        min_tail_product: self2,
        converges: self2 > threshold,
        window,
        threshold,
    };
    Ok(ClassProbe {
        equivalent: first.converges && second.converges && cross > threshold,
        first,
        second,
        cross_min: cross,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MetricTree, ModelPoint, ModelSpace};

    /// A long path tree rooted in the middle: two opposite rays on a line.
    fn two_ray_line(arm: usize) -> ModelSpace {
        let mut edges = Vec::new();
        // nodes: 0 is the center; 1..=arm go right; arm+1..=2arm go left
        for i in 0..arm {
            let from = if i == 0 { 0 } else { i };
            edges.push((from, i + 1, 1.0));
        }
        for i in 0..arm {
            let from = if i == 0 { 0 } else { arm + i };
            edges.push((from, arm + i + 1, 1.0));
        }
        ModelSpace::tree(MetricTree::new(edges, 0).unwrap())
    }

    fn ray_sequence(space: &ModelSpace, len: usize, spacing: f64) -> Vec<ModelPoint> {
        let ray = space.ray(1e9);
        (0..len)
            .map(|i| ray.point_at(i as f64 * spacing).unwrap())
            .collect()
    }

    #[test]
    fn ray_products_grow_like_the_smaller_parameter() {
        let space = two_ray_line(40);
        let seq = ray_sequence(&space, 30, 1.0);
        let base = space.basepoint();
        let min = tail_gromov_min(&space, &seq, &seq, &base, 5).unwrap();
        assert!(min >= 25.0 - 1e-12, "min = {min}");
    }

    #[test]
    fn opposite_rays_have_zero_products() {
        let space = two_ray_line(30);
        let base = space.basepoint();
        use crate::model::TreePoint::Node;
        let right: Vec<ModelPoint> = (1..=25).map(|i| ModelPoint::Tree(Node(i))).collect();
        let left: Vec<ModelPoint> = (1..=25).map(|i| ModelPoint::Tree(Node(30 + i))).collect();
        let min = tail_gromov_min(&space, &right, &left, &base, 5).unwrap();
        assert!(min.abs() < 1e-12, "min = {min}");
    }

    #[test]
    fn distinct_verticals_plateau_at_a_finite_constant() {
        // Downward vertical rays from (0,1) and (4,1) converge to the
        // distinct boundary points 0 and 4, so their cross products stop
        // growing; a ray against itself keeps growing.
        use crate::model::H2Point;
        let space = ModelSpace::h2(H2Point::new(0.0, 1.0).unwrap());
        let base = space.basepoint();
        let downward = |x: f64, len: usize| -> Vec<ModelPoint> {
            (0..len)
                .map(|i| ModelPoint::H2(H2Point::new(x, (-(i as f64)).exp()).unwrap()))
                .collect()
        };
        let short = tail_gromov_min(&space, &downward(0.0, 15), &downward(4.0, 15), &base, 5)
            .unwrap();
        let long = tail_gromov_min(&space, &downward(0.0, 25), &downward(4.0, 25), &base, 5)
            .unwrap();
        assert!((short - long).abs() < 0.1, "{short} vs {long}");
        assert!(long < 5.0, "plateau value {long}");
        let self_long =
            tail_gromov_min(&space, &downward(0.0, 25), &downward(0.0, 25), &base, 5).unwrap();
        assert!(self_long >= 20.0 - 1e-9);
    }

    #[test]
    fn window_and_length_validation() {
        let space = two_ray_line(10);
        let seq = ray_sequence(&space, 8, 1.0);
        let base = space.basepoint();
        assert!(matches!(
            tail_gromov_min(&space, &seq, &seq[..5], &base, 3),
            Err(ProbeError::LengthMismatch(8, 5))
        ));
        assert!(matches!(
            tail_gromov_min(&space, &seq, &seq, &base, 9),
            Err(ProbeError::WindowTooLarge { .. })
        ));
        assert!(matches!(
            tail_gromov_min(&space, &seq, &seq, &base, 1),
            Err(ProbeError::WindowTooLarge { .. })
        ));
    }

    #[test]
    fn window_growth_never_increases_the_min() {
        let space = two_ray_line(40);
        let seq = ray_sequence(&space, 30, 1.0);
        let base = space.basepoint();
        let small = tail_gromov_min(&space, &seq, &seq, &base, 4).unwrap();
        let large = tail_gromov_min(&space, &seq, &seq, &base, 12).unwrap();
        assert!(large <= small + 1e-12);
    }

    #[test]
    fn ray_vs_itself_and_vs_constant() {
        let space = two_ray_line(40);
        let base = space.basepoint();
        let ray = ray_sequence(&space, 30, 1.0);
        let probe = class_probe(&space, &ray, &ray, &base, 5, 20.0).unwrap();
        assert!(probe.first.converges && probe.second.converges && probe.equivalent);

        let constant: Vec<ModelPoint> = (0..30).map(|_| base).collect();
        let probe = class_probe(&space, &ray, &constant, &base, 5, 20.0).unwrap();
        assert!(probe.first.converges);
        assert!(!probe.second.converges);
        assert!(!probe.equivalent);
    }
}
