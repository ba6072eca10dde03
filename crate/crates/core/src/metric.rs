//! Finite metric spaces and their hyperbolicity functionals.
//!
//! A [`FiniteMetricSpace`] is a validated symmetric distance matrix with a
//! designated basepoint. On top of it live the Gromov product, the triple
//! decomposition, and the two hyperbolicity constants:
//!
//! - [`FiniteMetricSpace::four_point_delta`]: the least `δ` such that every
//!   quadruple satisfies
//!   `d(x,y) + d(z,w) ≤ max{d(x,z)+d(y,w), d(x,w)+d(y,z)} + 2δ`.
//! - [`FiniteMetricSpace::three_point_delta`]: the least `δ̃` for the same
//!   condition with the fourth point pinned to a base.
//!
//! Enumeration iterates the three pairings of each unordered 4-subset once
//! (the defect is pairing-symmetric, an 8× reduction over ordered
//! quadruples) and splits the outer index across rayon workers; ties are
//! broken toward the lexicographically smallest witness so the result does
//! not depend on the schedule.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::space::SpaceMetric;

/// Absolute tolerance for metric-axiom and identity checks.
pub const METRIC_TOLERANCE: f64 = 1e-9;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum MetricError {
    #[error("distance matrix is empty")]
    EmptyMatrix,
    #[error("matrix is not square: row {row} has {got} entries, expected {expected}")]
    NotSquare {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("negative distance at ({0}, {1})")]
    NegativeDistance(usize, usize),
    #[error("matrix is asymmetric at ({0}, {1})")]
    AsymmetricMatrix(usize, usize),
    #[error("nonzero diagonal at ({0}, {0})")]
    NonzeroDiagonal(usize),
    #[error("triangle inequality violated: d({0},{2}) > d({0},{1}) + d({1},{2})")]
    TriangleViolation(usize, usize, usize),
    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("selection of indices is empty")]
    EmptySelection,
    #[error("matrix parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// A finite metric space: `n` labeled points, a validated symmetric
/// distance matrix, and a designated basepoint.
#[derive(Debug, Clone, Serialize)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    base: usize,
    dist: Vec<f64>,
    n: usize,
}

/// The unique nonnegative `(a, b, c)` with `d(x,y) = a+b`, `d(x,z) = a+c`,
/// `d(y,z) = b+c`; equal to the three Gromov products of the triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GromovTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Index tuple achieving the maximal hyperbolicity defect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Witness {
    Quadruple([usize; 4]),
    TripleWithBase { triple: [usize; 3], base: usize },
}

/// A hyperbolicity constant together with the quadruple (or triple + base)
/// that achieves it. Recomputing the defect of the witness reproduces
/// `delta` exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub delta: f64,
    pub witness: Witness,
}

impl DeltaReport {
    /// Re-evaluate the defect of the stored witness on `space`.
    pub fn recompute(&self, space: &FiniteMetricSpace) -> f64 {
        match self.witness {
            Witness::Quadruple(q) => space.quadruple_defect(q),
            Witness::TripleWithBase { triple, base } => {
                space.quadruple_defect([triple[0], triple[1], triple[2], base])
            }
        }
    }
}

impl FiniteMetricSpace {
    /// Validate a square matrix of distances and wrap it as a metric space
    /// with base 0 and generated labels.
    ///
    /// Checks run in a fixed order and report the first violated axiom:
    /// squareness, diagonal, nonnegativity, symmetry, triangle inequality
    /// (within [`METRIC_TOLERANCE`]).
    #[allow(clippy::needless_range_loop)] // indices name the offending entries
    pub fn validate_metric(rows: &[Vec<f64>]) -> Result<Self, MetricError> {
        let n = rows.len();
        if n == 0 {
            return Err(MetricError::EmptyMatrix);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::NotSquare {
                    row: i,
                    got: row.len(),
                    expected: n,
                });
            }
        }
        for i in 0..n {
            if rows[i][i].abs() > METRIC_TOLERANCE {
                return Err(MetricError::NonzeroDiagonal(i));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let d = rows[i][j];
                if !d.is_finite() || d < -METRIC_TOLERANCE || (i != j && d < 0.0) {
                    return Err(MetricError::NegativeDistance(i, j));
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (rows[i][j] - rows[j][i]).abs() > METRIC_TOLERANCE {
                    return Err(MetricError::AsymmetricMatrix(i, j));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if rows[i][j] > rows[i][k] + rows[k][j] + METRIC_TOLERANCE {
                        return Err(MetricError::TriangleViolation(i, k, j));
                    }
                }
            }
        }
        let mut dist = Vec::with_capacity(n * n);
        for row in rows {
            dist.extend_from_slice(row);
        }
        Ok(Self {
            labels: (0..n).map(|i| format!("p{i}")).collect(),
            base: 0,
            dist,
            n,
        })
    }

    /// Same as [`validate_metric`](Self::validate_metric) with explicit
    /// labels and basepoint.
    pub fn with_labels_and_base(
        rows: &[Vec<f64>],
        labels: Vec<String>,
        base: usize,
    ) -> Result<Self, MetricError> {
        let mut space = Self::validate_metric(rows)?;
        if labels.len() == space.n {
            space.labels = labels;
        }
        space.set_base(base)?;
        Ok(space)
    }

    pub fn set_base(&mut self, base: usize) -> Result<(), MetricError> {
        if base >= self.n {
            return Err(MetricError::IndexOutOfRange {
                index: base,
                len: self.n,
            });
        }
        self.base = base;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Distance between points `i` and `j`; panics on out-of-range indices.
    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    fn check_index(&self, i: usize) -> Result<(), MetricError> {
        if i >= self.n {
            Err(MetricError::IndexOutOfRange {
                index: i,
                len: self.n,
            })
        } else {
            Ok(())
        }
    }

    /// Gromov product `(y·z)_x = ½[d(y,x) + d(z,x) − d(y,z)]`.
    pub fn gromov_product(&self, y: usize, z: usize, x: usize) -> Result<f64, MetricError> {
        self.check_index(y)?;
        self.check_index(z)?;
        self.check_index(x)?;
        Ok(0.5 * (self.d(y, x) + self.d(z, x) - self.d(y, z)))
    }

    /// The decomposition `a = (y·z)_x`, `b = (x·z)_y`, `c = (x·y)_z`.
    pub fn triple_decomposition(
        &self,
        x: usize,
        y: usize,
        z: usize,
    ) -> Result<GromovTriple, MetricError> {
        Ok(GromovTriple {
            a: self.gromov_product(y, z, x)?,
            b: self.gromov_product(x, z, y)?,
            c: self.gromov_product(x, y, z)?,
        })
    }

    /// Defect of one quadruple in δ units: half the gap between the largest
    /// pairing sum and the larger of the other two, clamped at zero.
    /// Repeated indices are allowed and always give zero.
    pub fn quadruple_defect(&self, [i, j, k, l]: [usize; 4]) -> f64 {
        let s1 = self.d(i, j) + self.d(k, l);
        let s2 = self.d(i, k) + self.d(j, l);
        let s3 = self.d(i, l) + self.d(j, k);
        defect_of_pairings(s1, s2, s3)
    }

    /// Least `δ` making the four-point condition hold on this space, with a
    /// deterministic witness (lexicographically smallest index tuple).
    pub fn four_point_delta(&self) -> DeltaReport {
        let n = self.n;
        let baseline = Candidate {
            delta: 0.0,
            witness: [0, 0, 0, 0],
        };
        let best = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut local = baseline;
                for j in (i + 1)..n {
                    for k in (j + 1)..n {
                        for l in (k + 1)..n {
                            let d = self.quadruple_defect([i, j, k, l]);
                            local = local.better(Candidate {
                                delta: d,
                                witness: [i, j, k, l],
                            });
                        }
                    }
                }
                local
            })
            .reduce(|| baseline, |a, b| a.better(b));
        DeltaReport {
            delta: best.delta,
            witness: Witness::Quadruple(best.witness),
        }
    }

    /// Least `δ̃` such that `d(x,y) + d(w,z) ≤ max{d(x,w)+d(y,z),
    /// d(x,z)+d(y,w)} + 2δ̃` for all `x, y, w` with `z = base`.
    pub fn three_point_delta(&self, base: usize) -> Result<DeltaReport, MetricError> {
        self.check_index(base)?;
        let n = self.n;
        let baseline = Candidate {
            delta: 0.0,
            witness: [0, 0, 0, 0],
        };
        let best = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut local = baseline;
                for j in (i + 1)..n {
                    for k in (j + 1)..n {
                        let d = self.quadruple_defect([i, j, k, base]);
                        local = local.better(Candidate {
                            delta: d,
                            witness: [i, j, k, base],
                        });
                    }
                }
                local
            })
            .reduce(|| baseline, |a, b| a.better(b));
        Ok(DeltaReport {
            delta: best.delta,
            witness: Witness::TripleWithBase {
                triple: [best.witness[0], best.witness[1], best.witness[2]],
                base,
            },
        })
    }

    /// Restriction to a nonempty list of indices, in the given order. Keeps
    /// the original base if selected, otherwise the first selected index
    /// becomes the base.
    pub fn subspace_restrict(&self, indices: &[usize]) -> Result<Self, MetricError> {
        if indices.is_empty() {
            return Err(MetricError::EmptySelection);
        }
        for &i in indices {
            self.check_index(i)?;
        }
        let m = indices.len();
        let mut dist = Vec::with_capacity(m * m);
        for &i in indices {
            for &j in indices {
                dist.push(self.d(i, j));
            }
        }
        let base = indices.iter().position(|&i| i == self.base).unwrap_or(0);
        Ok(Self {
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
            base,
            dist,
            n: m,
        })
    }

    /// Apply a relabeling permutation (new index `i` holds old point
    /// `perm[i]`). Used by the invariance tests.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, MetricError> {
        if perm.len() != self.n {
            return Err(MetricError::EmptySelection);
        }
        self.subspace_restrict(perm)
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    delta: f64,
    witness: [usize; 4],
}

impl Candidate {
    /// Larger defect wins; exact ties keep the lexicographically smaller
    /// witness, which makes parallel reduction schedule-independent.
    fn better(self, other: Candidate) -> Candidate {
        if other.delta > self.delta
            || (other.delta == self.delta && other.witness < self.witness)
        {
            other
        } else {
            self
        }
    }
}

/// δ-unit defect from the three pairing sums of a quadruple.
#[inline]
fn defect_of_pairings(s1: f64, s2: f64, s3: f64) -> f64 {
    let (hi, mid) = if s1 >= s2 {
        if s2 >= s3 {
            (s1, s2)
        } else if s1 >= s3 {
            (s1, s3)
        } else {
            (s3, s1)
        }
    } else if s1 >= s3 {
        (s2, s1)
    } else if s2 >= s3 {
        (s2, s3)
    } else {
        (s3, s2)
    };
    (0.5 * (hi - mid)).max(0.0)
}

impl SpaceMetric for FiniteMetricSpace {
    type Point = usize;
    type Error = MetricError;

    fn distance(&self, a: &usize, b: &usize) -> Result<f64, MetricError> {
        self.check_index(*a)?;
        self.check_index(*b)?;
        Ok(self.d(*a, *b))
    }
}

/// JSON form of a distance matrix file.
#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    #[serde(default)]
    pub labels: Vec<String>,
    #[serde(default)]
    pub base: usize,
    pub dist: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn into_space(self) -> Result<FiniteMetricSpace, MetricError> {
        FiniteMetricSpace::with_labels_and_base(&self.dist, self.labels, self.base)
    }

    pub fn from_space(space: &FiniteMetricSpace) -> Self {
        let n = space.len();
        MatrixFile {
            labels: space.labels().to_vec(),
            base: space.base(),
            dist: (0..n)
                .map(|i| (0..n).map(|j| space.d(i, j)).collect())
                .collect(),
        }
    }
}

/// Parse a CSV matrix: one row per line, decimal reals separated by commas.
pub fn matrix_from_csv(text: &str) -> Result<Vec<Vec<f64>>, MetricError> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line
            .split(',')
            .map(|cell| cell.trim().parse::<f64>())
            .collect();
        match row {
            Ok(r) => rows.push(r),
            Err(e) => {
                return Err(MetricError::Parse {
                    line: lineno + 1,
                    reason: e.to_string(),
                })
            }
        }
    }
    Ok(rows)
}

/// Render a matrix as CSV with full double precision.
pub fn matrix_to_csv(space: &FiniteMetricSpace) -> String {
    let n = space.len();
    let mut out = String::new();
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format!("{}", space.d(i, j))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_space(points: &[f64]) -> FiniteMetricSpace {
        let rows: Vec<Vec<f64>> = points
            .iter()
            .map(|&p| points.iter().map(|&q| (p - q).abs()).collect())
            .collect();
        FiniteMetricSpace::validate_metric(&rows).unwrap()
    }

    /// Independent oracle: shortest-path distances in a tripod with the
    /// given leg lengths, leaves indexed 0..3 and the center 3.
    fn tripod_space(legs: [f64; 3]) -> FiniteMetricSpace {
        let d = |i: usize, j: usize| -> f64 {
            if i == j {
                0.0
            } else if i == 3 {
                legs[j]
            } else if j == 3 {
                legs[i]
            } else {
                legs[i] + legs[j]
            }
        };
        let rows: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| d(i, j)).collect()).collect();
        FiniteMetricSpace::validate_metric(&rows).unwrap()
    }

    fn unit_square() -> FiniteMetricSpace {
        let pts: [(f64, f64); 4] = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let rows: Vec<Vec<f64>> = pts
            .iter()
            .map(|&(x1, y1)| {
                pts.iter()
                    .map(|&(x2, y2)| ((x1 - x2).powi(2) + (y1 - y2).powi(2)).sqrt())
                    .collect()
            })
            .collect();
        FiniteMetricSpace::validate_metric(&rows).unwrap()
    }

    /// Naive ordered-enumeration oracle for the four-point constant.
    fn four_point_oracle(space: &FiniteMetricSpace) -> f64 {
        let n = space.len();
        let mut best = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    for w in 0..n {
                        let lhs = space.d(x, y) + space.d(z, w);
                        let rhs = (space.d(x, z) + space.d(y, w))
                            .max(space.d(x, w) + space.d(y, z));
                        best = best.max(0.5 * (lhs - rhs));
                    }
                }
            }
        }
        best
    }

    /// Naive ordered-triple oracle for the three-point constant.
    fn three_point_oracle(space: &FiniteMetricSpace, base: usize) -> f64 {
        let n = space.len();
        let mut best = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                for w in 0..n {
                    let lhs = space.d(x, y) + space.d(w, base);
                    let rhs = (space.d(x, w) + space.d(y, base))
                        .max(space.d(x, base) + space.d(y, w));
                    best = best.max(0.5 * (lhs - rhs));
                }
            }
        }
        best
    }

    #[test]
    fn validates_path_metric() {
        let space =
            FiniteMetricSpace::validate_metric(&[vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![
                2.0, 1.0, 0.0,
            ]])
            .unwrap();
        assert_eq!(space.len(), 3);
    }

    #[test]
    fn rejects_negative_distance() {
        let err =
            FiniteMetricSpace::validate_metric(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).unwrap_err();
        assert_eq!(err, MetricError::NegativeDistance(0, 1));
    }

    #[test]
    fn rejects_triangle_violation() {
        let err = FiniteMetricSpace::validate_metric(&[
            vec![0.0, 1.0, 3.0],
            vec![1.0, 0.0, 1.0],
            vec![3.0, 1.0, 0.0],
        ])
        .unwrap_err();
        assert_eq!(err, MetricError::TriangleViolation(0, 1, 2));
    }

    #[test]
    fn rejects_asymmetry_and_diagonal() {
        let err = FiniteMetricSpace::validate_metric(&[vec![0.0, 1.0], vec![2.0, 0.0]])
            .unwrap_err();
        assert_eq!(err, MetricError::AsymmetricMatrix(0, 1));
        let err =
            FiniteMetricSpace::validate_metric(&[vec![1.0, 1.0], vec![1.0, 0.0]]).unwrap_err();
        assert_eq!(err, MetricError::NonzeroDiagonal(0));
    }

    #[test]
    fn gromov_product_on_a_line() {
        // points 0, 5, 3: (5·3)_0 = ½(5 + 3 − 2) = 3
        let space = line_space(&[0.0, 5.0, 3.0]);
        assert_eq!(space.gromov_product(1, 2, 0).unwrap(), 3.0);
        // (y·z)_y = 0
        assert_eq!(space.gromov_product(1, 2, 1).unwrap(), 0.0);
    }

    #[test]
    fn gromov_product_on_a_tripod() {
        // legs 2,3,4 from the center; (B·C)_A = leg of A = 2
        let space = tripod_space([2.0, 3.0, 4.0]);
        assert_eq!(space.gromov_product(1, 2, 0).unwrap(), 2.0);
    }

    #[test]
    fn triple_decomposition_cases() {
        let line = line_space(&[0.0, 5.0, 3.0]);
        let t = line.triple_decomposition(0, 1, 2).unwrap();
        assert_eq!((t.a, t.b, t.c), (3.0, 2.0, 0.0));

        let eq = FiniteMetricSpace::validate_metric(&[
            vec![0.0, 2.0, 2.0],
            vec![2.0, 0.0, 2.0],
            vec![2.0, 2.0, 0.0],
        ])
        .unwrap();
        let t = eq.triple_decomposition(0, 1, 2).unwrap();
        assert_eq!((t.a, t.b, t.c), (1.0, 1.0, 1.0));

        let tripod = tripod_space([2.0, 3.0, 4.0]);
        let t = tripod.triple_decomposition(0, 1, 2).unwrap();
        assert_eq!((t.a, t.b, t.c), (2.0, 3.0, 4.0));
    }

    #[test]
    fn triple_decomposition_sum_identities() {
        let space = unit_square();
        let t = space.triple_decomposition(0, 1, 2).unwrap();
        assert!((t.a + t.b - space.d(0, 1)).abs() < 1e-12);
        assert!((t.a + t.c - space.d(0, 2)).abs() < 1e-12);
        assert!((t.b + t.c - space.d(1, 2)).abs() < 1e-12);
    }

    #[test]
    fn small_spaces_have_zero_delta() {
        let space = line_space(&[0.0, 5.0, 3.0]);
        let report = space.four_point_delta();
        assert_eq!(report.delta, 0.0);
        assert_eq!(report.recompute(&space), 0.0);
    }

    #[test]
    fn star_tree_has_zero_delta() {
        // K_{1,3} with unit edges: center 3, leaves 0..3
        let space = tripod_space([1.0, 1.0, 1.0]);
        assert_eq!(space.four_point_delta().delta, 0.0);
        assert_eq!(four_point_oracle(&space), 0.0);
    }

    #[test]
    fn unit_square_delta_is_sqrt2_minus_1() {
        let space = unit_square();
        let report = space.four_point_delta();
        let expected = 2.0f64.sqrt() - 1.0;
        assert!((report.delta - expected).abs() < 1e-12);
        assert!((report.delta - four_point_oracle(&space)).abs() < 1e-15);
        assert_eq!(report.witness, Witness::Quadruple([0, 1, 2, 3]));
        assert_eq!(report.recompute(&space), report.delta);
    }

    #[test]
    fn three_point_line_is_zero() {
        let space = line_space(&[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(space.three_point_delta(0).unwrap().delta, 0.0);
    }

    #[test]
    fn three_point_matches_ordered_oracle_on_square() {
        let space = unit_square();
        let report = space.three_point_delta(0).unwrap();
        let oracle = three_point_oracle(&space, 0);
        assert!((report.delta - oracle).abs() < 1e-15);
        assert!(report.delta <= space.four_point_delta().delta + 1e-15);
        assert!(report.delta <= 0.41422);
        assert_eq!(report.recompute(&space), report.delta);
    }

    #[test]
    fn three_point_below_four_point_everywhere() {
        let space = unit_square();
        let four = space.four_point_delta().delta;
        for base in 0..space.len() {
            assert!(space.three_point_delta(base).unwrap().delta <= four + 1e-15);
        }
    }

    #[test]
    fn subspace_restrict_cases() {
        let space = unit_square();
        let one = space.subspace_restrict(&[2]).unwrap();
        assert_eq!(one.four_point_delta().delta, 0.0);
        assert_eq!(one.base(), 0);

        let three = space.subspace_restrict(&[0, 1, 2]).unwrap();
        assert_eq!(three.four_point_delta().delta, 0.0);
        assert_eq!(three.base(), 0);

        let err = space.subspace_restrict(&[]).unwrap_err();
        assert_eq!(err, MetricError::EmptySelection);
        let err = space.subspace_restrict(&[9]).unwrap_err();
        assert!(matches!(err, MetricError::IndexOutOfRange { .. }));
    }

    #[test]
    fn subspace_base_follows_selection() {
        let mut space = unit_square();
        space.set_base(2).unwrap();
        let sub = space.subspace_restrict(&[3, 2, 1]).unwrap();
        assert_eq!(sub.base(), 1);
        let sub = space.subspace_restrict(&[0, 1]).unwrap();
        assert_eq!(sub.base(), 0);
    }

    #[test]
    fn delta_is_schedule_independent() {
        // The reduction is a max with lexicographic tie-breaking, so the
        // worker count must not change the result or the witness.
        let space = unit_square();
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| space.four_point_delta());
        let parallel = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| space.four_point_delta());
        assert_eq!(serial.delta, parallel.delta);
        assert_eq!(serial.witness, parallel.witness);
    }

    #[test]
    fn csv_round_trip() {
        let space = unit_square();
        let csv = matrix_to_csv(&space);
        let rows = matrix_from_csv(&csv).unwrap();
        let back = FiniteMetricSpace::validate_metric(&rows).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(space.d(i, j), back.d(i, j));
            }
        }
    }

    #[test]
    fn matrix_json_round_trip() {
        let space = unit_square();
        let file = MatrixFile::from_space(&space);
        let text = serde_json::to_string(&file).unwrap();
        let parsed: MatrixFile = serde_json::from_str(&text).unwrap();
        let back = parsed.into_space().unwrap();
        assert_eq!(back.len(), 4);
        assert_eq!(back.d(0, 2), space.d(0, 2));
    }
}
