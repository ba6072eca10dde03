//! Traits shared by everything that can measure distances.
//!
//! `FiniteMetricSpace`, `ModelSpace`, and `BandSpace` all implement
//! [`SpaceMetric`], which is what the audits in [`crate::rough`] and the
//! probes in [`crate::boundary`] are written against.

/// A space that can measure the distance between two owned points.
///
/// Implementations may fail on points outside their domain; audits
/// propagate those errors rather than guessing.
pub trait SpaceMetric {
    type Point: Clone;
    type Error: std::error::Error;

    fn distance(&self, a: &Self::Point, b: &Self::Point) -> Result<f64, Self::Error>;

    /// Gromov product `(a·b)_base = ½[d(a,base) + d(b,base) − d(a,b)]`.
    fn gromov_product(
        &self,
        a: &Self::Point,
        b: &Self::Point,
        base: &Self::Point,
    ) -> Result<f64, Self::Error> {
        let da = self.distance(a, base)?;
        let db = self.distance(b, base)?;
        let dab = self.distance(a, b)?;
        Ok(0.5 * (da + db - dab))
    }
}

/// A space whose geodesics can be evaluated exactly at a given arc length.
pub trait GeodesicSpace: SpaceMetric {
    /// The point at arc length `s` from `a` on the geodesic from `a` to `b`,
    /// where `0 ≤ s ≤ d(a, b)`.
    fn geodesic_point(
        &self,
        a: &Self::Point,
        b: &Self::Point,
        s: f64,
    ) -> Result<Self::Point, Self::Error>;
}
