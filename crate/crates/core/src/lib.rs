//! Hyperbolicity constants, exact model geometries, and band products.
//!
//! The crate is organized around a small set of building blocks:
//!
//! - [`metric`]: finite metric spaces given by a distance matrix, with the
//!   four-point and three-point hyperbolicity constants and their witnesses.
//! - [`model`]: exact metric oracles (upper half-plane, weighted metric
//!   trees) with geodesic evaluation, radial sampling, and Busemann
//!   functions along a designated ray.
//! - [`band`]: the band product of two anchored factor spaces under the max
//!   or Euclidean product metric, with samplers and a divergence family for
//!   the Euclidean metric.
//! - [`rough`]: rough-isometry audits, rough-geodesic paths, thin-triangle
//!   measurements, and the almost-geodesic witness construction inside a
//!   band.
//! - [`boundary`]: finite-window probes of convergence to infinity and
//!   sequence equivalence via tail Gromov products.

pub mod band;
pub mod boundary;
pub mod metric;
pub mod model;
pub mod rng;
pub mod rough;
pub mod space;

pub use band::{AnchorKind, BandPoint, BandSpace, ProductMetricKind};
pub use metric::{DeltaReport, FiniteMetricSpace, GromovTriple, Witness};
pub use model::{ModelPoint, ModelSpace, Ray};
pub use rough::RoughPath;
pub use space::SpaceMetric;
