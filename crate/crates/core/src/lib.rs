//! Geometry of spaces with curvature bounded below: model spaces, comparison
//! angles, tangent cones, semiconcave functions, barycenters and a
//! Jensen-type inequality checker.

// `!(a < b)` is used on purpose so that NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barycenter;
pub mod campaign;
pub mod comparison;
pub mod cone;
pub mod error;
pub mod finite;
pub mod jensen;
pub mod limits;
mod linalg;
pub mod semiconcave;
pub mod space;

pub use barycenter::{DiscreteMeasure, BarycenterResult};
pub use error::{GeoError, Result};
pub use finite::FiniteMetric;
pub use jensen::{JensenReport, Scenario, Verdict};
pub use semiconcave::{FieldKind, ScalarField, ScalarFn};
pub use space::{Geodesic, Metric, ModelSpace, Point, TangentVector};
