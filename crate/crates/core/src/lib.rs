//! Certified constructions on finite approximants of compact subsets of the
//! unit cube.
//!
//! * [`geom`]: distances, the Hausdorff metric, similarity signatures,
//!   affine dependence and angles, exact over the rationals.
//! * [`dyadic`]: level-n dyadic cubes and box-counting profiles.
//! * [`avoidance`]: one-point-per-cube configurations that avoid similar
//!   copies of a triangle, affine dependencies or a fixed angle, with
//!   checkable margin certificates.
//! * [`category`]: nowhere-dense set schemes and the avoidance construction
//!   for the hitting set `{E : E meets A}`.
//! * [`arithmetic`]: sumsets, product sets, polynomial images and covering
//!   bounds.
//! * [`funcspace`]: piecewise-linear functions under the sup metric.

pub mod arithmetic;
pub mod avoidance;
pub mod category;
pub mod dyadic;
pub mod error;
pub mod funcspace;
pub mod geom;
pub mod lattice;
pub mod point;
pub mod scalar;

pub use error::{Error, Result};
pub use num_bigint::BigInt;
pub use num_rational::BigRational;
pub use point::{FinitePointSet, Point, PointSetDoc};
pub use scalar::{Backend, Scalar};
