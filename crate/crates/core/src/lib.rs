//! Radial graphs of constant hyperbolic mean curvature over domains of the upper hemisphere.
//!
//! Continuous modules are generic over [`scalar::Real`]; the crystalline rearrangement lab is
//! generic over [`scalar::ExactScalar`]. The aliases below fix the usual concrete types.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod axisym;
pub mod barriers;
pub mod dense;
pub mod energy;
pub mod error;
pub mod field;
pub mod geometry;
pub mod mesh;
pub mod rearrange;
pub mod record;
pub mod scalar;
pub mod solver;
pub mod sparse;
pub mod vec3;

pub use error::{Error, Result};

pub use num_rational::BigRational;

pub type Mesh = mesh::SphericalMesh<f64>;
pub type Field = field::ScalarField<f64>;
pub type Exact = geometry::ExactSolution<f64>;
pub type Grid = rearrange::ProductGrid<f64>;
pub type ExactGrid = rearrange::ProductGrid<BigRational>;
pub type Problem1d = axisym::AxisymProblem<f64>;
