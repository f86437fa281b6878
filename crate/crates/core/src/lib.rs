//! Isoparametric parametric finite element methods for geometric flows.
//!
//! Curves in the plane and closed surfaces in space are represented as degree-`ℓ`
//! Lagrange parametrizations over a fixed flat reference grid. Each time step
//! solves a linear (or, for the volume conserving variant, a Picard-linearised)
//! position/curvature saddle-point system on the current geometry.
//!
//! * [`refmesh`]: flat reference polygons and triangulations.
//! * [`fem`]: Lagrange bases and positive quadrature rules on the reference simplex.
//! * [`geometry`]: the parametrized grid, element frames and geometric functionals.
//! * [`schemes`]: BGN, structure-preserving and Dziuk-type time steppers.
//! * [`metrics`]: errors against exact solutions and the projected distance between grids.

pub mod error;
pub mod fem;
pub mod geometry;
pub mod metrics;
pub mod refmesh;
pub mod schemes;

pub use error::{Error, Result};

/// Points are always stored in three components; planar curves keep `z = 0`.
pub type Point = nalgebra::Vector3<f64>;
