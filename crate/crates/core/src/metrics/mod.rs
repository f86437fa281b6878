//! Error measures: distance to exact circles/spheres and the projected distance
//! between two parametrized grids.

mod distance;

pub use distance::{
    closest_point, dist_point_to_grid, l2_projected_distance, projected_distance, project_to_simplex, CenterCloud,
    ClosestPointResult, DistanceNorm, DEFAULT_NEIGHBORS,
};

use crate::fem::QuadratureRule;
use crate::geometry::ParametrizedGrid;
use crate::{Error, Result};

/// Centered circle or sphere of the given radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExactTarget {
    Circle(f64),
    Sphere(f64),
}

impl ExactTarget {
    pub fn radius(&self) -> f64 {
        match *self {
            ExactTarget::Circle(r) | ExactTarget::Sphere(r) => r,
        }
    }

    fn dim(&self) -> usize {
        match self {
            ExactTarget::Circle(_) => 1,
            ExactTarget::Sphere(_) => 2,
        }
    }
}

/// `max | |F(ξ̂)| − r |` over every element and every point of `rule`.
pub fn linf_error_exact(grid: &ParametrizedGrid, target: ExactTarget, rule: &QuadratureRule) -> Result<f64> {
    let r = target.radius();
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidArgument(format!("target radius must be positive, got {r}")));
    }
    if grid.dim() != target.dim() {
        return Err(Error::InvalidArgument("target and grid dimensions differ".into()));
    }
    let mut worst: f64 = 0.0;
    for j in 0..grid.n_elements() {
        for x in rule.points() {
            worst = worst.max((grid.eval(j, *x).norm() - r).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refmesh::{build_polygon, Shape};

    #[test]
    fn inscribed_square() {
        let g = ParametrizedGrid::interpolate_shape(build_polygon(Shape::unit_circle(), 4).unwrap(), 1).unwrap();
        // three Gauss points: the midpoint is one of them
        let e = linf_error_exact(&g, ExactTarget::Circle(1.0), &QuadratureRule::gauss_interval(5)).unwrap();
        assert!((e - (1.0 - 0.5f64.sqrt())).abs() < 1e-14);
        let nodes = linf_error_exact(&g, ExactTarget::Circle(1.0), &QuadratureRule::lumped_interval()).unwrap();
        assert!(nodes < 1e-15);
        assert!(linf_error_exact(&g, ExactTarget::Circle(-1.0), &QuadratureRule::lumped_interval()).is_err());
        assert!(linf_error_exact(&g, ExactTarget::Sphere(1.0), &QuadratureRule::lumped_interval()).is_err());
    }
}
