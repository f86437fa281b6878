use std::f64::consts::PI;
use std::fmt;

use crate::Point;

/// Amplitude and petal count of the default flower curve `r(θ) = 1 + 0.2 cos(5θ)`.
pub const FLOWER_AMPLITUDE: f64 = 0.2;
pub const FLOWER_PETALS: f64 = 5.0;

/// Analytic initial shapes.
///
/// Each shape carries a map from (roughly nearby) points in space onto the shape,
/// used both to place refined reference vertices and to interpolate the initial
/// parametrization at Lagrange nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    /// `r(θ) = 1 + 0.2 cos(5θ)`.
    Flower,
    Sphere { radius: f64 },
    Ellipsoid { a: f64, b: f64, c: f64 },
    /// `(√(x²+y²) − major)² + z² = minor²`.
    Torus { major: f64, minor: f64 },
}

impl Shape {
    pub fn unit_circle() -> Self {
        Shape::Circle { radius: 1.0 }
    }

    pub fn unit_sphere() -> Self {
        Shape::Sphere { radius: 1.0 }
    }

    /// Topological dimension: 1 for curves, 2 for surfaces.
    pub fn dim(&self) -> usize {
        match self {
            Shape::Circle { .. } | Shape::Ellipse { .. } | Shape::Flower => 1,
            _ => 2,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim() + 1
    }

    /// Point on a closed curve at parameter `t ∈ [0, 2π)`, counterclockwise.
    ///
    /// Panics for surfaces.
    pub fn curve_point(&self, t: f64) -> Point {
        match *self {
            Shape::Circle { radius } => Point::new(radius * t.cos(), radius * t.sin(), 0.0),
            Shape::Ellipse { a, b } => Point::new(a * t.cos(), b * t.sin(), 0.0),
            Shape::Flower => {
                let r = flower_radius(t);
                Point::new(r * t.cos(), r * t.sin(), 0.0)
            }
            _ => panic!("curve_point called on surface shape {self}"),
        }
    }

    /// Maps `p` onto the shape along the shape's natural parametrization
    /// (polar angle for circle/flower, eccentric anomaly for the ellipse,
    /// radial scaling for sphere/ellipsoid, toroidal angles for the torus).
    pub fn project(&self, p: &Point) -> Point {
        match *self {
            Shape::Circle { .. } | Shape::Flower => self.curve_point(p.y.atan2(p.x)),
            Shape::Ellipse { a, b } => self.curve_point((p.y / b).atan2(p.x / a)),
            Shape::Sphere { radius } => p * (radius / p.norm()),
            Shape::Ellipsoid { a, b, c } => {
                let q = Point::new(p.x / a, p.y / b, p.z / c);
                let q = q / q.norm();
                Point::new(a * q.x, b * q.y, c * q.z)
            }
            Shape::Torus { major, minor } => {
                let phi = p.y.atan2(p.x);
                let rho = p.x.hypot(p.y);
                let psi = p.z.atan2(rho - major);
                torus_point(major, minor, phi, psi)
            }
        }
    }

    /// Implicit-function residual, zero on the shape. Used by tests and diagnostics.
    pub fn residual(&self, p: &Point) -> f64 {
        match *self {
            Shape::Circle { radius } => p.x.hypot(p.y) - radius,
            Shape::Ellipse { a, b } => (p.x / a).powi(2) + (p.y / b).powi(2) - 1.0,
            Shape::Flower => p.x.hypot(p.y) - flower_radius(p.y.atan2(p.x)),
            Shape::Sphere { radius } => p.norm() - radius,
            Shape::Ellipsoid { a, b, c } => {
                (p.x / a).powi(2) + (p.y / b).powi(2) + (p.z / c).powi(2) - 1.0
            }
            Shape::Torus { major, minor } => {
                (p.x.hypot(p.y) - major).powi(2) + p.z * p.z - minor * minor
            }
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Circle { radius } => write!(f, "circle(r={radius})"),
            Shape::Ellipse { a, b } => write!(f, "ellipse(a={a}, b={b})"),
            Shape::Flower => write!(
                f,
                "flower(r=1+{FLOWER_AMPLITUDE}cos({FLOWER_PETALS}θ))"
            ),
            Shape::Sphere { radius } => write!(f, "sphere(r={radius})"),
            Shape::Ellipsoid { a, b, c } => write!(f, "ellipsoid(a={a}, b={b}, c={c})"),
            Shape::Torus { major, minor } => write!(f, "torus(R={major}, r={minor})"),
        }
    }
}

fn flower_radius(theta: f64) -> f64 {
    1.0 + FLOWER_AMPLITUDE * (FLOWER_PETALS * theta).cos()
}

pub(crate) fn torus_point(major: f64, minor: f64, phi: f64, psi: f64) -> Point {
    let rho = major + minor * psi.cos();
    Point::new(rho * phi.cos(), rho * phi.sin(), minor * psi.sin())
}

/// Equally spaced curve parameters `2πk/n`.
pub(crate) fn uniform_angles(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| 2.0 * PI * k as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projections_land_on_shape() {
        let shapes = [
            Shape::unit_circle(),
            Shape::Ellipse { a: 2.0, b: 1.0 },
            Shape::Flower,
            Shape::unit_sphere(),
            Shape::Ellipsoid { a: 2.0, b: 1.0, c: 1.0 },
            Shape::Torus { major: 2.0, minor: 1.0 },
        ];
        let probes = [
            Point::new(0.3, 0.7, 0.2),
            Point::new(-1.1, 0.4, -0.5),
            Point::new(2.5, -0.1, 0.9),
        ];
        for shape in shapes {
            for p in &probes {
                let mut p = *p;
                if shape.dim() == 1 {
                    p.z = 0.0;
                }
                let q = shape.project(&p);
                assert!(shape.residual(&q).abs() < 1e-14, "{shape} {q:?}");
                // projection is idempotent
                assert!((shape.project(&q) - q).norm() < 1e-14);
            }
        }
    }
}
