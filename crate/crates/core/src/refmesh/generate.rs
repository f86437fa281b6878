use std::f64::consts::PI;
use std::path::PathBuf;

use super::shapes::{torus_point, uniform_angles};
use super::{read_grid, ReferenceGrid, Shape};
use crate::{Error, Point, Result};

/// Closed counterclockwise polygon with `n` vertices at equal parameter spacing on
/// the curve.
pub fn build_polygon(shape: Shape, n: usize) -> Result<ReferenceGrid> {
    if shape.dim() != 1 {
        return Err(Error::InvalidArgument(format!("{shape} is not a curve")));
    }
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "a closed polygon needs at least 3 segments, got {n}"
        )));
    }
    let vertices = uniform_angles(n).map(|t| shape.curve_point(t)).collect();
    let elements = (0..n).map(|k| [k, (k + 1) % n, 0]).collect();
    ReferenceGrid::new(1, 2, vertices, elements, Some(shape))
}

/// How to size a generated triangulation.
#[derive(Clone, Debug, PartialEq)]
pub enum TriangulationTarget {
    /// Octahedron refined `k` times (sphere and ellipsoid only): `8·4^k` triangles.
    Refinements(usize),
    /// Structured longitude/latitude (sphere, ellipsoid) or toroidal (torus) grid
    /// with the vertex count closest to `vertices`.
    Counts { elements: usize, vertices: usize },
    File(PathBuf),
}

/// Closed, outward oriented triangulation with vertices on `shape`.
///
/// Count targets that cannot be met exactly fall back to the nearest structured
/// grid; the achieved `(J, K)` is logged.
pub fn build_triangulation(shape: Shape, target: TriangulationTarget) -> Result<ReferenceGrid> {
    if let TriangulationTarget::File(path) = &target {
        let grid = read_grid(path)?;
        if grid.dim() != 2 {
            return Err(Error::InvalidArgument(format!(
                "{} does not contain a triangulation",
                path.display()
            )));
        }
        return Ok(grid);
    }
    if shape.dim() != 2 {
        return Err(Error::InvalidArgument(format!("{shape} is not a surface")));
    }
    let grid = match (shape, target.clone()) {
        (Shape::Sphere { .. } | Shape::Ellipsoid { .. }, TriangulationTarget::Refinements(k)) => {
            let mut g = octahedron(shape)?;
            for _ in 0..k {
                g = g.refine_uniform();
            }
            g
        }
        (Shape::Torus { .. }, TriangulationTarget::Refinements(_)) => {
            return Err(Error::InvalidArgument(
                "octahedron refinement is not available for the torus; use a count target".into(),
            ))
        }
        (Shape::Sphere { .. } | Shape::Ellipsoid { .. }, TriangulationTarget::Counts { elements, vertices }) => {
            let k = requested_vertices(elements, vertices, |j| j / 2 + 2);
            let rings = (((k.saturating_sub(2)) as f64 / 2.0).sqrt().round() as usize).max(1);
            let lon = ((k.saturating_sub(2)) as f64 / rings as f64).round().max(3.0) as usize;
            uv_sphere(shape, lon, rings)?
        }
        (Shape::Torus { .. }, TriangulationTarget::Counts { elements, vertices }) => {
            let k = requested_vertices(elements, vertices, |j| j / 2);
            let minor = ((k as f64 / 3.6).sqrt().round() as usize).max(3);
            let major = (k as f64 / minor as f64).round().max(3.0) as usize;
            torus_grid(shape, major, minor)?
        }
        _ => unreachable!("curve shapes rejected above"),
    };
    if let TriangulationTarget::Counts { elements, vertices } = target {
        if (grid.n_elements(), grid.n_vertices()) != (elements, vertices) {
            log::warn!(
                "requested (J,K)=({elements},{vertices}) for {shape}; built ({},{})",
                grid.n_elements(),
                grid.n_vertices()
            );
        }
    }
    Ok(grid)
}

fn requested_vertices(elements: usize, vertices: usize, from_elements: impl Fn(usize) -> usize) -> usize {
    if vertices > 0 {
        vertices
    } else {
        from_elements(elements)
    }
}

fn octahedron(shape: Shape) -> Result<ReferenceGrid> {
    let unit = [
        Point::new(1.0, 0.0, 0.0),
        Point::new(0.0, 1.0, 0.0),
        Point::new(0.0, 0.0, 1.0),
        Point::new(-1.0, 0.0, 0.0),
        Point::new(0.0, -1.0, 0.0),
        Point::new(0.0, 0.0, -1.0),
    ];
    let vertices = unit.iter().map(|p| shape.project(p)).collect();
    let elements = vec![
        [0, 1, 2],
        [1, 3, 2],
        [3, 4, 2],
        [4, 0, 2],
        [1, 0, 5],
        [3, 1, 5],
        [4, 3, 5],
        [0, 4, 5],
    ];
    ReferenceGrid::new(2, 3, vertices, elements, Some(shape))
}

/// Longitude/latitude grid: two poles plus `rings` latitude circles of `lon` vertices,
/// giving `K = lon·rings + 2` vertices and `J = 2·lon·rings` triangles.
fn uv_sphere(shape: Shape, lon: usize, rings: usize) -> Result<ReferenceGrid> {
    let mut vertices = vec![shape.project(&Point::new(0.0, 0.0, 1.0))];
    for i in 1..=rings {
        let theta = PI * i as f64 / (rings + 1) as f64;
        for phi in uniform_angles(lon) {
            let p = Point::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
            vertices.push(shape.project(&p));
        }
    }
    vertices.push(shape.project(&Point::new(0.0, 0.0, -1.0)));
    let south = vertices.len() - 1;
    let v = |i: usize, k: usize| 1 + (i - 1) * lon + k % lon;
    let mut elements = Vec::with_capacity(2 * lon * rings);
    for k in 0..lon {
        elements.push([0, v(1, k), v(1, k + 1)]);
    }
    for i in 1..rings {
        for k in 0..lon {
            let (a, b, c, d) = (v(i, k), v(i, k + 1), v(i + 1, k), v(i + 1, k + 1));
            elements.push([a, c, d]);
            elements.push([a, d, b]);
        }
    }
    for k in 0..lon {
        elements.push([south, v(rings, k + 1), v(rings, k)]);
    }
    ReferenceGrid::new(2, 3, vertices, elements, Some(shape))
}

/// Periodic `major × minor` grid over the two toroidal angles.
fn torus_grid(shape: Shape, major: usize, minor: usize) -> Result<ReferenceGrid> {
    let Shape::Torus { major: big_r, minor: small_r } = shape else {
        unreachable!()
    };
    let mut vertices = Vec::with_capacity(major * minor);
    for phi in uniform_angles(major) {
        for psi in uniform_angles(minor) {
            vertices.push(torus_point(big_r, small_r, phi, psi));
        }
    }
    let v = |i: usize, k: usize| (i % major) * minor + k % minor;
    let mut elements = Vec::with_capacity(2 * major * minor);
    for i in 0..major {
        for k in 0..minor {
            let (a, b, c, d) = (v(i, k), v(i + 1, k), v(i, k + 1), v(i + 1, k + 1));
            elements.push([a, b, d]);
            elements.push([a, d, c]);
        }
    }
    ReferenceGrid::new(2, 3, vertices, elements, Some(shape))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_square() {
        let g = build_polygon(Shape::unit_circle(), 4).unwrap();
        let expected = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (v, (x, y)) in g.vertices().iter().zip(expected) {
            assert!((v.x - x).abs() < 1e-15 && (v.y - y).abs() < 1e-15);
        }
        assert_eq!(g.n_elements(), 4);
        assert!(build_polygon(Shape::unit_circle(), 2).is_err());
    }

    #[test]
    fn ellipse_and_flower_polygons() {
        let e = build_polygon(Shape::Ellipse { a: 2.0, b: 1.0 }, 128).unwrap();
        assert_eq!(e.n_elements(), 128);
        for v in e.vertices() {
            assert!((v.x * v.x / 4.0 + v.y * v.y - 1.0).abs() < 1e-14);
        }
        let f = build_polygon(Shape::Flower, 128).unwrap();
        assert!(f.signed_enclosed_measure() > 0.0);
        for v in f.vertices() {
            assert!(Shape::Flower.residual(v).abs() < 1e-14);
        }
    }

    #[test]
    fn requested_surface_counts() {
        let e = build_triangulation(
            Shape::Ellipsoid { a: 2.0, b: 1.0, c: 1.0 },
            TriangulationTarget::Counts { elements: 676, vertices: 340 },
        )
        .unwrap();
        assert_eq!((e.n_elements(), e.n_vertices()), (676, 340));
        assert!(e.signed_enclosed_measure() > 0.0);
        let t = build_triangulation(
            Shape::Torus { major: 2.0, minor: 1.0 },
            TriangulationTarget::Counts { elements: 720, vertices: 360 },
        )
        .unwrap();
        assert_eq!((t.n_elements(), t.n_vertices()), (720, 360));
        assert!(t.signed_enclosed_measure() > 0.0);
        let edges = t.edges().len();
        // genus one
        assert_eq!(t.n_vertices() + t.n_elements() - edges, 0);
    }

    #[test]
    fn generated_triangles_face_outward() {
        for g in [
            build_triangulation(Shape::unit_sphere(), TriangulationTarget::Refinements(2)).unwrap(),
            build_triangulation(
                Shape::Ellipsoid { a: 2.0, b: 1.0, c: 1.0 },
                TriangulationTarget::Counts { elements: 0, vertices: 100 },
            )
            .unwrap(),
        ] {
            for j in 0..g.n_elements() {
                let m = g.element_map(j).unwrap();
                let n = m.linear.column(0).cross(&m.linear.column(1));
                let centroid = m.apply([1.0 / 3.0, 1.0 / 3.0]);
                assert!(n.dot(&centroid) > 0.0);
            }
        }
    }

    #[test]
    fn curve_shape_is_not_a_surface() {
        assert!(build_triangulation(Shape::unit_circle(), TriangulationTarget::Refinements(1)).is_err());
        assert!(build_polygon(Shape::unit_sphere(), 8).is_err());
    }
}
