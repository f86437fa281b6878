use geomflow::fem::QuadratureRule;
use geomflow::geometry::ParametrizedGrid;
use geomflow::metrics::{closest_point, dist_point_to_grid, l2_projected_distance, CenterCloud, DEFAULT_NEIGHBORS};
use geomflow::refmesh::{build_polygon, build_triangulation, Shape, TriangulationTarget};
use geomflow::Point;
use proptest::prelude::*;

fn circle(r: f64, n: usize, l: usize) -> ParametrizedGrid {
    let g = ParametrizedGrid::interpolate_shape(build_polygon(Shape::unit_circle(), n).unwrap(), l).unwrap();
    g.map_coords(|p| p * r)
}

fn brute_force(p: &Point, g: &ParametrizedGrid) -> f64 {
    (0..g.n_elements())
        .map(|j| closest_point(p, g, j).unwrap().dist2)
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

#[test]
fn self_distance_vanishes() {
    let c = circle(1.0, 24, 2);
    let rule = QuadratureRule::gauss_interval(8);
    assert!(l2_projected_distance(&c, &c, &rule, DEFAULT_NEIGHBORS).unwrap() <= 1e-10);
    let r = build_triangulation(Shape::Ellipsoid { a: 2.0, b: 1.0, c: 1.0 }, TriangulationTarget::Refinements(1)).unwrap();
    let s = ParametrizedGrid::interpolate_shape(r, 2).unwrap();
    let rule = QuadratureRule::gauss_triangle(4);
    assert!(l2_projected_distance(&s, &s, &rule, DEFAULT_NEIGHBORS).unwrap() <= 1e-10);
}

#[test]
fn concentric_circles() {
    let outer = circle(2.0, 512, 1);
    let cloud = CenterCloud::new(&outer).unwrap();
    for a in 0..16 {
        let t = a as f64 * 0.39;
        let p = Point::new(t.cos(), t.sin(), 0.0);
        assert!((dist_point_to_grid(&p, &outer, &cloud, DEFAULT_NEIGHBORS).unwrap() - 1.0).abs() < 2e-4);
    }
    let a = circle(1.0, 512, 1);
    let b = circle(1.5, 512, 1);
    let d = l2_projected_distance(&a, &b, &QuadratureRule::gauss_interval(4), DEFAULT_NEIGHBORS).unwrap();
    assert!((d - 0.5 * (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-3, "{d}");
}

#[test]
fn vertex_has_zero_distance() {
    let g = circle(1.3, 16, 3);
    let cloud = CenterCloud::new(&g).unwrap();
    for (i, p) in g.coords().iter().enumerate().step_by(5) {
        for k in [1, 3, 16] {
            assert!(dist_point_to_grid(p, &g, &cloud, k).unwrap() < 1e-12, "node {i} k {k}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn knn_matches_brute_force(x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let g = ParametrizedGrid::interpolate_shape(build_polygon(Shape::Flower, 16).unwrap(), 2).unwrap();
        let cloud = CenterCloud::new(&g).unwrap();
        let p = Point::new(x, y, 0.0);
        let all = dist_point_to_grid(&p, &g, &cloud, g.n_elements()).unwrap();
        prop_assert!((all - brute_force(&p, &g)).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for k in 1..=g.n_elements() {
            let d = dist_point_to_grid(&p, &g, &cloud, k).unwrap();
            prop_assert!(d <= prev + 1e-15);
            prev = d;
        }
    }

    #[test]
    fn closest_point_stays_in_simplex(x in -2.0f64..2.0, y in -2.0f64..2.0, z in -2.0f64..2.0, j in 0usize..8) {
        let r = build_triangulation(Shape::unit_sphere(), TriangulationTarget::Refinements(0)).unwrap();
        let g = ParametrizedGrid::interpolate_shape(r, 2).unwrap();
        let p = Point::new(x, y, z);
        let c = closest_point(&p, &g, j).unwrap();
        prop_assert!(c.xhat[0] >= -1e-12 && c.xhat[1] >= -1e-12 && c.xhat[0] + c.xhat[1] <= 1.0 + 1e-12);
        prop_assert!((c.dist2 - (p - g.eval(j, c.xhat)).norm_squared()).abs() < 1e-14);
    }
}

#[test]
fn surface_knn_matches_brute_force() {
    let r = build_triangulation(Shape::unit_sphere(), TriangulationTarget::Refinements(0)).unwrap();
    let g = ParametrizedGrid::interpolate_shape(r, 2).unwrap();
    let cloud = CenterCloud::new(&g).unwrap();
    for p in [Point::new(0.3, 0.2, 0.1), Point::new(1.2, -0.4, 0.9), Point::new(0.0, 0.0, 2.0)] {
        let all = dist_point_to_grid(&p, &g, &cloud, 8).unwrap();
        assert!((all - brute_force(&p, &g)).abs() < 1e-12);
    }
}
