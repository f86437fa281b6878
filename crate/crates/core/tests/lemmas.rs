use geomflow::fem::QuadratureRule;
use geomflow::geometry::{jacobian_transform_check, lemma_terms, ParametrizedGrid};
use geomflow::refmesh::{build_polygon, build_triangulation, Shape, TriangulationTarget};
use geomflow::Point;
use proptest::prelude::*;

fn base(dim: usize, degree: usize) -> ParametrizedGrid {
    let r = if dim == 1 {
        build_polygon(Shape::unit_circle(), 6).unwrap()
    } else {
        build_triangulation(Shape::unit_sphere(), TriangulationTarget::Refinements(0)).unwrap()
    };
    ParametrizedGrid::interpolate_shape(r, degree).unwrap()
}

/// Displaces node `i` by `noise[i % len]`, scaled by `amp`.
fn perturb(g: &ParametrizedGrid, noise: &[[f64; 3]], amp: f64, flat: bool) -> Option<ParametrizedGrid> {
    let coords = g
        .coords()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let n = noise[i % noise.len()];
            p + amp * Point::new(n[0], n[1], if flat { 0.0 } else { n[2] })
        })
        .collect();
    let out = g.with_coords(coords).ok()?;
    out.check_nondegenerate(&QuadratureRule::gauss(g.dim(), 4)).ok()?;
    Some(out)
}

fn noise() -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 37)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lemma_inequality(
        dim in 1usize..=2,
        degree in 1usize..=3,
        n1 in noise(),
        n2 in noise(),
        amp in 0.0f64..0.5,
        j in 0usize..6,
        x in 0.0f64..1.0,
        y in 0.0f64..1.0,
    ) {
        let g = base(dim, degree);
        let Some(y_grid) = perturb(&g, &n1, 0.05, dim == 1) else { return Ok(()) };
        let Some(t_grid) = perturb(&y_grid, &n2, amp, dim == 1) else { return Ok(()) };
        let pt = if dim == 1 { [x, 0.0] } else if x + y > 1.0 { [1.0 - x, 1.0 - y] } else { [x, y] };
        let t = lemma_terms(&y_grid, &t_grid, j, pt).unwrap();
        prop_assert!(t.lhs >= t.rhs - 1e-12, "lhs {} rhs {}", t.lhs, t.rhs);
        let id = lemma_terms(&y_grid, &y_grid, j, pt).unwrap();
        prop_assert!(id.lhs.abs() <= 1e-12 && id.rhs.abs() <= 1e-12);
    }

    #[test]
    fn composed_measure_identity(degree in 1usize..=3, n1 in noise(), n2 in noise(), amp in 0.0f64..0.5) {
        let g = base(2, degree);
        let Some(y_grid) = perturb(&g, &n1, 0.05, false) else { return Ok(()) };
        let Some(t_grid) = perturb(&y_grid, &n2, amp, false) else { return Ok(()) };
        let r = jacobian_transform_check(&y_grid, &t_grid, &QuadratureRule::gauss_triangle(6)).unwrap();
        prop_assert!(r <= 1e-10, "residual {r}");
    }
}

#[test]
fn mismatched_grids_are_rejected() {
    let a = base(1, 2);
    let b = base(1, 3);
    assert!(lemma_terms(&a, &b, 0, [0.5, 0.0]).is_err());
    assert!(jacobian_transform_check(&a, &b, &QuadratureRule::gauss_interval(4)).is_err());
}
