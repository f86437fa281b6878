use super::{ElementFrame, ParametrizedGrid};
use crate::fem::QuadratureRule;
use crate::{Error, Result};

/// `Σ_j Σ_i f(frame) |∇F_j(ξ̂_i)| ω̂_i`, the quadrature integral over `Γ_h`.
///
/// Summation runs in element order, so results are reproducible bit for bit.
pub fn integrate(
    grid: &ParametrizedGrid,
    rule: &QuadratureRule,
    mut f: impl FnMut(usize, &ElementFrame) -> f64,
) -> Result<f64> {
    let tab = grid.tabulate(rule);
    let mut total = 0.0;
    grid.for_each_frame(&tab, |j, _, w, frame| {
        total += f(j, frame) * frame.measure * w;
    })?;
    Ok(total)
}

/// `(u, v)^h` for nodal finite element functions given by their Lagrange values.
/// Scalars pass one component per node; vector fields pass `ambient_dim` components
/// per node, node major.
pub fn inner_product_h(grid: &ParametrizedGrid, rule: &QuadratureRule, u: &[f64], v: &[f64]) -> Result<f64> {
    let k = grid.n_nodes();
    if u.len() != v.len() || !u.len().is_multiple_of(k) {
        return Err(Error::InvalidArgument(format!(
            "nodal vectors of lengths {} and {} do not match {k} nodes",
            u.len(),
            v.len()
        )));
    }
    let comps = u.len() / k;
    let mut ue = vec![0.0; comps];
    let mut ve = vec![0.0; comps];
    integrate(grid, rule, |j, frame| {
        ue.iter_mut().for_each(|x| *x = 0.0);
        ve.iter_mut().for_each(|x| *x = 0.0);
        for (&g, &phi) in grid.dofmap().element(j).iter().zip(&frame.values) {
            for c in 0..comps {
                ue[c] += u[g * comps + c] * phi;
                ve[c] += v[g * comps + c] * phi;
            }
        }
        ue.iter().zip(&ve).map(|(a, b)| a * b).sum()
    })
}

/// Perimeter `L_h = (1,1)^h` of a curve or surface area `S_h` of a surface.
pub fn energy(grid: &ParametrizedGrid, rule: &QuadratureRule) -> Result<f64> {
    integrate(grid, rule, |_, _| 1.0)
}

/// Per-element measures `|σ_j|`.
pub fn element_measures(grid: &ParametrizedGrid, rule: &QuadratureRule) -> Result<Vec<f64>> {
    let mut m = vec![0.0; grid.n_elements()];
    let tab = grid.tabulate(rule);
    grid.for_each_frame(&tab, |j, _, w, frame| m[j] += frame.measure * w)?;
    Ok(m)
}

/// Mesh quality `Ψ = max_j |σ_j| / min_j |σ_j|`.
pub fn mesh_quality(grid: &ParametrizedGrid, rule: &QuadratureRule) -> Result<f64> {
    let m = element_measures(grid, rule)?;
    let (lo, hi) = m
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if lo <= 0.0 {
        let element = m.iter().position(|&x| x == lo).unwrap_or(0);
        return Err(Error::Degenerate {
            element,
            point: [f64::NAN; 2],
            measure: lo,
        });
    }
    Ok(hi / lo)
}

/// Enclosed area `½ Σ_j ∫ F·(∇F)^⊥` of a curve, exact for rules of order `2ℓ − 1`.
pub fn enclosed_area(grid: &ParametrizedGrid, rule: &QuadratureRule) -> Result<f64> {
    if grid.dim() != 1 {
        return Err(Error::InvalidArgument("enclosed area needs a curve".into()));
    }
    require_order(rule, 2 * grid.degree() - 1, "enclosed area")?;
    raw_enclosed(grid, rule)
}

/// Enclosed volume `⅓ Σ_j ∫ F·𝒥(F)` of a surface, exact for rules of order `3ℓ − 2`.
pub fn enclosed_volume(grid: &ParametrizedGrid, rule: &QuadratureRule) -> Result<f64> {
    if grid.dim() != 2 {
        return Err(Error::InvalidArgument("enclosed volume needs a surface".into()));
    }
    require_order(rule, 3 * grid.degree() - 2, "enclosed volume")?;
    raw_enclosed(grid, rule)
}

/// Enclosed area or volume, whichever matches the grid.
pub fn enclosed_measure(grid: &ParametrizedGrid, rule: &QuadratureRule) -> Result<f64> {
    if grid.dim() == 1 {
        enclosed_area(grid, rule)
    } else {
        enclosed_volume(grid, rule)
    }
}

fn require_order(rule: &QuadratureRule, required: usize, context: &'static str) -> Result<()> {
    if rule.order() < required {
        return Err(Error::QuadratureTooLow {
            required,
            got: rule.order(),
            context,
        });
    }
    Ok(())
}

// Integrand uses the reference Jacobian directly, so no measure check is needed.
fn raw_enclosed(grid: &ParametrizedGrid, rule: &QuadratureRule) -> Result<f64> {
    let tab = grid.tabulate(rule);
    let mut local = Vec::new();
    let mut total = 0.0;
    for j in 0..grid.n_elements() {
        grid.element_coords(j, &mut local);
        for q in 0..tab.len() {
            let mut f = crate::Point::zeros();
            let mut t = [crate::Point::zeros(); 2];
            for ((c, &v), d) in local.iter().zip(&tab.values[q]).zip(&tab.grads[q]) {
                f += c * v;
                t[0] += c * d[0];
                t[1] += c * d[1];
            }
            let integrand = if grid.dim() == 1 {
                0.5 * (f.x * t[0].y - f.y * t[0].x)
            } else {
                f.dot(&t[0].cross(&t[1])) / 3.0
            };
            total += integrand * tab.weights[q];
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::refmesh::{build_polygon, build_triangulation, ReferenceGrid, Shape, TriangulationTarget};
    use crate::Point;

    fn square() -> ReferenceGrid {
        let v = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        ReferenceGrid::new(
            1,
            2,
            v.iter().map(|&(x, y)| Point::new(x, y, 0.0)).collect(),
            (0..4).map(|k| [k, (k + 1) % 4, 0]).collect(),
            None,
        )
        .unwrap()
    }

    fn cube() -> ReferenceGrid {
        let mut v = Vec::new();
        for i in 0..8 {
            v.push(Point::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64));
        }
        let quads = [
            [0, 2, 3, 1],
            [4, 5, 7, 6],
            [0, 1, 5, 4],
            [2, 6, 7, 3],
            [0, 4, 6, 2],
            [1, 3, 7, 5],
        ];
        let tris = quads.iter().flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]]).collect();
        ReferenceGrid::new(2, 3, v, tris, None).unwrap()
    }

    #[test]
    fn perimeters() {
        let g = ParametrizedGrid::flat(square(), 1).unwrap();
        assert!((energy(&g, &QuadratureRule::gauss_interval(1)).unwrap() - 4.0).abs() < 1e-14);
        let n = 64;
        let g = ParametrizedGrid::interpolate_shape(build_polygon(Shape::unit_circle(), n).unwrap(), 1).unwrap();
        let chord = n as f64 * 2.0 * (PI / n as f64).sin();
        assert!((energy(&g, &QuadratureRule::gauss_interval(3)).unwrap() - chord).abs() < 1e-13);
        let g = ParametrizedGrid::interpolate_shape(build_polygon(Shape::unit_circle(), 128).unwrap(), 2).unwrap();
        assert!((energy(&g, &QuadratureRule::gauss_interval(20)).unwrap() - 2.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn areas_and_volumes() {
        let n = 64;
        let g = ParametrizedGrid::interpolate_shape(build_polygon(Shape::unit_circle(), n).unwrap(), 1).unwrap();
        let exact = 0.5 * n as f64 * (2.0 * PI / n as f64).sin();
        let rule = QuadratureRule::gauss_interval(1);
        assert!((enclosed_area(&g, &rule).unwrap() - exact).abs() < 1e-14);
        let shifted = g.map_coords(|p| p + Point::new(3.0, -7.0, 0.0));
        assert!((enclosed_area(&shifted, &rule).unwrap() - exact).abs() < 1e-13 * exact);
        let sq = ParametrizedGrid::flat(square(), 1).unwrap();
        assert!((enclosed_area(&sq, &rule).unwrap() - 1.0).abs() < 1e-15);

        let oct = build_triangulation(Shape::unit_sphere(), TriangulationTarget::Refinements(0)).unwrap();
        let g = ParametrizedGrid::interpolate_shape(oct, 1).unwrap();
        let rule = QuadratureRule::gauss_triangle(1);
        assert!((enclosed_volume(&g, &rule).unwrap() - 4.0 / 3.0).abs() < 1e-14);
        let c = ParametrizedGrid::flat(cube(), 1).unwrap();
        assert!((enclosed_volume(&c, &rule).unwrap() - 1.0).abs() < 1e-14);
        let shifted = c.map_coords(|p| p + Point::new(-2.0, 5.0, 11.0));
        assert!((enclosed_volume(&shifted, &rule).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn low_order_rules_are_refused() {
        let g = ParametrizedGrid::interpolate_shape(build_polygon(Shape::unit_circle(), 16).unwrap(), 3).unwrap();
        assert!(matches!(
            enclosed_area(&g, &QuadratureRule::gauss_interval(3)),
            Err(Error::QuadratureTooLow { required: 5, .. })
        ));
        let s = build_triangulation(Shape::unit_sphere(), TriangulationTarget::Refinements(0)).unwrap();
        let g = ParametrizedGrid::interpolate_shape(s, 3).unwrap();
        assert!(matches!(
            enclosed_volume(&g, &QuadratureRule::gauss_triangle(6)),
            Err(Error::QuadratureTooLow { required: 7, .. })
        ));
    }

    #[test]
    fn mesh_quality_values() {
        let g = ParametrizedGrid::interpolate_shape(build_polygon(Shape::unit_circle(), 32).unwrap(), 1).unwrap();
        assert!((mesh_quality(&g, &QuadratureRule::gauss_interval(3)).unwrap() - 1.0).abs() < 1e-12);
        // segments of lengths 1, 3 and √10
        let r = ReferenceGrid::new(
            1,
            2,
            vec![Point::new(0.0, 0.0, 0.0), Point::new(1.0, 0.0, 0.0), Point::new(1.0, 3.0, 0.0)],
            vec![[0, 1, 0], [1, 2, 0], [2, 0, 0]],
            None,
        )
        .unwrap();
        let g = ParametrizedGrid::flat(r, 1).unwrap();
        let psi = mesh_quality(&g, &QuadratureRule::gauss_interval(1)).unwrap();
        assert!((psi - 10f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn inner_product_of_constants() {
        let g = ParametrizedGrid::flat(square(), 2).unwrap();
        let one = vec![1.0; g.n_nodes()];
        let rule = QuadratureRule::gauss_interval(4);
        assert!((inner_product_h(&g, &rule, &one, &one).unwrap() - 4.0).abs() < 1e-14);
        let vec_one = vec![1.0; 3 * g.n_nodes()];
        assert!((inner_product_h(&g, &rule, &vec_one, &vec_one).unwrap() - 12.0).abs() < 1e-13);
    }
}
