use std::num::NonZero;

use kiddo::{ImmutableKdTree, SquaredEuclidean};
use nalgebra::{Matrix2, Vector2};

use crate::fem::QuadratureRule;
use crate::geometry::ParametrizedGrid;
use crate::{Error, Point, Result};

pub const DEFAULT_NEIGHBORS: usize = 8;

const LM_MAX_ITER: usize = 100;
const LM_TOL: f64 = 1e-12;
const LM_LAMBDA0: f64 = 1e-3;

/// Element centers `F_j(x̂_c)` of a grid and a kd-tree over them.
pub struct CenterCloud {
    points: Vec<[f64; 3]>,
    tree: ImmutableKdTree<f64, 3>,
}

impl CenterCloud {
    pub fn new(grid: &ParametrizedGrid) -> Result<Self> {
        let c = if grid.dim() == 1 { [0.5, 0.0] } else { [1.0 / 3.0, 1.0 / 3.0] };
        let points: Vec<[f64; 3]> = (0..grid.n_elements())
            .map(|j| {
                let p = grid.eval(j, c);
                [p.x, p.y, p.z]
            })
            .collect();
        let tree = ImmutableKdTree::new_from_slice(&points)
            .map_err(|e| Error::InvalidArgument(format!("cannot index element centers: {e:?}")))?;
        Ok(CenterCloud { points, tree })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, j: usize) -> Point {
        Point::from(self.points[j])
    }

    /// Indices of the `k` elements with nearest centers, closest first.
    pub fn nearest(&self, p: &Point, k: usize) -> Vec<usize> {
        let k = k.clamp(1, self.len().max(1));
        self.tree
            .query(&[p.x, p.y, p.z])
            .nearest_n::<SquaredEuclidean<f64>>(NonZero::new(k).expect("k >= 1"))
            .execute()
            .into_iter()
            .map(|r| r.item as usize)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosestPointResult {
    pub element: usize,
    pub xhat: [f64; 2],
    pub dist2: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Euclidean projection onto the reference simplex (`[0,1]` or the unit triangle).
pub fn project_to_simplex(dim: usize, x: [f64; 2]) -> [f64; 2] {
    if dim == 1 {
        return [x[0].clamp(0.0, 1.0), 0.0];
    }
    if x[0] >= 0.0 && x[1] >= 0.0 && x[0] + x[1] <= 1.0 {
        return x;
    }
    let v = Vector2::new(x[0], x[1]);
    let corners = [Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)];
    let mut best = corners[0];
    let mut best_d = f64::INFINITY;
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        let (a, b) = (corners[a], corners[b]);
        let e = b - a;
        let t = ((v - a).dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
        let q = a + e * t;
        let d = (v - q).norm_squared();
        if d < best_d {
            best_d = d;
            best = q;
        }
    }
    // keep the result inside the closed simplex despite rounding in `a + e t`
    let x0 = best.x.max(0.0);
    let x1 = best.y.max(0.0);
    let s = x0 + x1;
    if s > 1.0 {
        [x0 / s, x1 / s]
    } else {
        [x0, x1]
    }
}

fn eval_with_jacobian(grid: &ParametrizedGrid, local: &[Point], x: [f64; 2]) -> (Point, [Point; 2]) {
    let basis = grid.basis();
    let mut f = Point::zeros();
    let mut t = [Point::zeros(); 2];
    for ((c, v), d) in local.iter().zip(basis.eval(x)).zip(basis.grad(x)) {
        f += c * v;
        t[0] += c * d[0];
        t[1] += c * d[1];
    }
    (f, t)
}

/// Closest point to `p` on element `j` of `grid`: projected Levenberg–Marquardt
/// on `½‖F_j(x̂) − p‖²` over the reference simplex, started at the barycenter.
pub fn closest_point(p: &Point, grid: &ParametrizedGrid, j: usize) -> Result<ClosestPointResult> {
    if j >= grid.n_elements() {
        return Err(Error::InvalidArgument(format!("element index {j} out of range")));
    }
    let dim = grid.dim();
    let mut local = Vec::new();
    grid.element_coords(j, &mut local);
    let mut x = if dim == 1 { [0.5, 0.0] } else { [1.0 / 3.0, 1.0 / 3.0] };
    let (mut f, mut t) = eval_with_jacobian(grid, &local, x);
    let mut cost = (f - p).norm_squared();
    let mut lambda = LM_LAMBDA0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < LM_MAX_ITER {
        iterations += 1;
        let r = f - p;
        let (g, h) = if dim == 1 {
            (Vector2::new(t[0].dot(&r), 0.0), Matrix2::new(t[0].norm_squared(), 0.0, 0.0, 1.0))
        } else {
            let (a, b, c) = (t[0].norm_squared(), t[0].dot(&t[1]), t[1].norm_squared());
            (Vector2::new(t[0].dot(&r), t[1].dot(&r)), Matrix2::new(a, b, b, c))
        };
        let pg = project_to_simplex(dim, [x[0] - g.x, x[1] - g.y]);
        if ((pg[0] - x[0]).powi(2) + (pg[1] - x[1]).powi(2)).sqrt() < LM_TOL {
            converged = true;
            break;
        }
        let mut damped = h;
        damped[(0, 0)] *= 1.0 + lambda;
        damped[(1, 1)] *= 1.0 + lambda;
        let Some(step) = damped.lu().solve(&(-g)) else {
            break;
        };
        let trial = project_to_simplex(dim, [x[0] + step.x, x[1] + step.y]);
        let moved = ((trial[0] - x[0]).powi(2) + (trial[1] - x[1]).powi(2)).sqrt();
        let (ft, tt) = eval_with_jacobian(grid, &local, trial);
        let trial_cost = (ft - p).norm_squared();
        if trial_cost < cost {
            x = trial;
            f = ft;
            t = tt;
            cost = trial_cost;
            lambda *= 0.1;
        } else {
            lambda *= 10.0;
        }
        if moved < LM_TOL {
            converged = true;
            break;
        }
    }
    Ok(ClosestPointResult {
        element: j,
        xhat: x,
        dist2: cost,
        converged,
        iterations,
    })
}

/// Distance from `p` to `grid`, searching the `k` elements with nearest centers.
pub fn dist_point_to_grid(p: &Point, grid: &ParametrizedGrid, cloud: &CenterCloud, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let mut best = f64::INFINITY;
    for j in cloud.nearest(p, k) {
        let c = closest_point(p, grid, j)?;
        if !c.converged {
            log::debug!("closest point on element {j} stopped after {} iterations", c.iterations);
        }
        best = best.min(c.dist2);
    }
    Ok(best.sqrt())
}

/// How pointwise distances are reduced over `grid1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceNorm {
    L1,
    L2,
    /// Maximum over quadrature points (one-sided Hausdorff).
    Linf,
}

/// Distance from `grid1` to `grid2` measured at the quadrature points of `rule`
/// on `grid1`, each weighted by `|∇F₁| ω̂`.
pub fn projected_distance(
    grid1: &ParametrizedGrid,
    grid2: &ParametrizedGrid,
    rule: &QuadratureRule,
    k: usize,
    norm: DistanceNorm,
) -> Result<f64> {
    if grid1.ambient_dim() != grid2.ambient_dim() || grid1.dim() != grid2.dim() {
        return Err(Error::InvalidArgument("grids live in different dimensions".into()));
    }
    if !rule.positive_weights() {
        return Err(Error::InvalidArgument("distance needs a positive-weight rule".into()));
    }
    let cloud = CenterCloud::new(grid2)?;
    let tab = grid1.tabulate(rule);
    let mut points = Vec::with_capacity(grid1.n_elements() * tab.len());
    grid1.for_each_frame(&tab, |_, _, w, frame| points.push((frame.position, frame.measure * w)))?;
    let mut acc = 0.0f64;
    for (p, w) in points {
        let d = dist_point_to_grid(&p, grid2, &cloud, k)?;
        match norm {
            DistanceNorm::L1 => acc += w * d,
            DistanceNorm::L2 => acc += w * d * d,
            DistanceNorm::Linf => acc = acc.max(d),
        }
    }
    Ok(if norm == DistanceNorm::L2 { acc.sqrt() } else { acc })
}

/// Projected L² distance `d_{L²}(Γ₁, Γ₂)`.
pub fn l2_projected_distance(grid1: &ParametrizedGrid, grid2: &ParametrizedGrid, rule: &QuadratureRule, k: usize) -> Result<f64> {
    projected_distance(grid1, grid2, rule, k, DistanceNorm::L2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refmesh::{build_polygon, ReferenceGrid, Shape};

    fn segment() -> ParametrizedGrid {
        let r = ReferenceGrid::new(
            1,
            2,
            vec![Point::new(0.0, 0.0, 0.0), Point::new(1.0, 0.0, 0.0), Point::new(0.5, 1.0, 0.0)],
            vec![[0, 1, 0], [1, 2, 0], [2, 0, 0]],
            None,
        )
        .unwrap();
        ParametrizedGrid::flat(r, 1).unwrap()
    }

    #[test]
    fn segment_projection() {
        let g = segment();
        let c = closest_point(&Point::new(0.3, 0.4, 0.0), &g, 0).unwrap();
        assert!(c.converged);
        assert!((c.xhat[0] - 0.3).abs() < 1e-12);
        assert!((c.dist2.sqrt() - 0.4).abs() < 1e-12);
        let c = closest_point(&Point::new(2.0, 1.0, 0.0), &g, 0).unwrap();
        assert!(c.converged);
        assert_eq!(c.xhat[0], 1.0);
        assert!((c.dist2.sqrt() - 2f64.sqrt()).abs() < 1e-12);
        let on = closest_point(&Point::new(0.7, 0.0, 0.0), &g, 0).unwrap();
        assert!(on.converged && on.dist2 < 1e-24);
    }

    #[test]
    fn simplex_projection() {
        assert_eq!(project_to_simplex(2, [0.2, 0.3]), [0.2, 0.3]);
        assert_eq!(project_to_simplex(2, [-1.0, -1.0]), [0.0, 0.0]);
        let q = project_to_simplex(2, [1.0, 1.0]);
        assert!((q[0] - 0.5).abs() < 1e-15 && (q[1] - 0.5).abs() < 1e-15);
        assert_eq!(project_to_simplex(2, [2.0, -1.0]), [1.0, 0.0]);
        assert_eq!(project_to_simplex(1, [1.5, 0.0]), [1.0, 0.0]);
    }

    #[test]
    fn cloud_neighbors() {
        let g = ParametrizedGrid::interpolate_shape(build_polygon(Shape::unit_circle(), 16).unwrap(), 2).unwrap();
        let cloud = CenterCloud::new(&g).unwrap();
        assert_eq!(cloud.len(), 16);
        let c = cloud.point(5);
        assert_eq!(cloud.nearest(&c, 1), vec![5]);
        assert_eq!(cloud.nearest(&c, 100).len(), 16);
    }
}
