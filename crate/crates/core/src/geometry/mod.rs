//! The isoparametric grid `Y_h`: per-element maps `F_j = Y_h ∘ A_j`, their frames
//! (tangents, measure, normal, surface gradients) and geometric functionals.

mod checks;
mod export;
mod functionals;

use std::collections::HashMap;
use std::sync::Arc;

use crate::fem::{LagrangeBasis, NodeEntity, QuadratureRule, Tabulation};
use crate::refmesh::ReferenceGrid;
use crate::{Error, Point, Result};

pub use checks::{jacobian_transform_check, lemma_terms, LemmaTerms};
pub use export::{format_polyline, format_vtk, write_polyline, write_vtk};
pub use functionals::{
    element_measures, enclosed_area, enclosed_measure, enclosed_volume, energy, inner_product_h,
    integrate, mesh_quality,
};

/// Relative threshold below which an element measure counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-14;

/// Global numbering of Lagrange nodes.
///
/// Vertices keep their reference indices; edge nodes follow (each edge walked from
/// its smaller to its larger vertex index), then element interior nodes.
#[derive(Clone, Debug)]
pub struct DofMap {
    local: Vec<usize>,
    n_local: usize,
    n_global: usize,
}

impl DofMap {
    pub fn new(reference: &ReferenceGrid, basis: &LagrangeBasis) -> Self {
        let l = basis.degree();
        let nv = reference.n_vertices();
        let ne = reference.n_elements();
        let n_local = basis.n_dofs();
        let mut local = Vec::with_capacity(ne * n_local);
        let (edge_index, n_edges) = if reference.dim() == 2 {
            let edges = reference.edges();
            let n = edges.len();
            let map: HashMap<[usize; 2], usize> =
                edges.into_iter().enumerate().map(|(i, e)| (e, i)).collect();
            (map, n)
        } else {
            (HashMap::new(), 0)
        };
        let edge_nodes = l - 1;
        let interior_per_element = n_local - (reference.dim() + 1) - 3 * edge_nodes * (reference.dim() - 1);
        let interior_offset = nv + n_edges * edge_nodes;
        for j in 0..ne {
            let v = reference.element(j);
            for entity in basis.entities() {
                let g = match *entity {
                    NodeEntity::Vertex(i) => v[i],
                    NodeEntity::Edge { edge, position } => {
                        let (a, b) = (v[edge], v[(edge + 1) % 3]);
                        let e = edge_index[&[a.min(b), a.max(b)]];
                        let along = if a < b { position - 1 } else { l - position - 1 };
                        nv + e * edge_nodes + along
                    }
                    NodeEntity::Interior(i) => interior_offset + j * interior_per_element + i,
                };
                local.push(g);
            }
        }
        DofMap {
            local,
            n_local,
            n_global: interior_offset + ne * interior_per_element,
        }
    }

    /// Global indices of the Lagrange nodes of element `j`, in basis order.
    pub fn element(&self, j: usize) -> &[usize] {
        &self.local[j * self.n_local..(j + 1) * self.n_local]
    }

    pub fn n_elements(&self) -> usize {
        self.local.len() / self.n_local
    }

    /// Number of global Lagrange nodes `K`.
    pub fn n_global(&self) -> usize {
        self.n_global
    }
}

#[derive(Debug)]
struct Discretization {
    reference: ReferenceGrid,
    basis: LagrangeBasis,
    dofmap: DofMap,
}

/// Degree-`ℓ` isoparametric grid: Lagrange node coordinates over a reference grid.
///
/// Cloning is cheap apart from the coordinates; grids produced by a time step share
/// the reference grid, basis and numbering with their predecessor.
#[derive(Clone, Debug)]
pub struct ParametrizedGrid {
    disc: Arc<Discretization>,
    coords: Vec<Point>,
}

impl ParametrizedGrid {
    /// Places the Lagrange nodes on the analytic shape of `reference`.
    pub fn interpolate_shape(reference: ReferenceGrid, degree: usize) -> Result<Self> {
        let shape = reference.shape().ok_or_else(|| {
            Error::InvalidArgument("reference grid carries no analytic shape".into())
        })?;
        let mut grid = Self::flat(reference, degree)?;
        for p in &mut grid.coords {
            *p = shape.project(p);
        }
        grid.check_nondegenerate(&QuadratureRule::gauss(grid.dim(), 10 * degree))?;
        Ok(grid)
    }

    /// Lagrange nodes placed on the flat reference elements themselves.
    pub fn flat(reference: ReferenceGrid, degree: usize) -> Result<Self> {
        let basis = LagrangeBasis::new(degree, reference.dim())?;
        let dofmap = DofMap::new(&reference, &basis);
        let mut coords = vec![Point::zeros(); dofmap.n_global()];
        for j in 0..reference.n_elements() {
            let map = reference.element_map(j)?;
            for (&g, &x) in dofmap.element(j).iter().zip(basis.nodes()) {
                coords[g] = map.apply(x);
            }
        }
        Ok(ParametrizedGrid {
            disc: Arc::new(Discretization {
                reference,
                basis,
                dofmap,
            }),
            coords,
        })
    }

    /// Same discretization, new node coordinates.
    pub fn with_coords(&self, coords: Vec<Point>) -> Result<Self> {
        if coords.len() != self.coords.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} node coordinates, got {}",
                self.coords.len(),
                coords.len()
            )));
        }
        Ok(ParametrizedGrid {
            disc: Arc::clone(&self.disc),
            coords,
        })
    }

    pub fn map_coords(&self, f: impl Fn(&Point) -> Point) -> Self {
        ParametrizedGrid {
            disc: Arc::clone(&self.disc),
            coords: self.coords.iter().map(f).collect(),
        }
    }

    pub fn same_discretization(&self, other: &ParametrizedGrid) -> bool {
        Arc::ptr_eq(&self.disc, &other.disc)
    }

    pub fn reference(&self) -> &ReferenceGrid {
        &self.disc.reference
    }

    pub fn basis(&self) -> &LagrangeBasis {
        &self.disc.basis
    }

    pub fn dofmap(&self) -> &DofMap {
        &self.disc.dofmap
    }

    pub fn coords(&self) -> &[Point] {
        &self.coords
    }

    pub fn degree(&self) -> usize {
        self.disc.basis.degree()
    }

    pub fn dim(&self) -> usize {
        self.disc.reference.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.disc.reference.ambient_dim()
    }

    pub fn n_elements(&self) -> usize {
        self.disc.reference.n_elements()
    }

    pub fn n_nodes(&self) -> usize {
        self.coords.len()
    }

    pub fn tabulate(&self, rule: &QuadratureRule) -> Tabulation {
        Tabulation::new(self.basis(), rule)
    }

    /// Copies the node coordinates of element `j` into `out`.
    pub fn element_coords(&self, j: usize, out: &mut Vec<Point>) {
        out.clear();
        out.extend(self.dofmap().element(j).iter().map(|&g| self.coords[g]));
    }

    /// `F_j(x̂)`.
    pub fn eval(&self, j: usize, x: [f64; 2]) -> Point {
        self.dofmap()
            .element(j)
            .iter()
            .zip(self.basis().eval(x))
            .map(|(&g, v)| self.coords[g] * v)
            .sum()
    }

    /// Frame of element `j` at reference point `x`.
    pub fn frame_at(&self, j: usize, x: [f64; 2]) -> Result<ElementFrame> {
        if j >= self.n_elements() {
            return Err(Error::InvalidArgument(format!("element index {j} out of range")));
        }
        let mut local = Vec::new();
        self.element_coords(j, &mut local);
        let mut frame = ElementFrame::default();
        frame.compute(self.dim(), &local, &self.basis().eval(x), &self.basis().grad(x));
        self.check_measure(j, x, frame.measure)?;
        Ok(frame)
    }

    /// Visits every quadrature point in element order, handing out the element
    /// index, the quadrature index, the reference weight and the frame.
    pub fn for_each_frame(
        &self,
        tab: &Tabulation,
        mut f: impl FnMut(usize, usize, f64, &ElementFrame),
    ) -> Result<()> {
        let mut local = Vec::with_capacity(self.basis().n_dofs());
        let mut frame = ElementFrame::default();
        for j in 0..self.n_elements() {
            self.element_coords(j, &mut local);
            for q in 0..tab.len() {
                frame.compute(self.dim(), &local, &tab.values[q], &tab.grads[q]);
                self.check_measure(j, tab.points[q], frame.measure)?;
                f(j, q, tab.weights[q], &frame);
            }
        }
        Ok(())
    }

    /// Nondegeneracy of every element at every point of `rule`.
    pub fn check_nondegenerate(&self, rule: &QuadratureRule) -> Result<()> {
        self.for_each_frame(&self.tabulate(rule), |_, _, _, _| {})
    }

    fn check_measure(&self, j: usize, x: [f64; 2], measure: f64) -> Result<()> {
        let reference = self.reference().element_map(j)?.measure();
        if measure > DEGENERACY_TOL * reference && measure.is_finite() {
            Ok(())
        } else {
            Err(Error::Degenerate {
                element: j,
                point: x,
                measure,
            })
        }
    }
}

/// Geometry of `F_j` at one reference point.
#[derive(Clone, Debug, Default)]
pub struct ElementFrame {
    pub position: Point,
    /// Columns of `∇F`; the second is zero for curves.
    pub tangents: [Point; 2],
    /// `|∇F|` for curves, `|𝒥(F)|` for surfaces.
    pub measure: f64,
    pub normal: Point,
    /// Local basis values.
    pub values: Vec<f64>,
    /// Surface gradients `∇_Γ φ_a` of the local basis functions.
    pub grads: Vec<Point>,
}

impl ElementFrame {
    pub(crate) fn compute(&mut self, dim: usize, local: &[Point], values: &[f64], rgrads: &[[f64; 2]]) {
        let mut pos = Point::zeros();
        let mut t = [Point::zeros(); 2];
        for ((c, &v), g) in local.iter().zip(values).zip(rgrads) {
            pos += c * v;
            t[0] += c * g[0];
            t[1] += c * g[1];
        }
        self.position = pos;
        self.tangents = t;
        self.values.clear();
        self.values.extend_from_slice(values);
        self.grads.clear();
        if dim == 1 {
            let g = t[0].norm();
            self.measure = g;
            self.normal = Point::new(t[0].y, -t[0].x, 0.0) / g;
            let scale = 1.0 / (g * g);
            self.grads.extend(rgrads.iter().map(|d| t[0] * (d[0] * scale)));
        } else {
            let j = t[0].cross(&t[1]);
            let g = j.norm();
            self.measure = g;
            self.normal = j / g;
            let (e, f, h) = (t[0].dot(&t[0]), t[0].dot(&t[1]), t[1].dot(&t[1]));
            let det = e * h - f * f;
            let (i00, i01, i11) = (h / det, -f / det, e / det);
            self.grads.extend(rgrads.iter().map(|d| {
                let a = i00 * d[0] + i01 * d[1];
                let b = i01 * d[0] + i11 * d[1];
                t[0] * a + t[1] * b
            }));
        }
    }
}
