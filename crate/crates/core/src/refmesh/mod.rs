//! Flat reference grids: closed polygons in the plane and closed oriented
//! triangulations in space.

mod generate;
mod off;
mod shapes;

use std::collections::HashMap;

use nalgebra::Matrix3x2;

use crate::{Error, Point, Result};

pub use generate::{build_polygon, build_triangulation, TriangulationTarget};
pub use off::{read_grid, write_grid};
pub use shapes::{Shape, FLOWER_AMPLITUDE, FLOWER_PETALS};

/// A flat reference grid `Γ̂_h`.
///
/// Elements are segments (`dim == 1`) or triangles (`dim == 2`) given by vertex
/// indices. Curves are stored with `z = 0`.
#[derive(Clone, Debug)]
pub struct ReferenceGrid {
    dim: usize,
    ambient_dim: usize,
    vertices: Vec<Point>,
    elements: Vec<[usize; 3]>,
    h: f64,
    shape: Option<Shape>,
}

/// Affine map `A_j` from the reference simplex onto element `j`.
#[derive(Clone, Copy, Debug)]
pub struct AffineMap {
    pub element: usize,
    pub offset: Point,
    /// Columns are the edge vectors `v1 − v0` and (for triangles) `v2 − v0`.
    pub linear: Matrix3x2<f64>,
    dim: usize,
}

impl AffineMap {
    /// `|∇A_j|` for segments, `|𝒥(A_j)|` for triangles.
    pub fn measure(&self) -> f64 {
        let e1 = self.linear.column(0);
        if self.dim == 1 {
            e1.norm()
        } else {
            e1.cross(&self.linear.column(1)).norm()
        }
    }

    pub fn apply(&self, xhat: [f64; 2]) -> Point {
        let mut p = self.offset + self.linear.column(0) * xhat[0];
        if self.dim == 2 {
            p += self.linear.column(1) * xhat[1];
        }
        p
    }
}

impl ReferenceGrid {
    /// Builds and validates a grid. `elements` hold 2 (segments) or 3 (triangles) indices;
    /// for segments the third slot is ignored.
    pub fn new(
        dim: usize,
        ambient_dim: usize,
        vertices: Vec<Point>,
        elements: Vec<[usize; 3]>,
        shape: Option<Shape>,
    ) -> Result<Self> {
        if !(dim == 1 && ambient_dim == 2 || dim == 2 && ambient_dim == 3) {
            return Err(Error::InvalidArgument(format!(
                "unsupported grid dimensions dim={dim}, ambient={ambient_dim}"
            )));
        }
        let mut grid = ReferenceGrid {
            dim,
            ambient_dim,
            vertices,
            elements,
            h: 0.0,
            shape,
        };
        grid.validate()?;
        grid.h = (0..grid.n_elements())
            .map(|j| grid.diameter(j))
            .fold(0.0, f64::max);
        Ok(grid)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Vertex indices of element `j` (2 for segments, 3 for triangles).
    pub fn element(&self, j: usize) -> &[usize] {
        &self.elements[j][..self.dim + 1]
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Maximum element diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Analytic shape the vertices were placed on, if any.
    pub fn shape(&self) -> Option<Shape> {
        self.shape
    }

    pub fn without_shape(mut self) -> Self {
        self.shape = None;
        self
    }

    pub fn element_map(&self, j: usize) -> Result<AffineMap> {
        if j >= self.n_elements() {
            return Err(Error::InvalidArgument(format!(
                "element index {j} out of range (grid has {} elements)",
                self.n_elements()
            )));
        }
        let v = self.element(j);
        let v0 = self.vertices[v[0]];
        let e1 = self.vertices[v[1]] - v0;
        let e2 = if self.dim == 2 {
            self.vertices[v[2]] - v0
        } else {
            Point::zeros()
        };
        Ok(AffineMap {
            element: j,
            offset: v0,
            linear: Matrix3x2::from_columns(&[e1, e2]),
            dim: self.dim,
        })
    }

    fn diameter(&self, j: usize) -> f64 {
        let v = self.element(j);
        let mut d: f64 = 0.0;
        for a in 0..v.len() {
            for b in a + 1..v.len() {
                d = d.max((self.vertices[v[a]] - self.vertices[v[b]]).norm());
            }
        }
        d
    }

    /// Closed manifold, consistent orientation and nondegenerate elements.
    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        for (j, e) in self.elements.iter().enumerate() {
            if e[..=self.dim].iter().any(|&v| v >= nv) {
                return Err(Error::InvalidArgument(format!(
                    "element {j} references a vertex out of range"
                )));
            }
        }
        if self.dim == 1 {
            let mut starts = vec![0usize; nv];
            let mut ends = vec![0usize; nv];
            for e in &self.elements {
                starts[e[0]] += 1;
                ends[e[1]] += 1;
            }
            if let Some(v) = (0..nv).find(|&v| starts[v] != 1 || ends[v] != 1) {
                return Err(Error::InvalidArgument(format!(
                    "vertex {v} is not incident to exactly two consistently oriented segments"
                )));
            }
        } else {
            let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
            for e in &self.elements {
                for k in 0..3 {
                    *directed.entry((e[k], e[(k + 1) % 3])).or_default() += 1;
                }
            }
            for (&(a, b), &count) in &directed {
                if count != 1 || directed.get(&(b, a)) != Some(&1) {
                    return Err(Error::InvalidArgument(format!(
                        "edge ({a}, {b}) is not shared by exactly two consistently oriented triangles"
                    )));
                }
            }
            let mut used = vec![false; nv];
            self.elements
                .iter()
                .for_each(|e| e.iter().for_each(|&v| used[v] = true));
            if let Some(v) = used.iter().position(|u| !u) {
                return Err(Error::InvalidArgument(format!("vertex {v} is unused")));
            }
        }
        for j in 0..self.n_elements() {
            let m = self.element_map(j)?.measure();
            if m.is_nan() || m <= 0.0 {
                return Err(Error::Degenerate {
                    element: j,
                    point: [0.0, 0.0],
                    measure: m,
                });
            }
        }
        Ok(())
    }

    /// Signed enclosed area (shoelace) for polygons, divergence-theorem volume
    /// for triangulations.
    pub fn signed_enclosed_measure(&self) -> f64 {
        if self.dim == 1 {
            0.5 * self
                .elements
                .iter()
                .map(|e| {
                    let (p, q) = (self.vertices[e[0]], self.vertices[e[1]]);
                    p.x * q.y - p.y * q.x
                })
                .sum::<f64>()
        } else {
            self.elements
                .iter()
                .map(|e| {
                    let (a, b, c) = (
                        self.vertices[e[0]],
                        self.vertices[e[1]],
                        self.vertices[e[2]],
                    );
                    a.dot(&b.cross(&c))
                })
                .sum::<f64>()
                / 6.0
        }
    }

    /// Splits every segment in two, every triangle in four; new vertices are
    /// projected onto the analytic shape when the grid carries one.
    pub fn refine_uniform(&self) -> ReferenceGrid {
        self.refine_uniform_with(true)
    }

    pub fn refine_uniform_with(&self, reproject: bool) -> ReferenceGrid {
        let mut vertices = self.vertices.clone();
        let shape = self.shape.filter(|_| reproject);
        let midpoint = |a: usize, b: usize, vertices: &mut Vec<Point>| {
            let m = (vertices[a] + vertices[b]) * 0.5;
            vertices.push(shape.map_or(m, |s| s.project(&m)));
            vertices.len() - 1
        };
        let mut elements = Vec::with_capacity(self.elements.len() * (1 << self.dim));
        if self.dim == 1 {
            for e in &self.elements {
                let m = midpoint(e[0], e[1], &mut vertices);
                elements.push([e[0], m, 0]);
                elements.push([m, e[1], 0]);
            }
        } else {
            let mut edge_mid: HashMap<(usize, usize), usize> = HashMap::new();
            for e in &self.elements {
                let mut mids = [0usize; 3];
                for k in 0..3 {
                    let (a, b) = (e[k], e[(k + 1) % 3]);
                    let key = (a.min(b), a.max(b));
                    mids[k] = match edge_mid.get(&key) {
                        Some(&m) => m,
                        None => {
                            let m = midpoint(a, b, &mut vertices);
                            edge_mid.insert(key, m);
                            m
                        }
                    };
                }
                let [m01, m12, m20] = mids;
                elements.push([e[0], m01, m20]);
                elements.push([m01, e[1], m12]);
                elements.push([m20, m12, e[2]]);
                elements.push([m01, m12, m20]);
            }
        }
        ReferenceGrid::new(self.dim, self.ambient_dim, vertices, elements, self.shape)
            .expect("uniform refinement of a valid grid is valid")
    }

    /// Unique undirected edges `(min, max)` in order of first appearance.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut seen = HashMap::new();
        let mut edges = Vec::new();
        let local_edges = if self.dim == 1 { 1 } else { 3 };
        for e in &self.elements {
            for k in 0..local_edges {
                let (a, b) = (e[k], e[(k + 1) % (self.dim + 1)]);
                let key = (a.min(b), a.max(b));
                seen.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edges.len() - 1
                });
            }
        }
        edges
    }
}
