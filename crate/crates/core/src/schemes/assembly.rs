use crate::fem::Tabulation;
use crate::geometry::ParametrizedGrid;
use crate::{Error, Point, Result};

/// Symmetric node adjacency (nodes sharing an element, self included), sorted
/// per row, plus the slot of every local pair of every element.
#[derive(Clone, Debug)]
pub struct NodePattern {
    pub offsets: Vec<usize>,
    pub neighbors: Vec<usize>,
    slots: Vec<usize>,
    n_local: usize,
}

impl NodePattern {
    pub fn new(grid: &ParametrizedGrid) -> Self {
        let k = grid.n_nodes();
        let dofs = grid.dofmap();
        let n_local = grid.basis().n_dofs();
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); k];
        for j in 0..grid.n_elements() {
            for &a in dofs.element(j) {
                rows[a].extend_from_slice(dofs.element(j));
            }
        }
        let mut offsets = Vec::with_capacity(k + 1);
        let mut neighbors = Vec::new();
        offsets.push(0);
        for r in &mut rows {
            r.sort_unstable();
            r.dedup();
            neighbors.extend_from_slice(r);
            offsets.push(neighbors.len());
        }
        let mut slots = Vec::with_capacity(grid.n_elements() * n_local * n_local);
        for j in 0..grid.n_elements() {
            let loc = dofs.element(j);
            for &a in loc {
                let row = &neighbors[offsets[a]..offsets[a + 1]];
                for b in loc {
                    slots.push(offsets[a] + row.binary_search(b).expect("pattern holds element pairs"));
                }
            }
        }
        NodePattern {
            offsets,
            neighbors,
            slots,
            n_local,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn n_pairs(&self) -> usize {
        self.neighbors.len()
    }

    /// Pair slots of element `j`, row major over local indices.
    pub fn element_slots(&self, j: usize) -> &[usize] {
        let n = self.n_local * self.n_local;
        &self.slots[j * n..(j + 1) * n]
    }

    pub fn row(&self, a: usize) -> std::ops::Range<usize> {
        self.offsets[a]..self.offsets[a + 1]
    }
}

/// Which normal enters the `N` block.
#[derive(Clone, Copy, Debug)]
pub enum NormalSource<'a> {
    /// `n^m |∇F^m|` of the current grid.
    Current,
    /// Intermediate normal built from the current grid and a next iterate, times `|∇F^m|`.
    Intermediate(&'a ParametrizedGrid),
}

/// Pair-indexed operators on the current grid:
/// `M_ab = (φ_b, φ_a)^h`, `S_ab = (∇_Γφ_b, ∇_Γφ_a)^h`, `N_ab = (φ_b n, φ_a)^h`.
#[derive(Clone, Debug)]
pub struct Operators {
    pub mass: Vec<f64>,
    pub stiffness: Vec<f64>,
    pub normal: Vec<Point>,
}

/// Assembles `M`, `S` and `N` in element order.
pub fn assemble(
    grid: &ParametrizedGrid,
    tab: &Tabulation,
    pattern: &NodePattern,
    normals: NormalSource<'_>,
) -> Result<Operators> {
    let mut ops = Operators {
        mass: vec![0.0; pattern.n_pairs()],
        stiffness: vec![0.0; pattern.n_pairs()],
        normal: vec![Point::zeros(); pattern.n_pairs()],
    };
    assemble_into(grid, tab, pattern, normals, true, &mut ops)?;
    Ok(ops)
}

/// Recomputes only the `N` block (Picard sweeps keep `M` and `S`).
pub fn reassemble_normal(
    grid: &ParametrizedGrid,
    tab: &Tabulation,
    pattern: &NodePattern,
    normals: NormalSource<'_>,
    ops: &mut Operators,
) -> Result<()> {
    ops.normal.iter_mut().for_each(|v| *v = Point::zeros());
    assemble_into(grid, tab, pattern, normals, false, ops)
}

fn assemble_into(
    grid: &ParametrizedGrid,
    tab: &Tabulation,
    pattern: &NodePattern,
    normals: NormalSource<'_>,
    scalars: bool,
    ops: &mut Operators,
) -> Result<()> {
    if let NormalSource::Intermediate(next) = normals {
        if next.n_nodes() != grid.n_nodes() || next.n_elements() != grid.n_elements() {
            return Err(Error::InvalidArgument("iterate does not match the current grid".into()));
        }
    }
    let n = grid.basis().n_dofs();
    let dim = grid.dim();
    let mut next_local = Vec::with_capacity(n);
    let mut current_j = usize::MAX;
    grid.for_each_frame(tab, |j, q, w, frame| {
        let slots = pattern.element_slots(j);
        let nu = match normals {
            NormalSource::Current => frame.normal * frame.measure,
            NormalSource::Intermediate(next) => {
                if current_j != j {
                    next.element_coords(j, &mut next_local);
                    current_j = j;
                }
                let mut t = [Point::zeros(); 2];
                for (c, d) in next_local.iter().zip(&tab.grads[q]) {
                    t[0] += c * d[0];
                    t[1] += c * d[1];
                }
                weighted_intermediate_normal(dim, &frame.tangents, &t)
            }
        };
        let dw = frame.measure * w;
        for a in 0..n {
            let pa = frame.values[a];
            for b in 0..n {
                let s = slots[a * n + b];
                let pab = pa * frame.values[b];
                ops.normal[s] += nu * (pab * w);
                if scalars {
                    ops.mass[s] += pab * dw;
                    ops.stiffness[s] += frame.grads[a].dot(&frame.grads[b]) * dw;
                }
            }
        }
    })
}

/// Intermediate normal times `|∇F^m|`, from the reference Jacobian columns of the
/// current grid (`tm`) and of the next iterate (`tn`).
///
/// Curves: `((∇F^{m+1} + ∇F^m)/2)^⊥`. Surfaces: `(𝒥^m + 4𝒥^{m+½} + 𝒥^{m+1})/6` with
/// `𝒥^{m+½}` the Jacobian of the nodal average.
pub fn weighted_intermediate_normal(dim: usize, tm: &[Point; 2], tn: &[Point; 2]) -> Point {
    if dim == 1 {
        let t = (tm[0] + tn[0]) * 0.5;
        Point::new(t.y, -t.x, 0.0)
    } else {
        let jm = tm[0].cross(&tm[1]);
        let jn = tn[0].cross(&tn[1]);
        let jh = ((tm[0] + tn[0]) * 0.5).cross(&((tm[1] + tn[1]) * 0.5));
        (jm + jh * 4.0 + jn) / 6.0
    }
}
