use nalgebra::DMatrix;

use crate::{Error, Result};

pub const MAX_DEGREE: usize = 4;

/// Where a Lagrange node sits on the reference simplex; drives global numbering.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeEntity {
    Vertex(usize),
    /// Local edge `e` (from local vertex `e` to `(e+1) mod 3`; the only edge for
    /// segments is the element interior), with `position` steps of `1/ℓ` from its start.
    Edge { edge: usize, position: usize },
    Interior(usize),
}

/// Equispaced degree-`ℓ` Lagrange basis on the reference interval or triangle.
///
/// Nodes are ordered vertices first, then edge nodes (walking each edge from its
/// first vertex), then triangle interior nodes.
#[derive(Clone, Debug)]
pub struct LagrangeBasis {
    degree: usize,
    dim: usize,
    nodes: Vec<[f64; 2]>,
    entities: Vec<NodeEntity>,
    exponents: Vec<(u32, u32)>,
    /// `coeffs[(m, i)]` is the coefficient of monomial `m` in basis function `i`.
    coeffs: DMatrix<f64>,
}

impl LagrangeBasis {
    pub fn new(degree: usize, dim: usize) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&degree) || !(dim == 1 || dim == 2) {
            return Err(Error::InvalidArgument(format!(
                "unsupported Lagrange basis: degree {degree}, dimension {dim}"
            )));
        }
        let l = degree;
        let lf = l as f64;
        let mut nodes = Vec::new();
        let mut entities = Vec::new();
        if dim == 1 {
            nodes.extend([[0.0, 0.0], [1.0, 0.0]]);
            entities.extend([NodeEntity::Vertex(0), NodeEntity::Vertex(1)]);
            for k in 1..l {
                nodes.push([k as f64 / lf, 0.0]);
                entities.push(NodeEntity::Interior(k - 1));
            }
        } else {
            let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
            for (v, c) in corners.iter().enumerate() {
                nodes.push(*c);
                entities.push(NodeEntity::Vertex(v));
            }
            for e in 0..3 {
                let (a, b) = (corners[e], corners[(e + 1) % 3]);
                for k in 1..l {
                    let t = k as f64 / lf;
                    nodes.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                    entities.push(NodeEntity::Edge { edge: e, position: k });
                }
            }
            let mut idx = 0;
            for j in 1..l {
                for i in 1..l {
                    if i + j < l {
                        nodes.push([i as f64 / lf, j as f64 / lf]);
                        entities.push(NodeEntity::Interior(idx));
                        idx += 1;
                    }
                }
            }
        }
        let exponents: Vec<(u32, u32)> = if dim == 1 {
            (0..=l as u32).map(|a| (a, 0)).collect()
        } else {
            (0..=l as u32)
                .flat_map(|t| (0..=t).map(move |b| (t - b, b)))
                .collect()
        };
        let n = nodes.len();
        debug_assert_eq!(n, exponents.len());
        let vandermonde = DMatrix::from_fn(n, n, |i, m| monomial(exponents[m], nodes[i]));
        let coeffs = vandermonde
            .try_inverse()
            .ok_or_else(|| Error::Numerical("singular Lagrange Vandermonde matrix".into()))?;
        Ok(LagrangeBasis {
            degree,
            dim,
            nodes,
            entities,
            exponents,
            coeffs,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_dofs(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn entities(&self) -> &[NodeEntity] {
        &self.entities
    }

    /// Basis values at `x`.
    pub fn eval(&self, x: [f64; 2]) -> Vec<f64> {
        let mono: Vec<f64> = self.exponents.iter().map(|&e| monomial(e, x)).collect();
        (0..self.n_dofs())
            .map(|i| {
                mono.iter()
                    .enumerate()
                    .map(|(m, v)| self.coeffs[(m, i)] * v)
                    .sum()
            })
            .collect()
    }

    /// Reference gradients at `x`; the second component is zero for intervals.
    pub fn grad(&self, x: [f64; 2]) -> Vec<[f64; 2]> {
        let d: Vec<[f64; 2]> = self
            .exponents
            .iter()
            .map(|&e| monomial_grad(e, x))
            .collect();
        (0..self.n_dofs())
            .map(|i| {
                let mut g = [0.0; 2];
                for (m, dm) in d.iter().enumerate() {
                    g[0] += self.coeffs[(m, i)] * dm[0];
                    g[1] += self.coeffs[(m, i)] * dm[1];
                }
                g
            })
            .collect()
    }
}

fn monomial((a, b): (u32, u32), x: [f64; 2]) -> f64 {
    x[0].powi(a as i32) * x[1].powi(b as i32)
}

fn monomial_grad((a, b): (u32, u32), x: [f64; 2]) -> [f64; 2] {
    let dx = if a == 0 {
        0.0
    } else {
        a as f64 * x[0].powi(a as i32 - 1) * x[1].powi(b as i32)
    };
    let dy = if b == 0 {
        0.0
    } else {
        b as f64 * x[0].powi(a as i32) * x[1].powi(b as i32 - 1)
    };
    [dx, dy]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value_at_node(basis: &LagrangeBasis, vals: &[f64], node: [f64; 2]) -> f64 {
        let i = basis
            .nodes()
            .iter()
            .position(|n| (n[0] - node[0]).abs() < 1e-14 && (n[1] - node[1]).abs() < 1e-14)
            .unwrap();
        vals[i]
    }

    #[test]
    fn linear_hats_and_barycentric() {
        let b = LagrangeBasis::new(1, 1).unwrap();
        assert_eq!(b.eval([0.5, 0.0]), vec![0.5, 0.5]);
        let t = LagrangeBasis::new(1, 2).unwrap();
        for v in t.eval([1.0 / 3.0, 1.0 / 3.0]) {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn quadratic_interval_values() {
        let b = LagrangeBasis::new(2, 1).unwrap();
        let v = b.eval([0.25, 0.0]);
        for (node, expected) in [(0.0, 0.375), (0.5, 0.75), (1.0, -0.125)] {
            assert!((value_at_node(&b, &v, [node, 0.0]) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn kronecker_partition_of_unity_and_gradient_sums() {
        for dim in 1..=2 {
            for l in 1..=MAX_DEGREE {
                let b = LagrangeBasis::new(l, dim).unwrap();
                let expected = if dim == 1 { l + 1 } else { (l + 1) * (l + 2) / 2 };
                assert_eq!(b.n_dofs(), expected);
                for (i, &node) in b.nodes().iter().enumerate() {
                    for (k, v) in b.eval(node).into_iter().enumerate() {
                        let delta = if i == k { 1.0 } else { 0.0 };
                        assert!((v - delta).abs() < 1e-12, "l={l} dim={dim}");
                    }
                }
                for x in [[0.13, 0.21], [0.7, 0.05], [0.31, 0.62]] {
                    let x = if dim == 1 { [x[0], 0.0] } else { x };
                    let s: f64 = b.eval(x).iter().sum();
                    assert!((s - 1.0).abs() < 1e-13);
                    let g = b.grad(x);
                    let gs = g.iter().fold([0.0, 0.0], |acc, v| [acc[0] + v[0], acc[1] + v[1]]);
                    assert!(gs[0].abs() < 1e-11 && gs[1].abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let b = LagrangeBasis::new(3, 2).unwrap();
        let x = [0.23, 0.41];
        let h = 1e-6;
        let g = b.grad(x);
        let (px, mx) = (b.eval([x[0] + h, x[1]]), b.eval([x[0] - h, x[1]]));
        let (py, my) = (b.eval([x[0], x[1] + h]), b.eval([x[0], x[1] - h]));
        for i in 0..b.n_dofs() {
            assert!((g[i][0] - (px[i] - mx[i]) / (2.0 * h)).abs() < 1e-7);
            assert!((g[i][1] - (py[i] - my[i]) / (2.0 * h)).abs() < 1e-7);
        }
    }

    #[test]
    fn unsupported_degree() {
        assert!(LagrangeBasis::new(0, 1).is_err());
        assert!(LagrangeBasis::new(5, 2).is_err());
        assert!(LagrangeBasis::new(2, 3).is_err());
    }
}
