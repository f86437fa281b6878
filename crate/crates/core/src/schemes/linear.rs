use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMat};
use faer::Mat;

use super::assembly::{NodePattern, Operators};
use crate::{Error, Point, Result};

const AMPLIFICATION_LIMIT: f64 = 1e13;

/// Sparse square matrix pattern with a reusable symbolic LU factorization.
#[derive(Clone, Debug)]
pub struct SparseLu {
    symbolic_mat: SymbolicSparseColMat<usize>,
    symbolic_lu: SymbolicLu<usize>,
}

impl SparseLu {
    pub fn new(n: usize, col_ptr: Vec<usize>, row_idx: Vec<usize>) -> Result<Self> {
        faer::set_global_parallelism(faer::Par::Seq);
        let symbolic_mat = SymbolicSparseColMat::new_checked(n, n, col_ptr, None, row_idx);
        let symbolic_lu = SymbolicLu::try_new(symbolic_mat.as_ref())
            .map_err(|e| Error::Numerical(format!("symbolic factorization failed: {e:?}")))?;
        Ok(SparseLu {
            symbolic_mat,
            symbolic_lu,
        })
    }

    pub fn n(&self) -> usize {
        self.symbolic_mat.nrows()
    }

    pub fn nnz(&self) -> usize {
        self.symbolic_mat.row_idx().len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        self.symbolic_mat.col_ptr()
    }

    pub fn row_idx(&self) -> &[usize] {
        self.symbolic_mat.row_idx()
    }

    /// Solves `A x_k = b_k` for every right-hand side column; `values` follow the
    /// pattern's CSC order. A singular or inaccurate factorization is reported as
    /// an ill-posed system.
    pub fn solve(&self, values: &[f64], rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let n = self.n();
        let mat = SparseColMatRef::new(self.symbolic_mat.as_ref(), values);
        let lu = Lu::try_new_with_symbolic(self.symbolic_lu.clone(), mat)
            .map_err(|e| Error::IllPosed(format!("LU factorization failed: {e:?}")))?;
        let mut x = Mat::<f64>::from_fn(n, rhs.len(), |i, k| rhs[k][i]);
        lu.solve_in_place(x.as_mut());
        // one step of iterative refinement
        let mut r = Mat::<f64>::from_fn(n, rhs.len(), |i, k| rhs[k][i]);
        for k in 0..rhs.len() {
            let col: Vec<f64> = (0..n).map(|i| x[(i, k)]).collect();
            for (i, v) in self.residual(values, &col, &rhs[k]).into_iter().enumerate() {
                r[(i, k)] = -v;
            }
        }
        lu.solve_in_place(r.as_mut());
        let sol: Vec<Vec<f64>> = (0..rhs.len())
            .map(|k| (0..n).map(|i| x[(i, k)] + r[(i, k)]).collect())
            .collect();
        for (s, b) in sol.iter().zip(rhs) {
            self.check(values, s, b)?;
        }
        Ok(sol)
    }

    /// `A x − b`.
    fn residual(&self, values: &[f64], x: &[f64], b: &[f64]) -> Vec<f64> {
        let mut r: Vec<f64> = b.iter().map(|v| -v).collect();
        let (cp, ri) = (self.col_ptr(), self.row_idx());
        for col in 0..self.n() {
            for k in cp[col]..cp[col + 1] {
                r[ri[k]] += values[k] * x[col];
            }
        }
        r
    }

    fn check(&self, values: &[f64], x: &[f64], b: &[f64]) -> Result<()> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::IllPosed("non-finite solution".into()));
        }
        let amax = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let r_max = amax(&self.residual(values, x, b));
        let (a_max, x_max, b_max) = (amax(values), amax(x), amax(b));
        let scale = a_max * x_max + b_max;
        if r_max > 1e-8 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::IllPosed(format!(
                "relative residual {:.3e} after factorization",
                r_max / scale
            )));
        }
        // A numerically singular matrix with a nontrivial kernel still gives a small
        // backward error, but the solution explodes along the kernel.
        if a_max * x_max > AMPLIFICATION_LIMIT * b_max {
            return Err(Error::IllPosed(format!(
                "solution amplified by {:.3e}",
                a_max * x_max / b_max.max(f64::MIN_POSITIVE)
            )));
        }
        Ok(())
    }
}

/// Layout of the position/curvature saddle-point system: per node `a`, the `d`
/// position unknowns followed by the curvature unknown, `d + 1` consecutive slots.
#[derive(Clone, Debug)]
pub struct SaddleSystem {
    d: usize,
    lu: SparseLu,
}

/// Coefficient block coupling the curvature unknowns.
#[derive(Clone, Copy, Debug)]
pub enum CurvatureBlock {
    /// `−τ M` (mean curvature flow).
    Mass(f64),
    /// `−τ S` (surface diffusion).
    Stiffness(f64),
}

impl SaddleSystem {
    pub fn new(pattern: &NodePattern, d: usize) -> Result<Self> {
        let b = d + 1;
        let k = pattern.n_nodes();
        let mut col_ptr = Vec::with_capacity(b * k + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0);
        for node in 0..k {
            let nbrs = &pattern.neighbors[pattern.row(node)];
            for c in 0..b {
                for &a in nbrs {
                    if c < d {
                        row_idx.push(a * b + c);
                        row_idx.push(a * b + d);
                    } else {
                        row_idx.extend((0..b).map(|r| a * b + r));
                    }
                }
                col_ptr.push(row_idx.len());
            }
        }
        Ok(SaddleSystem {
            d,
            lu: SparseLu::new(b * k, col_ptr, row_idx)?,
        })
    }

    pub fn n_unknowns(&self) -> usize {
        self.lu.n()
    }

    /// Matrix values in CSC order.
    pub fn values(&self, pattern: &NodePattern, ops: &Operators, block: CurvatureBlock) -> Vec<f64> {
        let d = self.d;
        let mut v = Vec::with_capacity(self.lu.nnz());
        for node in 0..pattern.n_nodes() {
            for c in 0..=d {
                for p in pattern.row(node) {
                    let n = &ops.normal[p];
                    if c < d {
                        v.push(ops.stiffness[p]);
                        v.push(n[c]);
                    } else {
                        v.extend((0..d).map(|r| n[r]));
                        v.push(match block {
                            CurvatureBlock::Mass(tau) => -tau * ops.mass[p],
                            CurvatureBlock::Stiffness(tau) => -tau * ops.stiffness[p],
                        });
                    }
                }
            }
        }
        v
    }

    /// Right-hand side: zero in the position rows, `Σ_b N_ab · Y_b` in the curvature rows.
    pub fn rhs(&self, pattern: &NodePattern, ops: &Operators, coords: &[Point]) -> Vec<f64> {
        let b = self.d + 1;
        let mut r = vec![0.0; self.lu.n()];
        for a in 0..pattern.n_nodes() {
            let s: f64 = pattern
                .row(a)
                .map(|p| ops.normal[p].dot(&coords[pattern.neighbors[p]]))
                .sum();
            r[a * b + self.d] = s;
        }
        r
    }

    /// Solves and splits the solution into positions and curvature values.
    pub fn solve(&self, values: &[f64], rhs: Vec<f64>) -> Result<(Vec<Point>, Vec<f64>)> {
        let x = self.lu.solve(values, &[rhs])?.pop().expect("one column");
        let b = self.d + 1;
        let k = x.len() / b;
        let mut pos = Vec::with_capacity(k);
        let mut kappa = Vec::with_capacity(k);
        for a in 0..k {
            let mut p = Point::zeros();
            for c in 0..self.d {
                p[c] = x[a * b + c];
            }
            pos.push(p);
            kappa.push(x[a * b + self.d]);
        }
        Ok((pos, kappa))
    }

    pub fn lu(&self) -> &SparseLu {
        &self.lu
    }
}

/// Scalar node-pattern system (Dziuk-type step, curvature initialization).
#[derive(Clone, Debug)]
pub struct ScalarSystem {
    lu: SparseLu,
}

impl ScalarSystem {
    pub fn new(pattern: &NodePattern) -> Result<Self> {
        Ok(ScalarSystem {
            lu: SparseLu::new(pattern.n_nodes(), pattern.offsets.clone(), pattern.neighbors.clone())?,
        })
    }

    pub fn solve(&self, values: &[f64], rhs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        self.lu.solve(values, rhs)
    }
}
