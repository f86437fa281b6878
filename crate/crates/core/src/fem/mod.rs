//! Reference-simplex finite element tables: Lagrange bases and quadrature rules.

mod basis;
mod quadrature;

pub use basis::{LagrangeBasis, NodeEntity, MAX_DEGREE};
pub use quadrature::QuadratureRule;

/// Basis values and reference gradients tabulated at the points of a rule.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub values: Vec<Vec<f64>>,
    pub grads: Vec<Vec<[f64; 2]>>,
    pub weights: Vec<f64>,
    pub points: Vec<[f64; 2]>,
}

impl Tabulation {
    pub fn new(basis: &LagrangeBasis, rule: &QuadratureRule) -> Self {
        Tabulation {
            values: rule.points().iter().map(|&x| basis.eval(x)).collect(),
            grads: rule.points().iter().map(|&x| basis.grad(x)).collect(),
            weights: rule.weights().to_vec(),
            points: rule.points().to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}
