use nalgebra::DMatrix;

use super::LagrangeBasis;

/// Quadrature rule on the reference interval `[0, 1]` or the unit triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    dim: usize,
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
    order: usize,
}

impl QuadratureRule {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Polynomial degree integrated exactly.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn positive_weights(&self) -> bool {
        self.weights.iter().all(|&w| w > 0.0)
    }

    /// Gauss–Legendre rule on `[0, 1]` with `⌈(p+1)/2⌉` points.
    pub fn gauss_interval(order: usize) -> Self {
        let n = (order + 2) / 2;
        let (x, w) = gauss_legendre(n.max(1));
        QuadratureRule {
            dim: 1,
            points: x.iter().map(|&t| [0.5 * (t + 1.0), 0.0]).collect(),
            weights: w.iter().map(|&w| 0.5 * w).collect(),
            order: 2 * n.max(1) - 1,
        }
    }

    /// Trapezoidal rule with nodes at the interval endpoints (lumped mass).
    pub fn lumped_interval() -> Self {
        QuadratureRule {
            dim: 1,
            points: vec![[0.0, 0.0], [1.0, 0.0]],
            weights: vec![0.5, 0.5],
            order: 1,
        }
    }

    /// Collapsed (Duffy) tensor Gauss rule on the unit triangle with all weights
    /// positive and exactness at least `order`.
    pub fn gauss_triangle(order: usize) -> Self {
        let order = order.max(1);
        // x = u, y = (1 − u) v, Jacobian (1 − u): degree p + 1 in u, p in v.
        let nu = (order + 3) / 2;
        let nv = (order + 2) / 2;
        let (xu, wu) = gauss_legendre(nu);
        let (xv, wv) = gauss_legendre(nv);
        let mut points = Vec::with_capacity(nu * nv);
        let mut weights = Vec::with_capacity(nu * nv);
        for (tu, wu) in xu.iter().zip(&wu) {
            let u = 0.5 * (tu + 1.0);
            for (tv, wv) in xv.iter().zip(&wv) {
                let v = 0.5 * (tv + 1.0);
                points.push([u, (1.0 - u) * v]);
                weights.push(0.25 * wu * wv * (1.0 - u));
            }
        }
        QuadratureRule {
            dim: 2,
            points,
            weights,
            order: (2 * nu - 2).min(2 * nv - 1),
        }
    }

    pub fn gauss(dim: usize, order: usize) -> Self {
        if dim == 1 {
            Self::gauss_interval(order)
        } else {
            Self::gauss_triangle(order)
        }
    }

    /// Unisolvence of `basis` at the quadrature points: the `n_dofs × Q`
    /// evaluation matrix has full row rank.
    pub fn is_unisolvent_for(&self, basis: &LagrangeBasis) -> bool {
        let n = basis.n_dofs();
        if self.len() < n {
            return false;
        }
        let mut m = DMatrix::zeros(n, self.len());
        for (q, &x) in self.points.iter().enumerate() {
            for (i, v) in basis.eval(x).into_iter().enumerate() {
                m[(i, q)] = v;
            }
        }
        let sv = m.singular_values();
        let max = sv.max();
        sv.iter().filter(|&&s| s > 1e-10 * max).count() == n
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` via Newton iteration on `P_n`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, t);
        dp = if d != 0.0 { d } else { dp };
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `(P_n(t), P_n'(t))` by the three-term recurrence.
fn legendre(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}
