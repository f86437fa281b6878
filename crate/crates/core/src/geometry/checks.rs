use nalgebra::{Matrix2, Matrix2x3, Matrix3, Matrix3x2};

use super::ParametrizedGrid;
use crate::fem::QuadratureRule;
use crate::{Error, Point, Result};

/// Both sides of the pointwise stability lemma at one reference point, for
/// `Ỹ = X ∘ Y`:
/// `lhs = [∇_Γ X : ∇_Γ(X − id)] ∘ Y · |𝒥(Y)|` and `rhs = |𝒥(Ỹ)| − |𝒥(Y)|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaTerms {
    pub lhs: f64,
    pub rhs: f64,
}

pub fn lemma_terms(y: &ParametrizedGrid, y_tilde: &ParametrizedGrid, j: usize, x: [f64; 2]) -> Result<LemmaTerms> {
    check_pair(y, y_tilde)?;
    let frame = y.frame_at(j, x)?;
    let tilde = y_tilde.frame_at(j, x)?;
    let mut ly = Vec::new();
    let mut lt = Vec::new();
    y.element_coords(j, &mut ly);
    y_tilde.element_coords(j, &mut lt);
    let mut grad_x = Matrix3::zeros();
    let mut grad_id = Matrix3::zeros();
    for ((xt, yy), d) in lt.iter().zip(&ly).zip(&frame.grads) {
        grad_x += xt * d.transpose();
        grad_id += yy * d.transpose();
    }
    let lhs = grad_x.dot(&(grad_x - grad_id)) * frame.measure;
    Ok(LemmaTerms {
        lhs,
        rhs: tilde.measure - frame.measure,
    })
}

/// Largest relative residual, over all quadrature points of `rule`, of the chain
/// of measure identities for `Ỹ = X ∘ Y`:
/// `|𝒥(F̃)| = √det(∇F̃ᵀ∇F̃)`, `|𝒥(F̃)| = |𝒥(Ỹ)| |𝒥(A)|` and `|𝒥(Ỹ)| = |𝒥(X)| ∘ Y · |𝒥(Y)|`.
///
/// Each factor is computed on its own manifold from an orthonormal tangent basis.
pub fn jacobian_transform_check(y: &ParametrizedGrid, y_tilde: &ParametrizedGrid, rule: &QuadratureRule) -> Result<f64> {
    check_pair(y, y_tilde)?;
    let dim = y.dim();
    let tab = y.tabulate(rule);
    let mut ly = Vec::new();
    let mut lt = Vec::new();
    let mut worst: f64 = 0.0;
    for j in 0..y.n_elements() {
        let a = y.reference().element_map(j)?.linear;
        y.element_coords(j, &mut ly);
        y_tilde.element_coords(j, &mut lt);
        for q in 0..tab.len() {
            let grad_f = reference_jacobian(&ly, &tab.grads[q]);
            let grad_ft = reference_jacobian(&lt, &tab.grads[q]);
            let jac_ft = measure_of(&grad_ft, dim);
            let gram = grad_ft.transpose() * grad_ft;
            let gram_det = if dim == 1 { gram[(0, 0)] } else { gram.determinant() };

            let jac_a = measure_of(&a, dim);
            let u = orthonormal_basis(&a, dim);
            let a_pinv = pseudo_inverse(&a, dim);
            let jac_y = measure_of(&(grad_f * a_pinv * u), dim);
            let jac_yt = measure_of(&(grad_ft * a_pinv * u), dim);
            let w = orthonormal_basis(&grad_f, dim);
            let grad_x = grad_ft * pseudo_inverse(&grad_f, dim);
            let jac_x = measure_of(&(grad_x * w), dim);

            let scale = jac_ft.max(f64::MIN_POSITIVE);
            worst = worst
                .max((jac_ft - gram_det.sqrt()).abs() / scale)
                .max((jac_ft - jac_yt * jac_a).abs() / scale)
                .max((jac_yt - jac_x * jac_y).abs() / jac_yt.max(f64::MIN_POSITIVE));
        }
    }
    Ok(worst)
}

fn check_pair(y: &ParametrizedGrid, y_tilde: &ParametrizedGrid) -> Result<()> {
    let compatible = y.same_discretization(y_tilde)
        || (y.n_nodes() == y_tilde.n_nodes()
            && y.degree() == y_tilde.degree()
            && y.reference().vertices() == y_tilde.reference().vertices()
            && y.n_elements() == y_tilde.n_elements()
            && (0..y.n_elements()).all(|j| y.reference().element(j) == y_tilde.reference().element(j)));
    if compatible {
        Ok(())
    } else {
        Err(Error::InvalidArgument("grids are not defined over the same reference grid".into()))
    }
}

fn reference_jacobian(local: &[Point], grads: &[[f64; 2]]) -> Matrix3x2<f64> {
    let mut m = Matrix3x2::zeros();
    for (c, d) in local.iter().zip(grads) {
        m += c * nalgebra::RowVector2::new(d[0], d[1]);
    }
    m
}

fn measure_of(m: &Matrix3x2<f64>, dim: usize) -> f64 {
    if dim == 1 {
        m.column(0).norm()
    } else {
        m.column(0).cross(&m.column(1)).norm()
    }
}

fn orthonormal_basis(m: &Matrix3x2<f64>, dim: usize) -> Matrix3x2<f64> {
    let e1 = m.column(0).normalize();
    if dim == 1 {
        return Matrix3x2::from_columns(&[e1, Point::zeros()]);
    }
    let v = m.column(1) - e1 * e1.dot(&m.column(1));
    Matrix3x2::from_columns(&[e1, v.normalize()])
}

/// Left inverse `(MᵀM)⁻¹Mᵀ` of the tangent map on its used columns.
fn pseudo_inverse(m: &Matrix3x2<f64>, dim: usize) -> Matrix2x3<f64> {
    if dim == 1 {
        let c = m.column(0);
        let mut out = Matrix2x3::zeros();
        out.set_row(0, &(c / c.norm_squared()).transpose());
        out
    } else {
        let g = m.transpose() * m;
        g.try_inverse().unwrap_or_else(Matrix2::zeros) * m.transpose()
    }
}
