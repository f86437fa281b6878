//! Time steppers: BGN with (elevated-order or plain) quadrature, the structure
//! preserving variant for surface diffusion, and the Dziuk-type scheme for mean
//! curvature flow.

mod assembly;
mod linear;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::fem::{LagrangeBasis, QuadratureRule, Tabulation};
use crate::geometry::{element_measures, enclosed_measure, ParametrizedGrid};
use crate::{Error, Point, Result};

pub use assembly::{assemble, reassemble_normal, weighted_intermediate_normal, NodePattern, NormalSource, Operators};
pub use linear::{CurvatureBlock, SaddleSystem, ScalarSystem, SparseLu};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flow {
    MeanCurvature,
    SurfaceDiffusion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// BGN with a high-order rule standing in for exact integration.
    BgnExact,
    BgnQuadrature,
    /// Volume/area conserving intermediate-normal scheme, solved by Picard iteration.
    StructurePreserving,
    Dziuk,
}

impl Flow {
    pub const ALL: [Flow; 2] = [Flow::MeanCurvature, Flow::SurfaceDiffusion];
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::BgnExact,
        Variant::BgnQuadrature,
        Variant::StructurePreserving,
        Variant::Dziuk,
    ];
}

impl fmt::Display for Flow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Flow::MeanCurvature => "mcf",
            Flow::SurfaceDiffusion => "sd",
        })
    }
}

impl FromStr for Flow {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mcf" => Ok(Flow::MeanCurvature),
            "sd" => Ok(Flow::SurfaceDiffusion),
            other => Err(format!("unknown flow '{other}' (expected mcf or sd)")),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::BgnExact => "bgn_exact",
            Variant::BgnQuadrature => "bgn_quadrature",
            Variant::StructurePreserving => "sp",
            Variant::Dziuk => "dziuk",
        })
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Variant::ALL
            .into_iter()
            .find(|v| v.to_string() == s)
            .ok_or_else(|| format!("unknown variant '{s}' (expected bgn_exact, bgn_quadrature, sp or dziuk)"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeConfig {
    pub flow: Flow,
    pub variant: Variant,
    pub degree: usize,
    pub tau: f64,
    pub quad_order: usize,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
}

impl SchemeConfig {
    pub fn new(flow: Flow, variant: Variant, degree: usize, tau: f64) -> Self {
        SchemeConfig {
            flow,
            variant,
            degree,
            tau,
            quad_order: 10 * degree,
            picard_tol: 1e-12,
            picard_max_iter: 100,
        }
    }

    pub fn with_quad_order(mut self, p: usize) -> Self {
        self.quad_order = p;
        self
    }

    /// Order actually used; the exact-integration surrogate never drops below
    /// `max(10ℓ, 2ℓ + 2)`.
    pub fn effective_quad_order(&self) -> usize {
        match self.variant {
            Variant::BgnExact => self.quad_order.max(10 * self.degree).max(2 * self.degree + 2),
            _ => self.quad_order,
        }
    }

    pub fn rule(&self, dim: usize) -> QuadratureRule {
        QuadratureRule::gauss(dim, self.effective_quad_order())
    }

    /// Every violated requirement for grids of topological dimension `dim`.
    pub fn problems(&self, dim: usize) -> Vec<String> {
        let mut out = Vec::new();
        if !(1..=crate::fem::MAX_DEGREE).contains(&self.degree) {
            out.push(format!("degree must be in 1..={}, got {}", crate::fem::MAX_DEGREE, self.degree));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            out.push(format!("time step must be positive, got {}", self.tau));
        }
        if self.quad_order == 0 {
            out.push("quad_order must be at least 1".into());
        }
        if !(self.picard_tol.is_finite() && self.picard_tol > 0.0) {
            out.push(format!("picard_tol must be positive, got {}", self.picard_tol));
        }
        if self.picard_max_iter == 0 {
            out.push("picard_max_iter must be at least 1".into());
        }
        match self.variant {
            Variant::StructurePreserving => {
                if self.flow != Flow::SurfaceDiffusion {
                    out.push("the structure preserving variant is defined for surface diffusion only".into());
                }
                let required = if dim == 1 { 2 * self.degree - 1 } else { (3 * self.degree).saturating_sub(2) };
                if self.quad_order < required {
                    out.push(format!(
                        "structure preserving variant needs quad_order >= {required} so that the enclosed {} is conserved exactly, got {}",
                        if dim == 1 { "area" } else { "volume" },
                        self.quad_order
                    ));
                }
            }
            Variant::Dziuk if self.flow != Flow::MeanCurvature => {
                out.push("the Dziuk-type variant is defined for mean curvature flow only".into());
            }
            _ => {}
        }
        if out.is_empty() && (dim == 1 || dim == 2) {
            if let Ok(basis) = LagrangeBasis::new(self.degree, dim) {
                if !self.rule(dim).is_unisolvent_for(&basis) {
                    out.push(format!(
                        "quad_order {} gives too few quadrature points for degree {} (need a unisolvent rule)",
                        self.quad_order, self.degree
                    ));
                }
            }
        }
        out
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let p = self.problems(dim);
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(p.join("; ")))
        }
    }
}

/// Geometric quantities of one grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurements {
    /// Perimeter `L_h` or surface area `S_h` under the run's rule.
    pub energy: f64,
    /// Enclosed area `A_h` or volume `V_h`.
    pub enclosed: f64,
    /// `Ψ = max |σ_j| / min |σ_j|`.
    pub mesh_quality: f64,
}

#[derive(Clone, Debug)]
pub struct StepResult {
    pub grid: ParametrizedGrid,
    /// Curvature values at the Lagrange nodes; empty for the Dziuk-type scheme.
    pub curvature: Vec<f64>,
    pub picard_iters: usize,
    pub measurements: Measurements,
}

/// One row of a run's diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
    pub energy_norm: f64,
    pub enclosed: f64,
    pub enclosed_rel_loss: f64,
    pub mesh_quality: f64,
    pub picard_iters: usize,
}

impl DiagnosticsRecord {
    pub fn new(step: usize, time: f64, m: &Measurements, initial: &Measurements, picard_iters: usize) -> Self {
        DiagnosticsRecord {
            step,
            time,
            energy: m.energy,
            energy_norm: m.energy / initial.energy,
            enclosed: m.enclosed,
            enclosed_rel_loss: (m.enclosed - initial.enclosed) / initial.enclosed,
            mesh_quality: m.mesh_quality,
            picard_iters,
        }
    }
}

/// Reusable per-run state: tabulated basis, node pattern and symbolic factorizations.
#[derive(Debug)]
pub struct Stepper {
    config: SchemeConfig,
    rule: QuadratureRule,
    enclosed_rule: QuadratureRule,
    tab: Tabulation,
    pattern: NodePattern,
    saddle: Option<SaddleSystem>,
    scalar: Option<ScalarSystem>,
    curvature: Option<Vec<f64>>,
}

impl Stepper {
    pub fn new(grid: &ParametrizedGrid, config: &SchemeConfig) -> Result<Self> {
        if config.degree != grid.degree() {
            return Err(Error::InvalidArgument(format!(
                "scheme degree {} does not match grid degree {}",
                config.degree,
                grid.degree()
            )));
        }
        config.validate(grid.dim())?;
        let rule = config.rule(grid.dim());
        let required = if grid.dim() == 1 { 2 * grid.degree() - 1 } else { 3 * grid.degree() - 2 };
        let enclosed_rule = if rule.order() >= required {
            rule.clone()
        } else {
            QuadratureRule::gauss(grid.dim(), required)
        };
        let pattern = NodePattern::new(grid);
        let (saddle, scalar) = match config.variant {
            Variant::Dziuk => (None, Some(ScalarSystem::new(&pattern)?)),
            _ => (Some(SaddleSystem::new(&pattern, grid.ambient_dim())?), None),
        };
        Ok(Stepper {
            config: config.clone(),
            tab: grid.tabulate(&rule),
            rule,
            enclosed_rule,
            pattern,
            saddle,
            scalar,
            curvature: None,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Curvature carried over to warm-start the next Picard iteration.
    pub fn curvature(&self) -> Option<&[f64]> {
        self.curvature.as_deref()
    }

    pub fn measure(&self, grid: &ParametrizedGrid) -> Result<Measurements> {
        let m = element_measures(grid, &self.rule)?;
        let (lo, hi) = m.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        Ok(Measurements {
            energy: m.iter().sum(),
            enclosed: enclosed_measure(grid, &self.enclosed_rule)?,
            mesh_quality: hi / lo,
        })
    }

    pub fn step(&mut self, grid: &ParametrizedGrid) -> Result<StepResult> {
        if grid.n_nodes() != self.pattern.n_nodes() {
            return Err(Error::InvalidArgument("grid does not match the stepper's discretization".into()));
        }
        let (coords, curvature, picard_iters) = match self.config.variant {
            Variant::Dziuk => (self.dziuk(grid)?, Vec::new(), 0),
            Variant::BgnExact | Variant::BgnQuadrature => {
                let (x, k) = self.bgn(grid)?;
                (x, k, 0)
            }
            Variant::StructurePreserving => self.picard(grid)?,
        };
        let new_grid = grid.with_coords(coords)?;
        let measurements = self.measure(&new_grid)?;
        if !curvature.is_empty() {
            self.curvature = Some(curvature.clone());
        }
        Ok(StepResult {
            grid: new_grid,
            curvature,
            picard_iters,
            measurements,
        })
    }

    fn block(&self) -> CurvatureBlock {
        match self.config.flow {
            Flow::MeanCurvature => CurvatureBlock::Mass(self.config.tau),
            Flow::SurfaceDiffusion => CurvatureBlock::Stiffness(self.config.tau),
        }
    }

    fn bgn(&self, grid: &ParametrizedGrid) -> Result<(Vec<Point>, Vec<f64>)> {
        let ops = assemble(grid, &self.tab, &self.pattern, NormalSource::Current)?;
        let sys = self.saddle.as_ref().expect("saddle system for BGN variants");
        let values = sys.values(&self.pattern, &ops, self.block());
        sys.solve(&values, sys.rhs(&self.pattern, &ops, grid.coords()))
    }

    fn dziuk(&self, grid: &ParametrizedGrid) -> Result<Vec<Point>> {
        let ops = assemble(grid, &self.tab, &self.pattern, NormalSource::Current)?;
        let tau = self.config.tau;
        let values: Vec<f64> = ops.mass.iter().zip(&ops.stiffness).map(|(m, s)| m + tau * s).collect();
        let d = grid.ambient_dim();
        let rhs: Vec<Vec<f64>> = (0..d)
            .map(|c| {
                (0..self.pattern.n_nodes())
                    .map(|a| {
                        self.pattern
                            .row(a)
                            .map(|p| ops.mass[p] * grid.coords()[self.pattern.neighbors[p]][c])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let sol = self.scalar.as_ref().expect("scalar system for Dziuk").solve(&values, &rhs)?;
        Ok((0..self.pattern.n_nodes())
            .map(|a| {
                let mut p = Point::zeros();
                for c in 0..d {
                    p[c] = sol[c][a];
                }
                p
            })
            .collect())
    }

    fn picard(&mut self, grid: &ParametrizedGrid) -> Result<(Vec<Point>, Vec<f64>, usize)> {
        let mut ops = assemble(grid, &self.tab, &self.pattern, NormalSource::Current)?;
        let mut kappa = match self.curvature.take() {
            Some(k) => k,
            None => initial_curvature(grid, &self.pattern, &ops)?,
        };
        let sys = self.saddle.as_ref().expect("saddle system for SP");
        let block = self.block();
        let mut iterate = grid.clone();
        let mut residual = f64::INFINITY;
        for i in 0..self.config.picard_max_iter {
            if i > 0 {
                reassemble_normal(grid, &self.tab, &self.pattern, NormalSource::Intermediate(&iterate), &mut ops)?;
            }
            let values = sys.values(&self.pattern, &ops, block);
            let (x, k) = sys.solve(&values, sys.rhs(&self.pattern, &ops, grid.coords()))?;
            let dx = x
                .iter()
                .zip(iterate.coords())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).amax()));
            let dk = k.iter().zip(&kappa).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            residual = dx + dk;
            iterate = grid.with_coords(x)?;
            kappa = k;
            log::trace!("picard sweep {}: residual {residual:e}", i + 1);
            if residual <= self.config.picard_tol {
                return Ok((iterate.coords().to_vec(), kappa, i + 1));
            }
        }
        Err(Error::PicardNonConvergence {
            iterations: self.config.picard_max_iter,
            residual,
        })
    }
}

/// Least-squares curvature of a grid: minimizes the residual of
/// `(κ n, η)^h + (∇_Γ id, ∇_Γ η)^h = 0` over all vector test functions,
/// i.e. solves `NᵀN κ = −Nᵀ (S ⊗ I) Y`.
pub fn initial_curvature(grid: &ParametrizedGrid, pattern: &NodePattern, ops: &Operators) -> Result<Vec<f64>> {
    let k = pattern.n_nodes();
    let coords = grid.coords();
    let s_y: Vec<Point> = (0..k)
        .map(|a| pattern.row(a).map(|p| coords[pattern.neighbors[p]] * ops.stiffness[p]).sum())
        .collect();
    let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut rhs = vec![0.0; k];
    for (a, sy) in s_y.iter().enumerate() {
        for p in pattern.row(a) {
            let b = pattern.neighbors[p];
            rhs[b] -= ops.normal[p].dot(sy);
            for q in pattern.row(a) {
                *entries.entry((b, pattern.neighbors[q])).or_insert(0.0) += ops.normal[p].dot(&ops.normal[q]);
            }
        }
    }
    // NᵀN is symmetric, so the (row, col) keys double as (col, row) in CSC order.
    let mut col_ptr = vec![0; k + 1];
    let mut row_idx = Vec::with_capacity(entries.len());
    let mut values = Vec::with_capacity(entries.len());
    for (&(col, row), &v) in &entries {
        col_ptr[col + 1] += 1;
        row_idx.push(row);
        values.push(v);
    }
    for c in 0..k {
        col_ptr[c + 1] += col_ptr[c];
    }
    let lu = SparseLu::new(k, col_ptr, row_idx)?;
    Ok(lu.solve(&values, &[rhs])?.pop().expect("one column"))
}

/// Intermediate normal of the structure preserving curve scheme at `x` on element `j`:
/// `(∂Y^{m+1} + ∂Y^m)^⊥ / (2 |∂Y^m|)`.
pub fn intermediate_normal_curve(grid: &ParametrizedGrid, next: &ParametrizedGrid, j: usize, x: [f64; 2]) -> Result<Point> {
    intermediate_normal(grid, next, j, x, 1)
}

/// Intermediate normal of the structure preserving surface scheme at `x` on element `j`:
/// `(𝒥(Y^m) + 4𝒥(Y^{m+½}) + 𝒥(Y^{m+1})) / (6 |𝒥(Y^m)|)`.
pub fn intermediate_normal_surface(grid: &ParametrizedGrid, next: &ParametrizedGrid, j: usize, x: [f64; 2]) -> Result<Point> {
    intermediate_normal(grid, next, j, x, 2)
}

fn intermediate_normal(grid: &ParametrizedGrid, next: &ParametrizedGrid, j: usize, x: [f64; 2], dim: usize) -> Result<Point> {
    if grid.dim() != dim || next.dim() != dim || grid.n_nodes() != next.n_nodes() {
        return Err(Error::InvalidArgument("grids must share the discretization and dimension".into()));
    }
    let fm = grid.frame_at(j, x)?;
    // The iterate may itself be degenerate here; only its tangents are needed.
    let mut local = Vec::new();
    next.element_coords(j, &mut local);
    let mut t = [Point::zeros(); 2];
    for (c, d) in local.iter().zip(next.basis().grad(x)) {
        t[0] += c * d[0];
        t[1] += c * d[1];
    }
    Ok(weighted_intermediate_normal(dim, &fm.tangents, &t) / fm.measure)
}

pub fn step_bgn(grid: &ParametrizedGrid, config: &SchemeConfig) -> Result<StepResult> {
    if !matches!(config.variant, Variant::BgnExact | Variant::BgnQuadrature) {
        return Err(Error::InvalidArgument(format!("step_bgn called with variant {}", config.variant)));
    }
    Stepper::new(grid, config)?.step(grid)
}

pub fn step_dziuk(grid: &ParametrizedGrid, config: &SchemeConfig) -> Result<StepResult> {
    if config.variant != Variant::Dziuk {
        return Err(Error::InvalidArgument(format!("step_dziuk called with variant {}", config.variant)));
    }
    Stepper::new(grid, config)?.step(grid)
}

/// One structure preserving step; the Picard loop starts from the least-squares
/// curvature of `grid` unless `curvature` is given.
pub fn step_sp(grid: &ParametrizedGrid, config: &SchemeConfig, curvature: Option<Vec<f64>>) -> Result<StepResult> {
    if config.variant != Variant::StructurePreserving {
        return Err(Error::InvalidArgument(format!("step_sp called with variant {}", config.variant)));
    }
    let mut s = Stepper::new(grid, config)?;
    s.curvature = curvature;
    s.step(grid)
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: ParametrizedGrid,
    pub curvature: Vec<f64>,
    pub records: Vec<DiagnosticsRecord>,
}

/// Runs `n_steps` steps. `observer` sees the initial state (step 0) and every
/// accepted step; step errors come back annotated with the step index and time.
pub fn evolve(
    grid: &ParametrizedGrid,
    config: &SchemeConfig,
    n_steps: usize,
    mut observer: impl FnMut(&DiagnosticsRecord, &ParametrizedGrid) -> Result<()>,
) -> Result<Trajectory> {
    let mut stepper = Stepper::new(grid, config)?;
    let initial = stepper.measure(grid)?;
    let first = DiagnosticsRecord::new(0, 0.0, &initial, &initial, 0);
    observer(&first, grid)?;
    let mut records = vec![first];
    let mut current = grid.clone();
    let mut curvature = Vec::new();
    for m in 0..n_steps {
        let time = (m + 1) as f64 * config.tau;
        let res = stepper.step(&current).map_err(|e| Error::AtStep {
            step: m + 1,
            time,
            source: Box::new(e),
        })?;
        let rec = DiagnosticsRecord::new(m + 1, time, &res.measurements, &initial, res.picard_iters);
        observer(&rec, &res.grid)?;
        records.push(rec);
        current = res.grid;
        curvature = res.curvature;
    }
    Ok(Trajectory {
        grid: current,
        curvature,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refmesh::{build_polygon, build_triangulation, Shape, TriangulationTarget};

    fn circle(n: usize, l: usize) -> ParametrizedGrid {
        ParametrizedGrid::interpolate_shape(build_polygon(Shape::unit_circle(), n).unwrap(), l).unwrap()
    }

    #[test]
    fn shrinking_circle_one_step() {
        let g = circle(128, 1);
        let tau: f64 = 1e-4;
        let r = (1.0f64 - 2.0 * tau).sqrt();
        for variant in [Variant::BgnExact, Variant::BgnQuadrature, Variant::Dziuk] {
            let cfg = SchemeConfig::new(Flow::MeanCurvature, variant, 1, tau);
            let res = Stepper::new(&g, &cfg).unwrap().step(&g).unwrap();
            for p in res.grid.coords() {
                assert!((p.norm() - r).abs() < 1e-5, "{variant}");
            }
        }
        // Regular polygon, P1: both schemes move nodes radially with closed-form factors.
        let theta = 2.0 * std::f64::consts::PI / 128.0;
        let h = 2.0 * (theta / 2.0).sin();
        let c = (theta / 2.0).cos();
        let s = 2.0 * (1.0 - theta.cos()) / h;
        let m = h * (2.0 + theta.cos()) / 3.0;
        let bgn = step_bgn(&g, &SchemeConfig::new(Flow::MeanCurvature, Variant::BgnQuadrature, 1, tau)).unwrap();
        let dz = step_dziuk(&g, &SchemeConfig::new(Flow::MeanCurvature, Variant::Dziuk, 1, tau)).unwrap();
        let rb = 1.0 / (1.0 + tau * s / (h * c * c));
        let rd = m / (m + tau * s);
        for (p, q) in bgn.grid.coords().iter().zip(dz.grid.coords()) {
            assert!((p.norm() - rb).abs() < 1e-13);
            assert!((q.norm() - rd).abs() < 1e-13);
        }
        // the two radial factors differ only at order τh²
        assert!((rb - rd).abs() < tau * theta * theta);
    }

    #[test]
    fn shrinking_sphere_one_step() {
        let tau: f64 = 1e-4;
        let expected = 1.0 - (1.0 - 4.0 * tau).sqrt();
        let drop = |level, l| {
            let r = build_triangulation(Shape::unit_sphere(), TriangulationTarget::Refinements(level)).unwrap();
            let g = ParametrizedGrid::interpolate_shape(r, l).unwrap();
            let res = step_bgn(&g, &SchemeConfig::new(Flow::MeanCurvature, Variant::BgnExact, l, tau)).unwrap();
            1.0 - res.grid.coords().iter().map(|p| p.norm()).sum::<f64>() / res.grid.n_nodes() as f64
        };
        let coarse = (drop(2, 1) - expected).abs();
        let fine = (drop(3, 1) - expected).abs();
        assert!(fine < 0.25 * coarse);
        assert!((drop(3, 2) - expected).abs() < 0.02 * expected);
    }

    #[test]
    fn circle_is_surface_diffusion_equilibrium() {
        let g = circle(64, 2);
        let cfg = SchemeConfig::new(Flow::SurfaceDiffusion, Variant::BgnQuadrature, 2, 1e-3);
        let mut s = Stepper::new(&g, &cfg).unwrap();
        let before = s.measure(&g).unwrap();
        let after = s.step(&g).unwrap().measurements;
        assert!(((after.enclosed - before.enclosed) / before.enclosed).abs() < 1e-6);
        let sp = SchemeConfig::new(Flow::SurfaceDiffusion, Variant::StructurePreserving, 2, 1e-3);
        let res = step_sp(&g, &sp, None).unwrap();
        assert!(res.picard_iters <= 3, "{} sweeps", res.picard_iters);
    }

    #[test]
    fn curvature_of_circle() {
        let g = circle(64, 2);
        let cfg = SchemeConfig::new(Flow::SurfaceDiffusion, Variant::StructurePreserving, 2, 1e-3);
        let rule = cfg.rule(1);
        let p = NodePattern::new(&g);
        let ops = assemble(&g, &g.tabulate(&rule), &p, NormalSource::Current).unwrap();
        for k in initial_curvature(&g, &p, &ops).unwrap() {
            assert!((k + 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn config_validation() {
        let sp = SchemeConfig::new(Flow::SurfaceDiffusion, Variant::StructurePreserving, 3, 0.1).with_quad_order(4);
        assert!(sp.problems(1).iter().any(|m| m.contains("conserved")));
        let sp_surface = SchemeConfig::new(Flow::SurfaceDiffusion, Variant::StructurePreserving, 3, 0.1).with_quad_order(6);
        assert!(!sp_surface.problems(2).is_empty());
        let dz = SchemeConfig::new(Flow::SurfaceDiffusion, Variant::Dziuk, 1, 0.1);
        assert!(!dz.problems(1).is_empty());
        let bad = SchemeConfig::new(Flow::MeanCurvature, Variant::BgnQuadrature, 7, -1.0);
        assert_eq!(bad.problems(1).len(), 2);
        assert_eq!(SchemeConfig::new(Flow::MeanCurvature, Variant::BgnExact, 1, 0.1).with_quad_order(2).effective_quad_order(), 10);
        assert_eq!("sp".parse::<Variant>().unwrap(), Variant::StructurePreserving);
        assert!("bgn".parse::<Variant>().is_err());
    }

    #[test]
    fn zero_steps_and_translation() {
        let g = circle(32, 2).map_coords(|p| Point::new(2.0 * p.x, p.y, 0.0));
        let cfg = SchemeConfig::new(Flow::SurfaceDiffusion, Variant::BgnQuadrature, 2, 1e-2);
        let t = evolve(&g, &cfg, 0, |_, _| Ok(())).unwrap();
        assert_eq!(t.records.len(), 1);
        assert_eq!(t.records[0].energy_norm, 1.0);
        let c = Point::new(5.0, -3.0, 0.0);
        let a = step_bgn(&g, &cfg).unwrap();
        let b = step_bgn(&g.map_coords(|p| p + c), &cfg).unwrap();
        for (p, q) in a.grid.coords().iter().zip(b.grid.coords()) {
            assert!((p + c - q).norm() < 1e-10 * c.norm());
        }
        let scale = a.curvature.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (k1, k2) in a.curvature.iter().zip(&b.curvature) {
            assert!((k1 - k2).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn intermediate_normal_examples() {
        let g = circle(16, 2);
        let x = [0.3, 0.0];
        let n = g.frame_at(2, x).unwrap().normal;
        assert!((intermediate_normal_curve(&g, &g, 2, x).unwrap() - n).norm() < 1e-14);
        let shifted = g.map_coords(|p| p + Point::new(1.0, 2.0, 0.0));
        assert!((intermediate_normal_curve(&g, &shifted, 2, x).unwrap() - n).norm() < 1e-14);
        let doubled = g.map_coords(|p| p * 2.0);
        assert!((intermediate_normal_curve(&g, &doubled, 2, x).unwrap() - n * 1.5).norm() < 1e-14);
    }
}
