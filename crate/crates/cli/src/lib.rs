//! Experiment driver: single runs with diagnostics and snapshots, and the
//! convergence-order harness.

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use geomflow::fem::QuadratureRule;
use geomflow::geometry::{write_polyline, write_vtk, ParametrizedGrid};
use geomflow::metrics::{l2_projected_distance, linf_error_exact, ExactTarget};
use geomflow::refmesh::{build_polygon, build_triangulation, read_grid, ReferenceGrid, Shape, TriangulationTarget};
use geomflow::schemes::{evolve, DiagnosticsRecord, Flow};

pub use config::{Duration, EocError, EocSpec, ExperimentConfig, GeometrySpec, MeshSpec};

pub const CSV_HEADER: &str = "step,time,energy,energy_norm,enclosed,enclosed_rel_loss,mesh_quality,picard_iters";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error(transparent)]
    Solver(#[from] geomflow::Error),
}

impl CliError {
    /// Process exit code: 1 I/O, 2 configuration, 3 degenerate grid, 4 other numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solver(e) => match e.root() {
                geomflow::Error::Io(_) => 1,
                geomflow::Error::InvalidArgument(_) | geomflow::Error::Parse { .. } => 2,
                geomflow::Error::Degenerate { .. } => 3,
                _ => 4,
            },
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Smallest segment count whose longest chord on `shape` is at most `h0`.
pub fn polygon_count_for(shape: Shape, h0: f64) -> Result<usize, CliError> {
    let mut n = 3;
    loop {
        let g = build_polygon(shape, n)?;
        if g.h() <= h0 {
            return Ok(n);
        }
        if n > 1 << 22 {
            return Err(CliError::Config(vec![format!("geometry.h0 = {h0} is too small")]));
        }
        n += 1;
    }
}

/// Reference grid of refinement level `level` (level 0 is the configured grid).
pub fn reference_grid(spec: &GeometrySpec, level: usize) -> Result<ReferenceGrid, CliError> {
    let refine = |mut g: ReferenceGrid| {
        for _ in 0..level {
            g = g.refine_uniform();
        }
        g
    };
    Ok(match spec {
        GeometrySpec::File(path) => refine(read_grid(path)?),
        GeometrySpec::Analytic { shape, mesh } => match *mesh {
            MeshSpec::Elements(n) => build_polygon(*shape, n << level)?,
            MeshSpec::MeshSize(h0) => build_polygon(*shape, polygon_count_for(*shape, h0)? << level)?,
            MeshSpec::Refinements(r) => build_triangulation(*shape, TriangulationTarget::Refinements(r + level))?,
            MeshSpec::Counts { elements, vertices } => {
                refine(build_triangulation(*shape, TriangulationTarget::Counts { elements, vertices })?)
            }
        },
    })
}

pub fn initial_grid(spec: &GeometrySpec, level: usize, degree: usize) -> Result<ParametrizedGrid, CliError> {
    let r = reference_grid(spec, level)?;
    Ok(if r.shape().is_some() {
        ParametrizedGrid::interpolate_shape(r, degree)?
    } else {
        ParametrizedGrid::flat(r, degree)?
    })
}

/// Step count and adjusted time step reaching `t_end` exactly.
pub fn steps_for(t_end: f64, tau: f64) -> (usize, f64) {
    if t_end <= 0.0 {
        return (0, tau);
    }
    let n = ((t_end / tau) - 1e-9).ceil().max(1.0) as usize;
    (n, t_end / n as f64)
}

pub fn format_record(r: &DiagnosticsRecord) -> String {
    format!(
        "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
        r.step, r.time, r.energy, r.energy_norm, r.enclosed, r.enclosed_rel_loss, r.mesh_quality, r.picard_iters
    )
}

/// Steps at which snapshots are written: `count + 1` uniformly spaced steps
/// including the first and last.
pub fn snapshot_steps(n_steps: usize, count: usize) -> Vec<usize> {
    if count == 0 {
        return Vec::new();
    }
    let mut v: Vec<usize> = (0..=count).map(|i| (i * n_steps + count / 2) / count).collect();
    v.dedup();
    v
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub records: Vec<DiagnosticsRecord>,
    pub tau: f64,
    pub csv: PathBuf,
    pub snapshots: Vec<PathBuf>,
}

/// Single evolution: `diagnostics.csv`, `config.toml` (resolved echo) and
/// snapshots under `dir/snapshots`.
pub fn run_single(cfg: &ExperimentConfig, dir: &Path) -> Result<RunSummary, CliError> {
    let grid = initial_grid(&cfg.geometry, 0, cfg.degree)?;
    let (n_steps, tau) = match cfg.duration {
        Duration::Steps(n) => (n, cfg.tau),
        Duration::FinalTime(t) => steps_for(t, cfg.tau),
    };
    if tau != cfg.tau {
        log::info!("time step adjusted from {} to {tau} to reach the final time in {n_steps} steps", cfg.tau);
    }
    let mut scheme = cfg.scheme();
    scheme.tau = tau;
    let snap_dir = dir.join("snapshots");
    fs::create_dir_all(&snap_dir).map_err(|e| io_err(&snap_dir, e))?;
    fs::write(dir.join("config.toml"), cfg.echo()).map_err(|e| io_err(dir, e))?;
    let csv_path = dir.join("diagnostics.csv");
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    let wanted = snapshot_steps(n_steps, cfg.snapshots);
    let mut written = Vec::new();
    let rule = scheme.rule(grid.dim());
    let result = evolve(&grid, &scheme, n_steps, |rec, g| {
        csv.push_str(&format_record(rec));
        csv.push('\n');
        if wanted.binary_search(&rec.step).is_ok() {
            let path = if g.dim() == 1 {
                let p = snap_dir.join(format!("step_{:06}.txt", rec.step));
                write_polyline(g, 8, &p)?;
                p
            } else {
                let p = snap_dir.join(format!("step_{:06}.vtk", rec.step));
                write_vtk(g, 2, &rule, &p)?;
                p
            };
            written.push(path);
        }
        log::debug!("step {} t={:.6} energy={:.12e}", rec.step, rec.time, rec.energy);
        Ok(())
    });
    // the rows computed before a failure are still worth keeping
    fs::write(&csv_path, &csv).map_err(|e| io_err(&csv_path, e))?;
    let traj = result?;
    Ok(RunSummary {
        records: traj.records,
        tau,
        csv: csv_path,
        snapshots: written,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EocRow {
    pub level: usize,
    pub h: f64,
    pub tau: f64,
    pub steps: usize,
    pub error: Option<f64>,
    pub order: Option<f64>,
}

#[derive(Debug)]
pub struct EocTable {
    pub rows: Vec<EocRow>,
    /// Level whose run failed, and why; rows from there on carry no error.
    pub failure: Option<(usize, CliError)>,
}

impl EocTable {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.error).collect()
    }

    pub fn orders(&self) -> Vec<Option<f64>> {
        self.rows.iter().filter(|r| r.error.is_some()).map(|r| r.order).collect()
    }

    /// Order between the two finest levels that have errors.
    pub fn finest_order(&self) -> Option<f64> {
        self.orders().last().copied().flatten()
    }

    pub fn format(&self) -> String {
        let mut s = format!("{:>5}  {:>10}  {:>10}  {:>7}  {:>10}  {:>6}\n", "level", "h", "tau", "steps", "error", "order");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>5}  {:>10.3e}  {:>10.3e}  {:>7}  {:>10}  {:>6}",
                r.level,
                r.h,
                r.tau,
                r.steps,
                r.error.map_or("--".to_string(), |e| format!("{e:.3e}")),
                format_order(r.order)
            );
        }
        if let Some((level, e)) = &self.failure {
            let _ = writeln!(s, "level {level} failed: {e}");
        }
        s
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("level,h,tau,steps,error,order\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:.16e},{:.16e},{},{},{}",
                r.level,
                r.h,
                r.tau,
                r.steps,
                r.error.map_or("".to_string(), |e| format!("{e:.16e}")),
                format_order(r.order)
            );
        }
        s
    }
}

pub fn format_order(order: Option<f64>) -> String {
    order.map_or("n/a".to_string(), |o| format!("{o:.2}"))
}

/// `log₂(e_k / e_{k+1})` between consecutive errors; `None` when either error
/// vanishes or is not finite.
pub fn eoc_orders(errors: &[f64]) -> Vec<Option<f64>> {
    let mut out = vec![None];
    for w in errors.windows(2) {
        let ok = w.iter().all(|e| e.is_finite() && *e > 0.0);
        out.push(ok.then(|| (w[0] / w[1]).log2()));
    }
    out.truncate(errors.len());
    out
}

/// Projected `L²` distances between consecutive finals, each measured with the
/// coarser level's rule.
pub fn inter_level_errors(finals: &[(ParametrizedGrid, QuadratureRule)], k: usize) -> Result<Vec<f64>, CliError> {
    finals
        .windows(2)
        .map(|w| Ok(l2_projected_distance(&w[0].0, &w[1].0, &w[0].1, k)?))
        .collect()
}

/// Worker count: `GEOMFLOW_THREADS` if set, else the available parallelism.
pub fn worker_count() -> usize {
    std::env::var("GEOMFLOW_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

struct LevelRun {
    h: f64,
    tau: f64,
    steps: usize,
    result: Result<(ParametrizedGrid, QuadratureRule), CliError>,
}

fn run_level(cfg: &ExperimentConfig, level: usize, t_end: f64) -> LevelRun {
    let tau0 = cfg.tau / 2f64.powi(((cfg.degree + 1) * level) as i32);
    let (steps, tau) = steps_for(t_end, tau0);
    let mut h = f64::NAN;
    let result = (|| {
        let grid = initial_grid(&cfg.geometry, level, cfg.degree)?;
        h = grid.reference().h();
        let mut scheme = cfg.scheme();
        scheme.tau = tau;
        let rule = scheme.rule(grid.dim());
        let t = evolve(&grid, &scheme, steps, |_, _| Ok(()))?;
        log::info!("level {level}: {} elements, {steps} steps of {tau:e} done", grid.n_elements());
        Ok((t.grid, rule))
    })();
    LevelRun { h, tau, steps, result }
}

/// Refinement study: level `k` halves `h` and scales `τ` by `2^{−(ℓ+1)k}`.
/// Independent levels run on up to [`worker_count`] threads.
pub fn run_eoc(cfg: &ExperimentConfig) -> EocTable {
    let t_end = match cfg.duration {
        Duration::FinalTime(t) => t,
        Duration::Steps(n) => n as f64 * cfg.tau,
    };
    let levels = cfg.eoc.levels;
    let workers = worker_count().min(levels).max(1);
    let mut runs: Vec<Option<LevelRun>> = (0..levels).map(|_| None).collect();
    // finest levels first so the longest runs start early
    let order: Vec<usize> = (0..levels).rev().collect();
    for chunk in order.chunks(workers) {
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk.iter().map(|&k| (k, s.spawn(move || run_level(cfg, k, t_end)))).collect();
            for (k, h) in handles {
                runs[k] = Some(h.join().expect("level run panicked"));
            }
        });
    }
    let runs: Vec<LevelRun> = runs.into_iter().map(|r| r.expect("every level ran")).collect();

    let mut failure = None;
    let mut finals = Vec::new();
    let mut meta = Vec::new();
    for (k, r) in runs.into_iter().enumerate() {
        meta.push((r.h, r.tau, r.steps));
        match r.result {
            Ok(f) if failure.is_none() => finals.push(f),
            Ok(_) => {}
            Err(e) => {
                if failure.is_none() {
                    failure = Some((k, e));
                }
            }
        }
    }
    let errors: Result<Vec<f64>, CliError> = match cfg.eoc.error {
        EocError::Exact => {
            let (target, r2) = match &cfg.geometry {
                GeometrySpec::Analytic {
                    shape: Shape::Circle { radius },
                    ..
                } => (ExactTarget::Circle as fn(f64) -> ExactTarget, radius * radius - 2.0 * t_end),
                GeometrySpec::Analytic {
                    shape: Shape::Sphere { radius },
                    ..
                } => (ExactTarget::Sphere as fn(f64) -> ExactTarget, radius * radius - 4.0 * t_end),
                _ => unreachable!("validated at parse time"),
            };
            if cfg.flow != Flow::MeanCurvature || r2 <= 0.0 {
                Err(CliError::Config(vec!["exact solution is extinct before the final time".into()]))
            } else {
                finals
                    .iter()
                    .map(|(g, rule)| Ok(linf_error_exact(g, target(r2.sqrt()), rule)?))
                    .collect()
            }
        }
        EocError::InterLevel => inter_level_errors(&finals, cfg.eoc.neighbors),
    };
    let errors = match errors {
        Ok(e) => e,
        Err(e) => {
            if failure.is_none() {
                failure = Some((finals.len(), e));
            }
            Vec::new()
        }
    };
    let orders = eoc_orders(&errors);
    let rows = meta
        .into_iter()
        .enumerate()
        .map(|(k, (h, tau, steps))| EocRow {
            level: k,
            h,
            tau,
            steps,
            error: errors.get(k).copied(),
            order: orders.get(k).copied().flatten(),
        })
        .collect();
    EocTable { rows, failure }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_of_sequences() {
        let o = eoc_orders(&[4e-2, 1e-2, 2.5e-3]);
        assert_eq!(o[0], None);
        assert!((o[1].unwrap() - 2.0).abs() < 1e-12 && (o[2].unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(eoc_orders(&[0.0, 0.0]), vec![None, None]);
        assert_eq!(format_order(None), "n/a");
    }

    #[test]
    fn identical_levels_give_zero_error() {
        let g = ParametrizedGrid::interpolate_shape(build_polygon(Shape::unit_circle(), 12).unwrap(), 2).unwrap();
        let rule = QuadratureRule::gauss_interval(6);
        let finals = vec![(g.clone(), rule.clone()), (g, rule)];
        let e = inter_level_errors(&finals, 8).unwrap();
        assert!(e[0] <= 1e-10);
        assert_eq!(eoc_orders(&[0.0, 0.0])[1], None);
    }

    #[test]
    fn step_rounding() {
        assert_eq!(steps_for(0.05, 0.05), (1, 0.05));
        assert_eq!(steps_for(0.05, 0.05 / 16.0).0, 16);
        let (n, tau) = steps_for(1.0, 0.3);
        assert_eq!(n, 4);
        assert_eq!(tau, 0.25);
        assert_eq!(steps_for(0.0, 0.01), (0, 0.01));
    }

    #[test]
    fn snapshot_cadence() {
        assert_eq!(snapshot_steps(100, 10), (0..=10).map(|i| 10 * i).collect::<Vec<_>>());
        assert_eq!(snapshot_steps(3, 10), vec![0, 1, 2, 3]);
        assert_eq!(snapshot_steps(0, 10), vec![0]);
        assert!(snapshot_steps(5, 0).is_empty());
    }

    #[test]
    fn h0_mapping() {
        assert_eq!(polygon_count_for(Shape::unit_circle(), 0.2).unwrap(), 32);
        assert_eq!(polygon_count_for(Shape::Ellipse { a: 2.0, b: 1.0 }, 0.3).unwrap(), 42);
    }
}
