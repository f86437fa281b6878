use std::fmt::Write as _;
use std::path::Path;

use super::{element_measures, ParametrizedGrid};
use crate::fem::QuadratureRule;
use crate::{Error, Result};

/// Dense sampling of a curve: `samples` points per element plus the closing point,
/// one `x y` pair per line.
pub fn format_polyline(grid: &ParametrizedGrid, samples: usize) -> Result<String> {
    if grid.dim() != 1 || samples == 0 {
        return Err(Error::InvalidArgument("polyline export needs a curve and samples ≥ 1".into()));
    }
    let mut out = String::new();
    for j in 0..grid.n_elements() {
        for s in 0..samples {
            let p = grid.eval(j, [s as f64 / samples as f64, 0.0]);
            let _ = writeln!(out, "{:.16e} {:.16e}", p.x, p.y);
        }
    }
    let p = grid.eval(0, [0.0, 0.0]);
    let _ = writeln!(out, "{:.16e} {:.16e}", p.x, p.y);
    Ok(out)
}

pub fn write_polyline(grid: &ParametrizedGrid, samples: usize, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_polyline(grid, samples)?)?;
    Ok(())
}

/// Legacy VTK POLYDATA: each curved triangle is split into `depth²` flat
/// triangles, and every piece carries the area `|σ_j|` of its parent element.
pub fn format_vtk(grid: &ParametrizedGrid, depth: usize, rule: &QuadratureRule) -> Result<String> {
    if grid.dim() != 2 || depth == 0 {
        return Err(Error::InvalidArgument("VTK export needs a surface and depth ≥ 1".into()));
    }
    let areas = element_measures(grid, rule)?;
    let n = depth;
    let per_element_points = (n + 1) * (n + 2) / 2;
    let idx = |i: usize, k: usize| -> usize {
        // row i holds n + 1 − i points
        i * (n + 1) - i * (i.saturating_sub(1)) / 2 + k
    };
    let mut points = String::new();
    let mut polys = String::new();
    let mut n_polys = 0;
    for j in 0..grid.n_elements() {
        for i in 0..=n {
            for k in 0..=n - i {
                let p = grid.eval(j, [k as f64 / n as f64, i as f64 / n as f64]);
                let _ = writeln!(points, "{:.16e} {:.16e} {:.16e}", p.x, p.y, p.z);
            }
        }
        let base = j * per_element_points;
        for i in 0..n {
            for k in 0..n - i {
                let (a, b, c) = (idx(i, k), idx(i, k + 1), idx(i + 1, k));
                let _ = writeln!(polys, "3 {} {} {}", base + a, base + b, base + c);
                n_polys += 1;
                if k + 1 < n - i {
                    let d = idx(i + 1, k + 1);
                    let _ = writeln!(polys, "3 {} {} {}", base + b, base + d, base + c);
                    n_polys += 1;
                }
            }
        }
    }
    let mut out = String::from("# vtk DataFile Version 3.0\nparametrized grid\nASCII\nDATASET POLYDATA\n");
    let _ = writeln!(out, "POINTS {} double", grid.n_elements() * per_element_points);
    out.push_str(&points);
    let _ = writeln!(out, "POLYGONS {} {}", n_polys, 4 * n_polys);
    out.push_str(&polys);
    let _ = writeln!(out, "CELL_DATA {n_polys}\nSCALARS element_area double 1\nLOOKUP_TABLE default");
    for area in &areas {
        for _ in 0..n * n {
            let _ = writeln!(out, "{area:.16e}");
        }
    }
    Ok(out)
}

pub fn write_vtk(grid: &ParametrizedGrid, depth: usize, rule: &QuadratureRule, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_vtk(grid, depth, rule)?)?;
    Ok(())
}
