//! Minimal ASCII OFF-style grid files.
//!
//! ```text
//! OFF
//! <vertices> <elements> 0
//! x y [z]          one line per vertex, 2 coordinates for curves, 3 for surfaces
//! 2 a b            segment, or
//! 3 a b c          triangle
//! ```
//!
//! `#` starts a comment; blank lines are ignored. Coordinates are written with
//! 17 significant digits so that a write/read cycle is exact.

use std::fmt::Write as _;
use std::path::Path;

use super::ReferenceGrid;
use crate::{Error, Point, Result};

pub fn write_grid(grid: &ReferenceGrid, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_grid(grid))?;
    Ok(())
}

pub fn format_grid(grid: &ReferenceGrid) -> String {
    let mut out = String::from("OFF\n");
    let _ = writeln!(out, "{} {} 0", grid.n_vertices(), grid.n_elements());
    for v in grid.vertices() {
        let coords: Vec<String> = v
            .iter()
            .take(grid.ambient_dim())
            .map(|c| format!("{c:.16e}"))
            .collect();
        let _ = writeln!(out, "{}", coords.join(" "));
    }
    for j in 0..grid.n_elements() {
        let e = grid.element(j);
        let idx: Vec<String> = e.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "{} {}", e.len(), idx.join(" "));
    }
    out
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<ReferenceGrid> {
    parse_grid(&std::fs::read_to_string(path)?)
}

pub fn parse_grid(text: &str) -> Result<ReferenceGrid> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line: usize, message: String| Error::Parse { line, message };

    let (line, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    if header != "OFF" {
        return Err(err(line, format!("expected 'OFF' header, found '{header}'")));
    }
    let (line, counts) = lines.next().ok_or_else(|| err(line, "missing counts line".into()))?;
    let counts = parse_numbers::<usize>(counts).map_err(|m| err(line, m))?;
    if counts.len() < 2 {
        return Err(err(line, "counts line needs '<vertices> <elements>'".into()));
    }
    let (nv, ne) = (counts[0], counts[1]);

    let mut vertices = Vec::with_capacity(nv);
    let mut ambient = 0;
    for _ in 0..nv {
        let (line, l) = lines.next().ok_or_else(|| err(line, "unexpected end of vertex list".into()))?;
        let c = parse_numbers::<f64>(l).map_err(|m| err(line, m))?;
        if !(c.len() == 2 || c.len() == 3) || (ambient != 0 && c.len() != ambient) {
            return Err(err(line, format!("vertex has {} coordinates", c.len())));
        }
        ambient = c.len();
        vertices.push(Point::new(c[0], c[1], c.get(2).copied().unwrap_or(0.0)));
    }
    let mut elements = Vec::with_capacity(ne);
    let mut dim = 0;
    for _ in 0..ne {
        let (line, l) = lines.next().ok_or_else(|| err(line, "unexpected end of element list".into()))?;
        let idx = parse_numbers::<usize>(l).map_err(|m| err(line, m))?;
        let n = *idx.first().unwrap_or(&0);
        if !(n == 2 || n == 3) || idx.len() != n + 1 || (dim != 0 && n - 1 != dim) {
            return Err(err(line, "element must be '2 a b' or '3 a b c', uniformly".into()));
        }
        dim = n - 1;
        elements.push([idx[1], idx[2], idx.get(3).copied().unwrap_or(0)]);
    }
    if let Some((line, _)) = lines.next() {
        return Err(err(line, "trailing data after element list".into()));
    }
    if dim + 1 != ambient {
        return Err(err(1, format!("{dim}-dimensional elements in {ambient}-dimensional space")));
    }
    ReferenceGrid::new(dim, ambient, vertices, elements, None)
}

fn parse_numbers<T: std::str::FromStr>(line: &str) -> std::result::Result<Vec<T>, String> {
    line.split_whitespace()
        .map(|t| t.parse::<T>().map_err(|_| format!("cannot parse '{t}'")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refmesh::{build_polygon, build_triangulation, Shape, TriangulationTarget};

    #[test]
    fn round_trip_is_exact() {
        for g in [
            build_polygon(Shape::Flower, 37).unwrap(),
            build_triangulation(Shape::Torus { major: 2.0, minor: 1.0 }, TriangulationTarget::Counts { elements: 0, vertices: 90 })
                .unwrap(),
        ] {
            let back = parse_grid(&format_grid(&g)).unwrap();
            assert_eq!(back.vertices(), g.vertices());
            for j in 0..g.n_elements() {
                assert_eq!(back.element(j), g.element(j));
            }
        }
    }

    #[test]
    fn reports_line_numbers() {
        let text = "OFF\n3 3 0\n0 0\n1 0\n0 x\n2 0 1\n2 1 2\n2 2 0\n";
        match parse_grid(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(parse_grid("PLY\n"), Err(Error::Parse { line: 1, .. })));
        let mixed = "OFF\n3 2 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n2 0 1\n";
        assert!(matches!(parse_grid(mixed), Err(Error::Parse { line: 7, .. })));
    }
}
