use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use geomflow::refmesh::Shape;
use geomflow::schemes::{Flow, SchemeConfig, Variant};
use toml::{Table, Value};

use crate::CliError;

/// How the level-0 reference grid is sized.
#[derive(Clone, Debug, PartialEq)]
pub enum MeshSpec {
    /// Curves: number of segments.
    Elements(usize),
    /// Curves: smallest segment count whose longest chord is at most `h0`.
    MeshSize(f64),
    /// Sphere and ellipsoid: octahedron refinements.
    Refinements(usize),
    /// Structured surface grid closest to `(J, K)`.
    Counts { elements: usize, vertices: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeometrySpec {
    Analytic { shape: Shape, mesh: MeshSpec },
    /// OFF-style reference grid; the parametrization starts flat.
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Duration {
    FinalTime(f64),
    Steps(usize),
}

/// How `run_eoc` measures the error of a level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EocError {
    /// `L∞` distance to the exact shrinking circle/sphere.
    Exact,
    /// Projected `L²` distance to the next finer level.
    InterLevel,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EocSpec {
    pub levels: usize,
    pub error: EocError,
    pub neighbors: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub geometry: GeometrySpec,
    pub flow: Flow,
    pub variant: Variant,
    pub degree: usize,
    pub tau: f64,
    /// `None` means the default `10ℓ`.
    pub quad_order: Option<usize>,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub duration: Duration,
    pub eoc: EocSpec,
    pub output_dir: PathBuf,
    pub snapshots: usize,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, CliError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let GeometrySpec::File(f) = &cfg.geometry {
            if f.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.geometry = GeometrySpec::File(dir.join(f));
                }
            }
        }
        Ok(cfg)
    }

    /// Parses and validates; every problem found is reported, not just the first.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(vec![e.to_string().trim().to_string()]))?;
        let mut p = Parser { problems: Vec::new() };
        let cfg = p.config(&table);
        match cfg {
            Some(c) if p.problems.is_empty() => Ok(c),
            _ => Err(CliError::Config(p.problems)),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match &self.geometry {
            GeometrySpec::Analytic { shape, .. } => Some(shape.dim()),
            GeometrySpec::File(_) => None,
        }
    }

    pub fn scheme(&self) -> SchemeConfig {
        let mut s = SchemeConfig::new(self.flow, self.variant, self.degree, self.tau);
        if let Some(q) = self.quad_order {
            s.quad_order = q;
        }
        s.picard_tol = self.picard_tol;
        s.picard_max_iter = self.picard_max_iter;
        s
    }

    /// Same experiment at another polynomial degree (default quadrature follows).
    pub fn with_degree(&self, degree: usize) -> Self {
        ExperimentConfig {
            degree,
            ..self.clone()
        }
    }

    /// Fully resolved configuration as TOML; parsing it back gives the same config.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed = {}\n\n[geometry]", self.seed);
        match &self.geometry {
            GeometrySpec::File(f) => {
                let _ = writeln!(s, "shape = \"file\"\npath = {}", quote(&f.display().to_string()));
            }
            GeometrySpec::Analytic { shape, mesh } => {
                match *shape {
                    Shape::Circle { radius } => {
                        let _ = writeln!(s, "shape = \"circle\"\nradius = {radius:?}");
                    }
                    Shape::Ellipse { a, b } => {
                        let _ = writeln!(s, "shape = \"ellipse\"\na = {a:?}\nb = {b:?}");
                    }
                    Shape::Flower => {
                        let _ = writeln!(s, "shape = \"flower\"");
                    }
                    Shape::Sphere { radius } => {
                        let _ = writeln!(s, "shape = \"sphere\"\nradius = {radius:?}");
                    }
                    Shape::Ellipsoid { a, b, c } => {
                        let _ = writeln!(s, "shape = \"ellipsoid\"\na = {a:?}\nb = {b:?}\nc = {c:?}");
                    }
                    Shape::Torus { major, minor } => {
                        let _ = writeln!(s, "shape = \"torus\"\nmajor = {major:?}\nminor = {minor:?}");
                    }
                }
                let _ = match mesh {
                    MeshSpec::Elements(n) => writeln!(s, "elements = {n}"),
                    MeshSpec::MeshSize(h) => writeln!(s, "h0 = {h:?}"),
                    MeshSpec::Refinements(r) => writeln!(s, "refinements = {r}"),
                    MeshSpec::Counts { elements, vertices } => writeln!(s, "elements = {elements}\nvertices = {vertices}"),
                };
            }
        }
        let sc = self.scheme();
        let _ = writeln!(
            s,
            "\n[scheme]\nflow = \"{}\"\nvariant = \"{}\"\ndegree = {}\ntau = {:?}\nquad_order = {}\npicard_tol = {:?}\npicard_max_iter = {}",
            sc.flow, sc.variant, sc.degree, sc.tau, sc.quad_order, sc.picard_tol, sc.picard_max_iter
        );
        let _ = match self.duration {
            Duration::FinalTime(t) => writeln!(s, "\n[time]\nt_end = {t:?}"),
            Duration::Steps(n) => writeln!(s, "\n[time]\nsteps = {n}"),
        };
        let _ = writeln!(
            s,
            "\n[eoc]\nlevels = {}\nerror = \"{}\"\nneighbors = {}",
            self.eoc.levels,
            match self.eoc.error {
                EocError::Exact => "exact",
                EocError::InterLevel => "inter_level",
            },
            self.eoc.neighbors
        );
        let _ = writeln!(
            s,
            "\n[output]\ndir = {}\nsnapshots = {}",
            quote(&self.output_dir.display().to_string()),
            self.snapshots
        );
        s
    }
}

fn quote(s: &str) -> String {
    Value::String(s.to_string()).to_string()
}

struct Parser {
    problems: Vec<String>,
}

const TOP: &[&str] = &["seed", "geometry", "scheme", "time", "eoc", "output"];
const GEOMETRY: &[&str] = &["shape", "radius", "a", "b", "c", "major", "minor", "elements", "vertices", "h0", "refinements", "path"];
const SCHEME: &[&str] = &["flow", "variant", "degree", "tau", "quad_order", "picard_tol", "picard_max_iter"];
const TIME: &[&str] = &["t_end", "steps"];
const EOC: &[&str] = &["levels", "error", "neighbors"];
const OUTPUT: &[&str] = &["dir", "snapshots"];

impl Parser {
    fn problem(&mut self, msg: String) {
        self.problems.push(msg);
    }

    fn section<'a>(&mut self, top: &'a Table, name: &str, keys: &[&str], required: bool) -> Option<&'a Table> {
        let t = match top.get(name) {
            Some(Value::Table(t)) => t,
            Some(_) => {
                self.problem(format!("{name}: expected a [{name}] section"));
                return None;
            }
            None => {
                if required {
                    self.problem(format!("missing section [{name}]"));
                }
                return None;
            }
        };
        for k in t.keys() {
            if !keys.contains(&k.as_str()) {
                self.problem(format!("unknown key '{name}.{k}'"));
            }
        }
        Some(t)
    }

    fn float(&mut self, t: Option<&Table>, sec: &str, key: &str) -> Option<f64> {
        match t?.get(key)? {
            Value::Float(x) => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.problem(format!("{sec}.{key}: expected a number"));
                None
            }
        }
    }

    fn positive(&mut self, t: Option<&Table>, sec: &str, key: &str) -> Option<f64> {
        let x = self.float(t, sec, key)?;
        if x.is_finite() && x > 0.0 {
            Some(x)
        } else {
            self.problem(format!("{sec}.{key}: must be positive, got {x}"));
            None
        }
    }

    fn uint(&mut self, t: Option<&Table>, sec: &str, key: &str) -> Option<usize> {
        match t?.get(key)? {
            Value::Integer(i) if *i >= 0 => Some(*i as usize),
            _ => {
                self.problem(format!("{sec}.{key}: expected a non-negative integer"));
                None
            }
        }
    }

    fn string<'a>(&mut self, t: Option<&'a Table>, sec: &str, key: &str) -> Option<&'a str> {
        match t?.get(key)? {
            Value::String(s) => Some(s),
            _ => {
                self.problem(format!("{sec}.{key}: expected a string"));
                None
            }
        }
    }

    fn require<T>(&mut self, v: Option<T>, t: Option<&Table>, sec: &str, key: &str) -> Option<T> {
        if v.is_none() && t.is_some_and(|t| !t.contains_key(key)) {
            self.problem(format!("{sec}.{key}: required"));
        }
        v
    }

    fn config(&mut self, top: &Table) -> Option<ExperimentConfig> {
        for k in top.keys() {
            if !TOP.contains(&k.as_str()) {
                self.problem(format!("unknown key '{k}'"));
            }
        }
        let seed = match top.get("seed") {
            None => Some(0),
            Some(Value::Integer(i)) if *i >= 0 => Some(*i as u64),
            Some(_) => {
                self.problem("seed: expected a non-negative integer".into());
                None
            }
        };
        let g = self.section(top, "geometry", GEOMETRY, true);
        let s = self.section(top, "scheme", SCHEME, true);
        let tm = self.section(top, "time", TIME, true);
        let e = self.section(top, "eoc", EOC, false);
        let o = self.section(top, "output", OUTPUT, false);

        let geometry = self.geometry(g);

        let flow = self.string(s, "scheme", "flow").and_then(|x| x.parse::<Flow>().map_err(|m| self.problem(format!("scheme.flow: {m}"))).ok());
        let flow = self.require(flow, s, "scheme", "flow");
        let variant = match self.string(s, "scheme", "variant") {
            Some(x) => x.parse::<Variant>().map_err(|m| self.problem(format!("scheme.variant: {m}"))).ok(),
            None => Some(Variant::BgnExact),
        };
        let degree = self.uint(s, "scheme", "degree");
        let degree = self.require(degree, s, "scheme", "degree");
        let tau = self.positive(s, "scheme", "tau");
        let tau = self.require(tau, s, "scheme", "tau");
        let quad_order = self.uint(s, "scheme", "quad_order");
        let picard_tol = self.positive(s, "scheme", "picard_tol").unwrap_or(1e-12);
        let picard_max_iter = self.uint(s, "scheme", "picard_max_iter").unwrap_or(100);

        let t_end = self.positive(tm, "time", "t_end");
        let steps = self.uint(tm, "time", "steps");
        let duration = match (t_end, steps) {
            (Some(t), None) => Some(Duration::FinalTime(t)),
            (None, Some(n)) => Some(Duration::Steps(n)),
            (Some(_), Some(_)) => {
                self.problem("time: give either t_end or steps, not both".into());
                None
            }
            (None, None) => {
                if tm.is_some_and(|t| !t.contains_key("t_end") && !t.contains_key("steps")) {
                    self.problem("time: one of t_end or steps is required".into());
                }
                None
            }
        };

        let levels = self.uint(e, "eoc", "levels").unwrap_or(4);
        if levels < 2 {
            self.problem(format!("eoc.levels: need at least 2, got {levels}"));
        }
        let neighbors = self.uint(e, "eoc", "neighbors").unwrap_or(geomflow::metrics::DEFAULT_NEIGHBORS);
        if neighbors == 0 {
            self.problem("eoc.neighbors: must be at least 1".into());
        }
        let exact_ok = flow == Some(Flow::MeanCurvature)
            && matches!(
                geometry,
                Some(GeometrySpec::Analytic {
                    shape: Shape::Circle { .. } | Shape::Sphere { .. },
                    ..
                })
            );
        let error = match self.string(e, "eoc", "error") {
            None => Some(if exact_ok { EocError::Exact } else { EocError::InterLevel }),
            Some("inter_level") => Some(EocError::InterLevel),
            Some("exact") if exact_ok => Some(EocError::Exact),
            Some("exact") => {
                self.problem("eoc.error: the exact error needs mean curvature flow of a circle or sphere".into());
                None
            }
            Some(other) => {
                self.problem(format!("eoc.error: unknown value '{other}' (expected exact or inter_level)"));
                None
            }
        };

        let dir = self.string(o, "output", "dir").unwrap_or("output").to_string();
        let snapshots = self.uint(o, "output", "snapshots").unwrap_or(10);

        let cfg = ExperimentConfig {
            geometry: geometry?,
            flow: flow?,
            variant: variant?,
            degree: degree?,
            tau: tau?,
            quad_order,
            picard_tol,
            picard_max_iter,
            duration: duration?,
            eoc: EocSpec {
                levels,
                error: error?,
                neighbors,
            },
            output_dir: PathBuf::from(dir),
            snapshots,
            seed: seed?,
        };
        if let Some(dim) = cfg.dim() {
            for m in cfg.scheme().problems(dim) {
                self.problem(format!("scheme: {m}"));
            }
        } else {
            // dimension of a file grid is known only after reading it
            let c = cfg.scheme();
            let either = c.problems(1).is_empty() || c.problems(2).is_empty();
            if !either {
                for m in c.problems(1) {
                    self.problem(format!("scheme: {m}"));
                }
            }
        }
        Some(cfg)
    }

    fn geometry(&mut self, g: Option<&Table>) -> Option<GeometrySpec> {
        let name = self.string(g, "geometry", "shape");
        let name = self.require(name, g, "geometry", "shape")?;
        let shape = match name {
            "file" => {
                let p = self.string(g, "geometry", "path");
                let p = self.require(p, g, "geometry", "path")?;
                return Some(GeometrySpec::File(PathBuf::from(p)));
            }
            "circle" => Shape::Circle {
                radius: self.positive(g, "geometry", "radius").unwrap_or(1.0),
            },
            "sphere" => Shape::Sphere {
                radius: self.positive(g, "geometry", "radius").unwrap_or(1.0),
            },
            "ellipse" => Shape::Ellipse {
                a: self.positive(g, "geometry", "a").unwrap_or(2.0),
                b: self.positive(g, "geometry", "b").unwrap_or(1.0),
            },
            "ellipsoid" => Shape::Ellipsoid {
                a: self.positive(g, "geometry", "a").unwrap_or(2.0),
                b: self.positive(g, "geometry", "b").unwrap_or(1.0),
                c: self.positive(g, "geometry", "c").unwrap_or(1.0),
            },
            "flower" => Shape::Flower,
            "torus" => {
                let major = self.positive(g, "geometry", "major").unwrap_or(2.0);
                let minor = self.positive(g, "geometry", "minor").unwrap_or(1.0);
                if minor >= major {
                    self.problem(format!("geometry: torus needs minor < major, got {minor} >= {major}"));
                }
                Shape::Torus { major, minor }
            }
            other => {
                self.problem(format!(
                    "geometry.shape: unknown shape '{other}' (expected circle, ellipse, flower, sphere, ellipsoid, torus or file)"
                ));
                return None;
            }
        };
        let elements = self.uint(g, "geometry", "elements");
        let vertices = self.uint(g, "geometry", "vertices");
        let h0 = self.positive(g, "geometry", "h0");
        let refinements = self.uint(g, "geometry", "refinements");
        let mesh = if shape.dim() == 1 {
            if vertices.is_some() || refinements.is_some() {
                self.problem("geometry: curves are sized by elements or h0".into());
            }
            match (elements, h0) {
                (Some(n), None) if n >= 3 => MeshSpec::Elements(n),
                (Some(n), None) => {
                    self.problem(format!("geometry.elements: a closed polygon needs at least 3 segments, got {n}"));
                    return None;
                }
                (None, Some(h)) => MeshSpec::MeshSize(h),
                (None, None) => MeshSpec::Elements(128),
                (Some(_), Some(_)) => {
                    self.problem("geometry: give either elements or h0, not both".into());
                    return None;
                }
            }
        } else {
            if h0.is_some() {
                self.problem("geometry.h0: surfaces are sized by refinements or elements/vertices".into());
            }
            match (refinements, elements, vertices) {
                (Some(r), None, None) => {
                    if !matches!(shape, Shape::Sphere { .. } | Shape::Ellipsoid { .. }) {
                        self.problem("geometry.refinements: octahedron refinement applies to spheres and ellipsoids".into());
                    }
                    MeshSpec::Refinements(r)
                }
                (None, Some(elements), Some(vertices)) => MeshSpec::Counts { elements, vertices },
                (None, None, None) => match shape {
                    Shape::Torus { .. } => MeshSpec::Counts {
                        elements: 720,
                        vertices: 360,
                    },
                    _ => MeshSpec::Refinements(3),
                },
                _ => {
                    self.problem("geometry: give either refinements or both elements and vertices".into());
                    return None;
                }
            }
        };
        Some(GeometrySpec::Analytic { shape, mesh })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[geometry]\nshape = \"circle\"\nh0 = 0.2\n[scheme]\nflow = \"mcf\"\ndegree = 2\ntau = 0.05\n[time]\nt_end = 0.05\n";

    #[test]
    fn defaults_materialize() {
        let c = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.scheme().quad_order, 20);
        assert_eq!(c.eoc.error, EocError::Exact);
        let echo = c.echo();
        assert!(echo.contains("quad_order = 20"));
        let back = ExperimentConfig::parse(&echo).unwrap();
        assert_eq!(back.echo(), echo);
        assert_eq!(back.scheme().quad_order, 20);
    }

    #[test]
    fn every_problem_is_listed() {
        let text = "bogus = 1\n[geometry]\nshape = \"circle\"\ncolour = 3\n[scheme]\nflow = \"mcf\"\ndegree = 9\ntau = -1.0\n[time]\nt_end = 0.05\n";
        let CliError::Config(p) = ExperimentConfig::parse(text).unwrap_err() else {
            panic!("expected a config error")
        };
        assert!(p.iter().any(|m| m.contains("'bogus'")));
        assert!(p.iter().any(|m| m.contains("'geometry.colour'")));
        assert!(p.iter().any(|m| m.contains("scheme.tau")));
        assert!(p.len() >= 3, "{p:?}");
    }

    #[test]
    fn sp_needs_conserving_quadrature() {
        let text = "[geometry]\nshape = \"ellipse\"\n[scheme]\nflow = \"sd\"\nvariant = \"sp\"\ndegree = 3\ntau = 0.01\nquad_order = 4\n[time]\nsteps = 1\n";
        let CliError::Config(p) = ExperimentConfig::parse(text).unwrap_err() else {
            panic!("expected a config error")
        };
        assert!(p.iter().any(|m| m.contains("conserved")), "{p:?}");
    }

    #[test]
    fn syntax_error_names_the_line() {
        let CliError::Config(p) = ExperimentConfig::parse("[geometry]\nshape = \n").unwrap_err() else {
            panic!("expected a config error")
        };
        assert!(p[0].contains("line 2"), "{p:?}");
    }
}
