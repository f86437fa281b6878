use thiserror::Error;

/// Errors produced by grid construction, discretisation and the time steppers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Violated nondegeneracy of the parametrization at a quadrature point.
    #[error("degenerate element {element} at reference point {point:?}: measure {measure:e}")]
    Degenerate {
        element: usize,
        point: [f64; 2],
        measure: f64,
    },

    #[error("quadrature exactness {got} too low, need at least {required} ({context})")]
    QuadratureTooLow {
        required: usize,
        got: usize,
        context: &'static str,
    },

    /// Singular saddle-point system: the nonparallel assumption failed.
    #[error("linear system is singular: nonparallel assumption for numerical integration violated ({0})")]
    IllPosed(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("Picard iteration did not converge in {iterations} sweeps (last residual {residual:e})")]
    PicardNonConvergence { iterations: usize, residual: f64 },

    #[error("step {step} (t = {time}): {source}")]
    AtStep {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Strips step annotations and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_degeneracy(&self) -> bool {
        matches!(self.root(), Error::Degenerate { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
