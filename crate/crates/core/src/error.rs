use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series did not converge after {terms} terms (z = {z})")]
    NonConvergence { terms: usize, z: f64 },

    #[error("sections in contact or overlapping (q2 = {q2:e})")]
    Contact { q2: f64 },

    #[error("averaged frame is degenerate (|t_x + t_y| = {norm:e})")]
    DegenerateFrame { norm: f64 },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("invalid configuration at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("Newton solve failed: {0}")]
    Solver(String),

    #[error("singular tangent: {0}")]
    Singular(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable tag used in CLI diagnostics and FFI status mapping.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Contact { .. } => "contact",
            Error::DegenerateFrame { .. } => "degenerate_frame",
            Error::OutOfRange(_) => "out_of_range",
            Error::Config { .. } => "config",
            Error::Solver(_) => "solver",
            Error::Singular(_) => "singular",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
