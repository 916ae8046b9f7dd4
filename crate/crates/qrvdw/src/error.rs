use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("radiation kernel requested at x = 0")]
    Singularity,
    #[error("invalid system: {0}")]
    InvalidSystem(String),
    #[error("config error at {field}: {msg}")]
    Config { field: String, msg: String },
    #[error("far-field evaluator needs k_A R >= {threshold}, got {value}")]
    FarFieldDomain { value: f64, threshold: f64 },
    #[error("excitation probability is defined per line, system has {0} B lines")]
    MultiLine(usize),
    #[error("contour closure undetermined: exponent {0} has no sign")]
    ContourAmbiguity(f64),
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),
    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
