use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("incompatible fields: grid {left:?} vs {right:?}")]
    GridMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),

    #[error("density must be positive everywhere (min = {min})")]
    NonPositiveDensity { min: f64 },

    #[error("incompressible state needs a pressure field")]
    MissingPressure,

    #[error("unknown gravitation preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("f outside range of K (null-space component {null_norm:.3e}, field norm {norm:.3e})")]
    OutsideRange { null_norm: f64, norm: f64 },

    #[error("{what} did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("symplectic polar is +inf: |v_I| = {v_i_norm:.3e} exceeds tolerance {limit:.3e}")]
    InfinitePolar { v_i_norm: f64, limit: f64 },

    #[error("explicit step unstable: dt = {dt:.3e}, use dt <= {suggested:.3e}")]
    Unstable { dt: f64, suggested: f64 },

    #[error("line search failed after {iterations} iterations (last accepted value {value:.6e})")]
    LineSearch { iterations: usize, value: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("archive error: {0}")]
    Archive(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}
