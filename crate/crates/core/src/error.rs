use thiserror::Error;

/// Errors produced by geometry evaluation and input handling.
///
/// Pointwise evaluation errors are wrapped with the offending sample point by
/// the sampling loops, so diagnostics always name where a computation failed.
#[derive(Debug, Error)]
pub enum GeomError {
    #[error("syntax error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("domain error in `{func}`: {detail}")]
    Domain { func: String, detail: String },

    #[error("division by a jet with zero constant term")]
    DivisionByZero,

    #[error("singular matrix (pivot {pivot:.3e})")]
    SingularMatrix { pivot: f64 },

    #[error("jets belong to different jet spaces")]
    SpaceMismatch,

    #[error("multi-index order {got} exceeds truncation order {max}")]
    OrderExceeded { got: usize, max: usize },

    #[error("variable index {index} out of range for {n_vars} variables")]
    VarIndexOutOfRange { index: usize, n_vars: usize },

    #[error("fields live on different charts")]
    ChartMismatch,

    #[error("point rejected by chart guard (guard = {value:.3e})")]
    GuardViolation { value: f64 },

    #[error("no admissible sample found after {attempts} consecutive rejections")]
    SamplingExhausted { attempts: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("{source} at point {point:?}")]
    AtPoint {
        point: Vec<f64>,
        #[source]
        source: Box<GeomError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl GeomError {
    /// Attach the sample point at which the error occurred.
    pub fn at_point(self, point: &[f64]) -> GeomError {
        match self {
            GeomError::AtPoint { .. } => self,
            other => GeomError::AtPoint {
                point: point.to_vec(),
                source: Box::new(other),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, GeomError>;
