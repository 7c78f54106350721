use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("shape operator {alpha} is not symmetric at ({i}, {j}): asymmetry {asymmetry:e}")]
    Symmetry {
        alpha: usize,
        i: usize,
        j: usize,
        asymmetry: f64,
    },

    #[error("matrix is not a rank-{rank} orthogonal projection: {reason}")]
    NotAProjection { rank: usize, reason: String },

    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("comparison too close to call in floating point: difference {difference:e}")]
    AmbiguousComparison { difference: f64 },

    #[error("pinching hypothesis fails at the point (margin {margin:e})")]
    HypothesisNotMet {
        margin: f64,
        record: Box<crate::lawson_simons::ChainRecord>,
    },

    #[error("invalid block structure: {0}")]
    InvalidStructure(String),

    #[error("classification inconsistent: {0}")]
    ClassificationInconsistent(String),

    #[error("ambient curvature mismatch: inner data has c = {inner}, sphere of radius r has 1/r^2 = {expected}")]
    CurvatureMismatch { inner: f64, expected: f64 },

    #[error("schema error at {field}: {message}")]
    Schema { field: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            message: message.into(),
        }
    }
}
