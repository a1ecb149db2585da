use thiserror::Error;

/// Errors raised by fitting, projection, and the dataset workflow.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("requested {requested} components but only {available} are available")]
    RankExceeded { requested: usize, available: usize },

    #[error("kernel {0} cannot be evaluated on feature vectors")]
    WrongKernelKind(String),

    #[error("matrix is not positive semidefinite: eigenvalue {value:e} (largest {largest:e})")]
    NotPositiveSemidefinite { value: f64, largest: f64 },

    #[error("{method} cannot reconstruct data: {reason}")]
    ReconstructionUnsupported { method: String, reason: String },

    #[error("non-real leading eigenvalue {re:e} + {im:e}i")]
    ComplexEigenvalues { re: f64, im: f64 },

    #[error("parse error at line {line}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        line: usize,
        column: Option<usize>,
        message: String,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::InvalidDimension(msg.into())
    }

    pub(crate) fn unsupported(method: &str) -> Self {
        Error::ReconstructionUnsupported {
            method: method.to_string(),
            reason: "the feature map is only available through kernel evaluations".to_string(),
        }
    }

    /// Wraps the error with a short description of what was being done.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping any context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit status used by the command-line tool.
    ///
    /// 2 usage, 3 data, 4 numeric, 5 unsupported operation.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Usage(_) => 2,
            Error::InvalidDimension(_)
            | Error::Parse { .. }
            | Error::EmptyInput(_)
            | Error::DegenerateInput(_)
            | Error::WrongKernelKind(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => 3,
            Error::SingularSystem(_)
            | Error::NotSymmetric { .. }
            | Error::RankExceeded { .. }
            | Error::NotPositiveSemidefinite { .. }
            | Error::ComplexEigenvalues { .. } => 4,
            Error::ReconstructionUnsupported { .. } => 5,
            Error::Context { .. } => unreachable!("root() strips context"),
        }
    }
}
