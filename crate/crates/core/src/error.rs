use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    Dimension { op: &'static str, detail: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    #[error("insufficient data in {part}: need at least {needed} rows, have {found}")]
    InsufficientData {
        part: &'static str,
        needed: usize,
        found: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite value during {0}")]
    NonFinite(String),

    #[error("every point masked for {0}")]
    EmptyEvaluation(&'static str),

    #[error("{0} is undefined for this input")]
    UndefinedMetric(&'static str),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("training diverged at epoch {epoch}: {detail}")]
    Divergence { epoch: usize, detail: String },

    #[error("artifact checksum mismatch (stored {stored}, computed {computed})")]
    Corruption { stored: String, computed: String },

    #[error("unsupported artifact format version {0}")]
    Version(u32),

    #[error("malformed artifact: {0}")]
    MalformedArtifact(String),

    #[error("incompatible artifact: {0}")]
    IncompatibleArtifact(String),

    #[error("refusing to save artifact: {0}")]
    RefuseToSave(String),
}

impl Error {
    /// Stable, machine-parseable class name.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Dimension { .. } => "dimension",
            Error::Parse { .. } => "parse",
            Error::EmptyDataset(_) => "empty-dataset",
            Error::InsufficientData { .. } => "insufficient-data",
            Error::Config(_) => "config",
            Error::NonFinite(_) => "non-finite",
            Error::EmptyEvaluation(_) => "empty-evaluation",
            Error::UndefinedMetric(_) => "undefined-metric",
            Error::Numerical(_) => "numerical",
            Error::Divergence { .. } => "divergence",
            Error::Corruption { .. } => "corruption",
            Error::Version(_) => "version",
            Error::MalformedArtifact(_) => "malformed-artifact",
            Error::IncompatibleArtifact(_) => "incompatible-artifact",
            Error::RefuseToSave(_) => "refuse-to-save",
        }
    }

    pub(crate) fn dim(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Dimension {
            op,
            detail: detail.into(),
        }
    }
}
