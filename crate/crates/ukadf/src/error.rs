use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] ukadf_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("gradient check failed: {0}")]
    GradCheck(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable class name printed on failure.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Core(e) => e.class(),
            Error::Io { .. } => "io",
            Error::Usage(_) => "usage",
            Error::GradCheck(_) => "gradcheck",
        }
    }

    /// Process exit code: 2 usage, 3 data, 4 artifact, 5 numerical.
    pub fn exit_code(&self) -> i32 {
        use ukadf_core::Error as C;
        match self {
            Error::Usage(_) | Error::Core(C::Config(_)) => 2,
            Error::Io { .. } => 3,
            Error::GradCheck(_) => 5,
            Error::Core(e) => match e {
                C::Corruption { .. }
                | C::Version(_)
                | C::MalformedArtifact(_)
                | C::IncompatibleArtifact(_)
                | C::RefuseToSave(_) => 4,
                C::NonFinite(_) | C::Numerical(_) | C::Divergence { .. } => 5,
                _ => 3,
            },
        }
    }
}
