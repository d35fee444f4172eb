use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("degenerate bounding box")]
    DegenerateBoundingBox,

    #[error("invalid octree parameter: {0}")]
    OctreeParam(String),

    #[error("nothing to evaluate")]
    NothingToEvaluate,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid config value for `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("unknown config key `{key}`; valid keys: {}", valid.join(", "))]
    UnknownConfigKey { key: String, valid: Vec<String> },

    #[error("{path}:{line}: {reason}")]
    Parse { path: String, line: usize, reason: String },

    #[error("PLY error at byte {offset}: {reason}")]
    Ply { offset: u64, reason: String },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for failures of the filesystem rather than of the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
