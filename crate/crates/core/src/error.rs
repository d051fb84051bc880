use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {reason}")]
    Schema {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("post {post_id}: duplicate comment ids: {}", .ids.join(", "))]
    DuplicateComments { post_id: String, ids: Vec<String> },

    #[error("post {post_id}: comment {comment_id} belongs to post {owner}")]
    ForeignComment {
        post_id: String,
        comment_id: String,
        owner: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("training data has a single class ({0}); this learner needs both labels")]
    SingleClass(u8),

    #[error("empty training set")]
    EmptyDataset,

    #[error("feature mismatch: missing [{}], extra [{}]", .missing.join(", "), .extra.join(", "))]
    FeatureMismatch {
        missing: Vec<String>,
        extra: Vec<String>,
    },

    #[error("{0} is not a tree model")]
    NotTreeModel(&'static str),

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("config: {0}")]
    Config(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the input data rather than by the caller.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Schema { .. }
                | Error::DuplicateComments { .. }
                | Error::ForeignComment { .. }
                | Error::SingleClass(_)
                | Error::EmptyDataset
                | Error::FeatureMismatch { .. }
                | Error::DegenerateSplit(_)
                | Error::Config(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
