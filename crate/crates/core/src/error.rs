use std::path::PathBuf;

use thiserror::Error;

use crate::spaces::SpaceKind;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("points live in different spaces: {0} vs {1}")]
    SpaceMismatch(SpaceKind, SpaceKind),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("not supported: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no modulus known for problem shape `{0}`")]
    NoModulus(String),

    #[error("no closed-form solution set for `{0}`")]
    NoClosedForm(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
