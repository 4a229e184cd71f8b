use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("representation error: expected {expected} input")]
    Representation { expected: &'static str },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("field file format error: {0}")]
    Format(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("CFL guard violated at t = {time} (courant number {courant:.4}){}", member_suffix(*.member))]
    Stability {
        time: f64,
        courant: f64,
        member: Option<usize>,
    },

    #[error("assertion failed: {0}")]
    Assertion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn member_suffix(member: Option<usize>) -> String {
    match member {
        Some(m) => format!(" in iteration member {m}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}

pub(crate) fn degenerate<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Degenerate(msg.into()))
}
