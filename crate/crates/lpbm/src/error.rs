use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("evaluation error: {0}")]
    Evaluation(String),
    #[error("representation error: {0}")]
    Representation(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::Argument(format!("dimension {n} unsupported, expected 2 or 3")))
    }
}
