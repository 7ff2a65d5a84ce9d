use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Error, Debug)]
pub enum Error {
    /// An input that must be finite contained NaN or infinity.
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    /// A numeric argument violated its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A scenario file failed schema validation; `field` is the dotted path.
    #[error("invalid scenario field `{field}`: {message}")]
    InvalidScenario { field: String, message: String },

    /// Refusal to clobber existing outputs without `--force`.
    #[error("output path {0} already exists (pass --force to overwrite)")]
    OutputExists(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn invalid_scenario(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidScenario {
            field: field.into(),
            message: message.into(),
        }
    }
}
