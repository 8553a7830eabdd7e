use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An operation was called outside its domain (e.g. X0 outside the region).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A theorem hypothesis needed by an analytic bound does not hold.
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("bound vacuous: {0}")]
    Vacuous(String),

    /// Not enough data for a tail or rate fit.
    #[error("inestimable: {0}")]
    Inestimable(String),

    /// Every problem found while validating a config, not only the first.
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("config syntax: {0}")]
    ConfigSyntax(#[from] toml::de::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
