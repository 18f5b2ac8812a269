use thiserror::Error;

use crate::io::snapshot::Snapshot;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A scalar argument lies outside the domain of a thermodynamic function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{field}`: {reason}")]
    Parameter { field: String, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Density reached (or crossed) zero somewhere on the grid.
    #[error("singular state at t = {t}: minimum density {min_rho:e}")]
    SingularState {
        t: f64,
        min_rho: f64,
        snapshot: Option<Box<Snapshot>>,
    },

    #[error("non-finite values in `{field}` at t = {t}")]
    NonFinite {
        t: f64,
        field: String,
        snapshot: Option<Box<Snapshot>>,
    },

    #[error("invalid measurement window: {0}")]
    InvalidWindow(String),

    #[error("rate fit failed: {0}")]
    Fit(String),

    #[error("config syntax error at line {line}, column {column}: {message}")]
    ConfigSyntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("corrupt snapshot: {0}")]
    Corrupt(String),

    /// A sweep ran to completion but one of its verdicts failed.
    #[error("acceptance check failed: {0}")]
    Check(String),

    #[error("run at eps = {eps} aborted: {source}")]
    SweepRun {
        eps: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Process exit status used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SingularState { .. } | Error::NonFinite { .. } => 2,
            Error::SweepRun { source, .. } => source.exit_code(),
            Error::Check(_) => 3,
            _ => 1,
        }
    }

    /// Diagnostic snapshot attached to a numerical abort, if any.
    pub fn snapshot(&self) -> Option<&Snapshot> {
        match self {
            Error::SingularState { snapshot, .. } | Error::NonFinite { snapshot, .. } => {
                snapshot.as_deref()
            }
            Error::SweepRun { source, .. } => source.snapshot(),
            _ => None,
        }
    }
}
