use thiserror::Error;

/// Failure modes shared across the library. Callers that need to map these
/// onto process exit codes treat `Domain` and `Divergent` as input problems
/// and everything else as numerical failure.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("failed to converge: {0}")]
    NonConvergence(String),

    #[error("no sign change on [{lo}, {hi}]: {detail}")]
    NoSignChange { lo: f64, hi: f64, detail: String },

    #[error("multiple sign changes: {0}")]
    MultipleRoots(String),

    #[error("singular least-squares system (condition estimate {cond:.3e})")]
    SingularFit { cond: f64 },

    #[error("outside the admissible regime: {0}")]
    Regime(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that indicate bad inputs rather than a numerical
    /// breakdown.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Divergent(_))
    }
}
