use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invalid configuration: {0}")]
    Configuration(String),

    /// Kraus operators whose completeness defect `‖Σ K†K − I‖_max` exceeds tolerance.
    #[error("channel is not trace preserving (completeness defect {defect:e})")]
    ChannelConstruction { defect: f64 },

    /// A postselected branch with vanishing probability.
    #[error("dark port: postselection branch has probability {probability:e}")]
    DarkPort { probability: f64 },

    #[error("evaluation failed at (t1 = {t1}, t2 = {t2}): {source}")]
    Evaluation {
        t1: f64,
        t2: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}
