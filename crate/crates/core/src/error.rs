use thiserror::Error;

use crate::dynamics::Singularity;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Parameters outside the admissible domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A position angle outside the range of the arc it was given for.
    #[error("position angle {phi} outside the range of the {arc} arc")]
    Range { arc: &'static str, phi: f64 },

    #[error("singular orbit: {0}")]
    Singularity(Singularity),

    #[error("no return to the reduced set within {0} steps")]
    NoReturn(u64),

    #[error("orbit never leaves the small arc within {0} steps")]
    NeverLeaves(u64),

    #[error("extended segment invalid: {0}")]
    ExtensionInvalid(&'static str),

    #[error("finite-difference perturbation changed the itinerary")]
    ItineraryChange,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("config error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
