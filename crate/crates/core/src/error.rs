use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("negative schedule delay: {0}")]
    NegativeDelay(f64),
    #[error("negative delay {delay} in activity '{activity}' of arrival '{arrival}'")]
    NegativeTimeout {
        arrival: String,
        activity: &'static str,
        delay: f64,
    },
    #[error("resource '{0}' not found")]
    UnknownResource(String),
    #[error("generator '{0}' not found")]
    UnknownGenerator(String),
    #[error("name '{0}' is already in use")]
    DuplicateName(String),
    #[error("arrival '{arrival}' releases {amount} units of '{resource}' but holds {held}")]
    ReleaseExceedsHeld {
        arrival: String,
        resource: String,
        amount: u64,
        held: u64,
    },
    #[error("arrival '{arrival}' has no selected resource (id {id})")]
    NothingSelected { arrival: String, id: usize },
    #[error("{activity}: option {option} out of range for arrival '{arrival}' (1..={max})")]
    BranchOutOfRange {
        arrival: String,
        activity: &'static str,
        option: i64,
        max: usize,
    },
    #[error("invalid parameter in '{activity}': {message}")]
    InvalidParameter {
        activity: &'static str,
        message: String,
    },
    #[error("invalid prioritization: preemptible ({preemptible}) must be >= priority ({priority})")]
    InvalidPrioritization { priority: i64, preemptible: i64 },
    #[error("negative value for {what}: {value}")]
    NegativeLimit { what: &'static str, value: f64 },
    #[error("index {index} out of range for trajectory of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("rollback history of arrival '{0}' exceeded its capacity")]
    HistoryOverflow(String),
    #[error("arrival '{arrival}', activity {activity}: {source}")]
    InArrival {
        arrival: String,
        activity: &'static str,
        source: Box<SimError>,
    },
    #[error("environment is wrapped")]
    Wrapped,
    #[error("attribute and resource getters need an arrival context")]
    NoArrivalContext,
}
