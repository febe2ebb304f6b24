use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("index {index} out of range (valid: {lo}..={hi})")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    /// The requested total power cannot meet every user's QoS target.
    #[error("transmit power {power} W is below the minimum {p_min} W required by the QoS targets")]
    InfeasiblePower { power: f64, p_min: f64 },

    #[error("grid search limited to {max} users, got {got}")]
    TooManyUsers { got: usize, max: usize },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}
