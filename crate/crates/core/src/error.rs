use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("angle {angle} rad lies outside [-pi/2, pi/2]")]
    AngleDomain { angle: f64 },

    #[error("invalid array configuration: {0}")]
    InvalidArray(&'static str),

    #[error("invalid scenario: {0}")]
    InvalidScenario(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("the null space of a length-{0} vector is empty")]
    EmptyNullSpace(usize),

    /// Transmit energy does not cover the minimum-energy communication waveform.
    #[error("infeasible energy budget: {deficit} short of the communication minimum")]
    Infeasible { deficit: f64 },

    #[error("desired communication signal is identically zero")]
    ZeroCommSignal,

    #[error("{name} = {value} is outside its domain")]
    Domain { name: &'static str, value: f64 },

    #[error("at least {min} trials are required, got {got}")]
    TooFewTrials { min: u64, got: u64 },
}
