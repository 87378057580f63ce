use thiserror::Error;

/// Errors produced by the simulator, the protocols and the experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("n = {0} is not supported: only odd n >= 3 (GHZ resources are restricted to odd agent counts)")]
    OddAgentCount(usize),
    #[error("qubit index {index} out of range 1..={n}")]
    QubitOutOfRange { index: usize, n: usize },
    #[error("dimension mismatch: {left} qubits vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },
    #[error("measurement requested on an empty qubit set")]
    EmptyQubitSet,
    #[error("qubit {0} listed more than once")]
    DuplicateQubit(usize),
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("n = {n} exceeds the limit of {limit} for {what}")]
    TooLarge {
        n: usize,
        limit: usize,
        what: &'static str,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid noise specification: {0}")]
    InvalidNoise(String),
    #[error("state source exhausted")]
    SourceExhausted,
    #[error("transcript is missing {0}")]
    MissingTranscript(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

/// Rejects anything but odd `n >= 3`.
pub(crate) fn check_odd_n(n: usize) -> Result<()> {
    if n < 3 || n % 2 == 0 {
        return Err(Error::OddAgentCount(n));
    }
    Ok(())
}
