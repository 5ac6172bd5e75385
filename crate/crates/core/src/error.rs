use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a database needs at least one item")]
    EmptyDatabase,
    #[error("a register needs at least one data qubit")]
    NoDataQubits,
    #[error("{0} qubits exceeds the simulator limit of {max}", max = crate::statevec::MAX_QUBITS)]
    TooManyQubits(u32),
    #[error("value {value} does not fit in {bits} data qubits")]
    ValueOutOfRange { value: u64, bits: u32 },
    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("{what} {value} out of range (must be below {limit})")]
    OutOfRange {
        what: &'static str,
        value: u64,
        limit: u64,
    },
    #[error("state has amplitude on index {0}, outside the database")]
    SupportOutsideDatabase(usize),
    #[error("amplitude vector has length {actual}, register needs {expected}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("state norm {0} is too small to measure")]
    DegenerateState(f64),
    #[error("outcome {0} has vanishing probability")]
    UnreachableOutcome(usize),
    #[error("{requested} iterations exceeds the bound of {bound}")]
    IterationBound { requested: usize, bound: usize },
    #[error("ensemble probabilities sum to {0}, expected 1")]
    EnsembleNotNormalized(f64),
    #[error("database size {0} is below the comparison minimum of 2")]
    DatabaseTooSmall(usize),
    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),
    #[error("at least one decoy photon is required")]
    NoDecoys,
    #[error("channel check failed on all {attempts} attempts (last error rate {error_rate})")]
    ChannelAborted { attempts: usize, error_rate: f64 },
}
