use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{what} = {requested} exceeds the supported range 1..={max}")]
    Capacity {
        what: &'static str,
        requested: usize,
        max: usize,
    },

    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("conditioning event has zero probability")]
    ZeroProbability,

    #[error("gate `{0}` has no lowering to the basis set")]
    UnsupportedGate(&'static str),

    #[error("distribution sums to {0}, expected 1")]
    NotNormalized(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
