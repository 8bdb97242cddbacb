use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit {index} is out of range for a {num_qubits}-qubit register")]
    TargetOutOfRange { index: usize, num_qubits: usize },

    #[error("qubit {0} appears more than once in the target list")]
    DuplicateTarget(usize),

    #[error("gate acts on {arity} qubits but {targets} targets were given")]
    ArityMismatch { arity: usize, targets: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NonUnitary { deviation: f64 },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NonHermitian { deviation: f64 },

    #[error("matrix is not symmetric (max deviation {deviation:.3e})")]
    NonSymmetric { deviation: f64 },

    #[error("ring size {0} is invalid: must be even and at least {1}")]
    InvalidRingSize(usize, usize),

    #[error("couplings must satisfy |Jz| >= |Jx| >= |Jy|; {suggestion}")]
    CouplingOrder { suggestion: String },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("interpolation parameter s = {0} lies outside [0, 1]")]
    ScheduleOutOfRange(f64),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("{num_qubits} qubits exceeds the limit of {limit} for {what}")]
    TooLarge {
        what: &'static str,
        num_qubits: usize,
        limit: usize,
    },

    #[error(
        "bitstring has odd Hamming weight {0} and lies outside the image of the domain-wall map"
    )]
    OddWeight(usize),

    #[error("level n = {n} is out of range for L = {num_sites}")]
    LevelOutOfRange { n: usize, num_sites: usize },

    #[error("level index {index} is out of range for a spectrum of size {size}")]
    LevelIndexOutOfRange { index: usize, size: usize },

    #[error("parity projection lost norm ({norm:.6}); the input left the bit-0 = 0 branch")]
    ParityPrecondition { norm: f64 },

    #[error("parameter count mismatch: plan expects {expected}, got {found}")]
    ParameterCount { expected: usize, found: usize },

    #[error("reference bitstring {0:#b} is not a member of the branch")]
    ReferenceOutsideBranch(u64),

    #[error("target coefficients are not unit norm (norm {0:.6})")]
    NotNormalized(f64),

    #[error("{0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}
