use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("composite system needs at least one subsystem")]
    EmptySystem,

    #[error("duplicate subsystem name `{0}`")]
    DuplicateSubsystem(String),

    #[error("fock mode `{name}` has cutoff {cutoff}, must be at least 2")]
    InvalidCutoff { name: String, cutoff: usize },

    #[error("subsystem `{0}` not found")]
    UnknownSubsystem(String),

    #[error("label `{label}` is not a basis label of subsystem `{subsystem}`")]
    UnknownLabel { subsystem: String, label: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not bound to target subsystems")]
    UnboundTargets,

    #[error("amplitude {amplitude:.3e} on basis index {index} lies outside the operator support")]
    SupportViolation { index: usize, amplitude: f64 },

    #[error("projection onto `{label}` of `{subsystem}` has zero norm")]
    ZeroNorm { subsystem: String, label: String },

    #[error("states live on different composite systems")]
    SystemMismatch,

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("expectation value has imaginary part {0:.3e}; operator is not Hermitian")]
    NotHermitian(f64),

    #[error("subsystem `{0}` is not in a product state with the rest of the system")]
    Entangled(String),

    #[error("qubit embedding on `{subsystem}` is invalid: {reason}")]
    InvalidEmbedding { subsystem: String, reason: String },

    #[error("two qubit embeddings target subsystem `{0}`")]
    EmbeddingCollision(String),

    #[error("step {step}: {reason}")]
    Validation { step: usize, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
