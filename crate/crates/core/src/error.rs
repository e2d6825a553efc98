use thiserror::Error;

/// Errors produced anywhere in the compilation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitMismatch { left: usize, right: usize },

    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("qubit relabeling is not injective: qubit {target} is targeted twice")]
    NonInjectiveMap { target: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("integral table violates index symmetry: {0}")]
    Asymmetric(String),

    #[error("orbital index {index} out of range for {n_orbitals} orbitals")]
    OrbitalOutOfRange { index: usize, n_orbitals: usize },

    #[error("{what} too large: {size} exceeds the limit of {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("term {term} carries an odd number of Y letters; gadgetize it directly instead")]
    OddYCount { term: String },

    #[error("cannot factor group into commuting operators: {0}")]
    Factorization(String),

    #[error("invalid gadget parameter: {0}")]
    InvalidParameter(String),

    #[error("ancilla qubit {qubit} is assigned more than once")]
    AncillaOverlap { qubit: usize },

    #[error("round limit {limit} reached with {remaining} terms still above 2-local")]
    RoundLimit { limit: usize, remaining: usize },

    #[error("term {term} is outside the allowed interaction set and cannot be reduced")]
    Unrealizable { term: String },

    #[error("resolvent is singular at z = {z}")]
    SingularResolvent { z: f64 },

    #[error("self-energy series order {0} is unsupported (2..=4)")]
    SeriesOrder(usize),

    #[error("vector length {got} does not match operator dimension {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("bisection failed: {0}")]
    Bracket(String),

    #[error("Hamiltonian is not 2-local: {0}")]
    NotTwoLocal(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Wraps an error with the name of the pipeline stage that produced it.
    pub fn at(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
