use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice dimensions: {0}")]
    InvalidDimensions(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid boundary configuration: {0}")]
    InvalidBoundary(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("wire {wire} out of range 1..={wires}")]
    WireOutOfRange { wire: usize, wires: usize },
    #[error("tensor violates the eight-vertex zero pattern: {0}")]
    NotEightVertexForm(String),
    #[error("circuit is not brickwork-shaped: {0}")]
    NotBrickwork(String),
    #[error("circuit is not edge-model shaped: {0}")]
    NotEdgeShaped(String),
    #[error("gate is not a matchgate: {0}")]
    NotMatchgate(String),
    #[error("matchgate has a singular block: {0}")]
    NonInvertibleGate(String),
    #[error("matrix is not antisymmetric: {0}")]
    NotAntisymmetric(String),
    #[error("pfaffian of odd-dimensional matrix ({0})")]
    OddDimension(usize),
    #[error("edge table is singular for the high-temperature reduction: {0}")]
    SingularTable(String),
    #[error("edge table is not of zero-field Ising form: {0}")]
    NotIsingForm(String),
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("not a sigma-x / zz rotation circuit: {0}")]
    NotXZCircuit(String),
    #[error("gate is not unitary: {0}")]
    NotUnitary(String),
    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Coarse classification used by frontends to pick exit codes.
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            TooLarge(_) => ErrorCategory::ResourceCap,
            NotEightVertexForm(_) | NotBrickwork(_) | NotEdgeShaped(_) | NotMatchgate(_)
            | NonInvertibleGate(_) | NotIsingForm(_) | SingularTable(_) | NumericalBreakdown(_)
            | NotXZCircuit(_) | NotUnitary(_) | UnsupportedGate(_) => {
                ErrorCategory::MethodInapplicable
            }
            InvalidDimensions(_) | ShapeMismatch(_) | InvalidBoundary(_)
            | WireOutOfRange { .. } | NotAntisymmetric(_) | OddDimension(_)
            | InvalidInput(_) => ErrorCategory::InvalidInput,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    InvalidInput,
    MethodInapplicable,
    ResourceCap,
}
