use thiserror::Error;

/// Errors produced by the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("basis dimension {dimension} needs {bytes} bytes per operator, over the {budget}-byte budget")]
    MemoryBudget {
        dimension: usize,
        bytes: u128,
        budget: u64,
    },

    #[error("degree of freedom {index} out of range for a {n_dofs}-dof basis")]
    DofOutOfRange { index: usize, n_dofs: usize },

    #[error("operands live on different bases")]
    BasisMismatch,

    #[error("state is not normalized (norm = {norm})")]
    Unnormalized { norm: f64 },

    #[error("operator is not hermitian")]
    NotHermitian,

    #[error("invalid interior block: {0}")]
    InvalidBlock(String),

    #[error("coherent amplitude |alpha|^2 = {mean_number} leaves tail mass {tail:e} above the {threshold:e} admission threshold")]
    CoherentTail {
        mean_number: f64,
        tail: f64,
        threshold: f64,
    },

    #[error("eigendecomposition failed: {0}")]
    Eigensolver(String),

    #[error("time grid is invalid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value encountered at t = {t}")]
    NonFinite { t: f64 },

    #[error("integrator `{method}` cannot handle {reason}")]
    UnsupportedIntegrator { method: &'static str, reason: String },

    #[error("wrong Hamiltonian kind: {0}")]
    WrongHamiltonian(String),

    #[error("cannot parse polynomial at line {line}: {reason}")]
    PolyParse { line: usize, reason: String },

    #[error("unknown check `{0}`")]
    UnknownCheck(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
