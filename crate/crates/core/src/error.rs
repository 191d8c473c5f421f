use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (‖h − h†‖_F = {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("site {site} out of range for a chain of {n} qubits")]
    SiteOutOfRange { site: usize, n: usize },

    #[error("link {link} out of range (chain has {links} links)")]
    LinkOutOfRange { link: usize, links: usize },

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("f = {0} outside [0, 1/3]")]
    FOutOfRange(f64),

    #[error("gamma = {0} outside (0, 1)")]
    GammaOutOfRange(f64),

    #[error("unknown basis label {0:?}")]
    UnknownLabel(String),

    #[error("unknown site pair ({0}, {1})")]
    UnknownPair(usize, usize),

    #[error("time grid unsuitable for classification: {0}")]
    GridTooCoarse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
