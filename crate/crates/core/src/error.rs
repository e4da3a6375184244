use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("basis is not full rank")]
    Singular,
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("search budget exceeded after {nodes} nodes (last level {det})")]
    Budget { nodes: u64, det: u64 },
    #[error("checks do not commute: rows {0} and {1}")]
    NonCommuting(usize, usize),
    #[error("matrix is not symplectic")]
    NotSymplectic,
    #[error("not a code symmetry: {0}")]
    NotSymmetry(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("verification failed: {0}")]
    Mismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
