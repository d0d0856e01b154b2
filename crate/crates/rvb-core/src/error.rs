//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LadderError {
    #[error("invalid ladder geometry: {0}")]
    InvalidLadder(String),
    #[error("dimer count k={k} out of range for {rungs} rungs")]
    KOutOfRange { k: usize, rungs: usize },
    #[error("site counts mismatch: {0} vs {1}")]
    SiteMismatch(usize, usize),
    #[error("kept-site list is invalid: {0}")]
    BadKeepList(String),
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("rung pair ({0}, {1}) is not an adjacent pair of the ladder")]
    BadRungPair(usize, usize),
    #[error("undefined junction state: {0}")]
    BadJunction(String),
    #[error("integer recursion overflow at x={0}")]
    DSequenceOverflow(u32),
    #[error("density matrix is not of the expected form: {0}")]
    FormViolation(String),
    #[error("system size {0} exceeds the exact ceiling of {1} sites")]
    SizeCeiling(usize, usize),
    #[error("sector counts (n_up={n_up}, n_down={n_down}) exceed {sites} sites")]
    BadSector {
        n_up: usize,
        n_down: usize,
        sites: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("electron count for n_el={0} is not an even integer")]
    BadDensity(f64),
    #[error("eigensolver failed to converge within {0} iterations")]
    NonConvergence(usize),
}

pub type Result<T> = std::result::Result<T, LadderError>;
