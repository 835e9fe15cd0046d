//! Lowering of basis translations and classical functions to gates.

pub mod align;
pub mod classical;
pub mod perm;
pub mod standardize;
pub mod translation;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SynthError {
    #[error("{what} of size {dim} exceeds the limit of {limit}")]
    TooLarge { what: &'static str, dim: usize, limit: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("internal synthesis error: {0}")]
    Internal(String),
}
