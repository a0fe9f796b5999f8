use thiserror::Error;

use crate::symcore::SymError;

use super::fields::Role;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("expected {expected}, got a field with role {found}")]
    RoleMismatch { expected: String, found: Role },
    #[error("field has a nonzero d/d{0} component but must be vertical")]
    NonVertical(String),
    #[error("total derivative of `{0}` would leave J2 (input already depends on second-jet coordinates)")]
    OrderOverflow(String),
    #[error("{0}")]
    NotOnJ1(String),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },
    #[error("expected {expected} entries, got {found}")]
    Shape { expected: usize, found: usize },
    #[error(transparent)]
    Sym(#[from] SymError),
}
