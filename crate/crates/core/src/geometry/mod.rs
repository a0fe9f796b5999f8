//! Jet-bundle calculus: forms, vector fields in their roles, total derivatives,
//! prolongations and second-order PDE fields.

mod context;
mod error;
mod fields;
mod forms;
mod jet;
mod sopde;

pub use context::{ContextError, JetContext};
pub use error::GeometryError;
pub use fields::{Role, VectorField};
pub use forms::{contact_form, volume_form, volume_minor, DiffForm};
pub use jet::{
    compose_pi10, compose_pi21, contact_value, prolong_along, prolong_on_e, total_derivative_0, total_derivative_1,
    vertical_endomorphism,
};
pub use sopde::{
    is_sopde, sopde_commutator_residual, sopde_from_coefficients, CommutatorResidual, KVectorField, SopdeCheck,
    SopdeTable,
};
