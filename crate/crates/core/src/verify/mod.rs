//! Ground-truth structure oracles, shape signatures and portal ignition.

mod canonical;
mod ignite;
mod templates;

pub use canonical::{canonicalize, shape_signature, CanonicalShape, EmptySet};
pub use ignite::ignite;
pub use templates::{verify_structure, Shape, Template, VerifyReport};
