//! Numerical laboratory for Gardner breathers: exact solutions, conserved
//! functionals, pointwise identities, the linearized operator and its
//! spectrum, and a pseudospectral solver with modulation.

pub mod ad;
pub mod error;
pub mod dynamics;
pub mod exact;
pub mod exec;
pub mod fields;
pub mod functionals;
pub mod identities;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
