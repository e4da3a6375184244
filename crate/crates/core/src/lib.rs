//! Toric codes on twisted cubic tori.

pub mod code;
pub mod complex;
pub mod distance;
pub mod error;
pub mod gf2;
pub mod injection;
pub mod lattice;
pub mod protocols;
pub mod symmetry;

pub use error::{Error, Result};
