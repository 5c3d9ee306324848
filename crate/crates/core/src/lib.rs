//! Numerical laboratory for Toeplitz operators on weighted Bergman spaces of
//! the type-IV Cartan domain (the Lie ball).

pub mod actions;
pub mod bergman;
pub mod error;
pub mod geometry;
pub mod jordan;
pub mod mc;
pub mod polyspaces;
pub mod spectral;
pub mod symbols;

pub use error::{Error, Result};
