//! Finite elements for H(curl) and H(div) model problems and two-level
//! overlapping additive Schwarz preconditioners for them.

pub mod assembly;
pub mod decomp;
pub mod elements;
pub mod error;
pub mod experiments;
pub mod factor;
pub mod krylov;
pub mod mesh;
pub mod quadrature;
pub mod schwarz;
pub mod sparse;

pub use error::{Error, Result};
