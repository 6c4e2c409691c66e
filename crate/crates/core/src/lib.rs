//! Two-temperature quantum thermometry.
//!
//! A single probe is exposed to two baths through quantum-controlled setups
//! (Mach-Zehnder variants and the quantum switch). The resulting two-parameter
//! state family is scored with the quantum Fisher information matrix and the
//! multi-parameter Cramér-Rao bound.

pub mod error;
pub mod estimation;
pub mod exec;
pub mod export;
pub mod interferometer;
pub mod setups;
pub mod sweep;
pub mod switch;
pub mod tensor;
pub mod thermal;
pub mod validation;

pub use error::{Error, Result};
