//! Exact deformation quantization on the standard symplectic torus.
//!
//! Everything is computed over Gaussian rationals with formal series in ν
//! truncated at a fixed order, so every identity is checked by equality.

pub mod acceptance;
pub mod config;
pub mod dynamics;
pub mod equivalence;
pub mod error;
pub mod fedosov;
pub mod flux;
pub mod formal;
pub mod star;
pub mod torus;
pub mod weyl;

pub use error::{Error, Result};
