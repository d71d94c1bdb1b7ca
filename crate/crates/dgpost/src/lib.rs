//! Exact-arithmetic Postnikov towers, k-invariants and obstruction classes
//! for finite dg categories over ℚ or a prime field.

pub mod cells;
pub mod complexes;
pub mod dgcat;
pub mod error;
pub mod exactlin;
pub mod manifest;
pub mod obstruct;
pub mod postnikov;
pub mod samples;
pub mod sqzero;

pub use error::{Error, Result};
