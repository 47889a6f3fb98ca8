// Dense linear algebra reads more clearly with explicit index loops.
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod circuit;
pub mod cli;
pub mod compiled;
pub mod error;
pub mod hhl;
pub mod pipeline;
pub mod qstate;

pub use error::{Error, Result};
