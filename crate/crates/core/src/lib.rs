//! Anti-jamming NOMA power allocation in a two-cell downlink.
//!
//! Two base stations each serve a weak and a strong user with superposition
//! coding while a smart jammer picks its power after observing theirs. The
//! crate computes exact SINRs and utilities, the jammer's best response, the
//! equilibria of the base stations' game on a quantized power grid, and
//! trains independent learning agents against the jammer.

pub mod channel;
pub mod error;
pub mod game;
pub mod harness;
pub mod jammer;
pub mod learn;
pub mod numeric;
pub mod rates;

pub use error::{Error, Result};
