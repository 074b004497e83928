//! Chained polar codes for three-receiver layered broadcast channels with
//! nested message sets.

pub mod channel;
pub mod codec;
pub mod error;
pub mod harness;
pub mod io;
pub mod polar;
pub mod prob;
pub mod region;

pub use error::{Error, Result};
