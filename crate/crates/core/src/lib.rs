//! Distinct subsequences of fixed and random strings.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod expectation;
pub mod model;
pub mod montecarlo;
pub mod oracle;
pub mod strings;
pub mod verify;

pub use error::{Error, Result};
