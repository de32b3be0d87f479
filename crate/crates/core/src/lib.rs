//! Coverage-driven design verification with neural-network stimulus
//! prediction.
//!
//! Constrained-random simulation of a transaction-level DUT harvests its own
//! labelled data; a small feed-forward network learns to map coverage goals
//! to input stimuli; the closure engine then steers stimulus toward coverage
//! holes (or toward likely failures) instead of drawing blindly.

pub mod ann;
pub mod cli;
pub mod config;
pub mod coverage;
pub mod dut;
pub mod engine;
pub mod error;
pub mod reporting;
pub mod stimulus;

pub use error::{Error, Result};
