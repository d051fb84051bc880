//! Controversy detection from discussion-thread structure.
//!
//! Posts and their comments are assembled into reply trees
//! ([`thread`]), reduced to thirteen structural, interaction, text and
//! ascending-gradient features ([`features`]), and classified by a small
//! family of learners including a histogram gradient-boosted tree model
//! with gradient-based one-side sampling and exclusive feature bundling
//! ([`learn`]). [`stats`] holds the two-sample KS test and feature
//! importance; [`harness`] runs the evaluation protocols end to end.

pub mod error;
pub mod features;
pub mod harness;
pub mod learn;
pub mod stats;
pub mod thread;

pub use error::{Error, Result};
