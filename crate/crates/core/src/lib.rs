//! Group sequential trial design engine.
//!
//! Computes stopping boundaries for alpha- and beta-spending rules, evaluates
//! operating characteristics (stagewise exit probabilities, maximum and
//! expected sample sizes, inflation factors) through the forward recursion
//! over the canonical joint distribution of sequential Z-statistics, and
//! searches for the interim-analysis schedule that minimises the expected
//! sample size under the alternative hypothesis.
//!
//! The crate is `no_std` (with `alloc`); all file formats, configuration
//! parsing and the command-line front end live in the companion `gsd-cli`
//! crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod boundaries;
pub mod design;
pub mod error;
pub mod gauss;
pub mod optimizer;
pub mod oracle;
pub mod rates;
pub mod roots;

pub use error::{Error, Result};
pub use rates::InformationRates;
