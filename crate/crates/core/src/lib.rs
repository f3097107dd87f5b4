//! Semi-differentially-private estimation and optimization.
//!
//! Mechanisms here are private only with respect to the samples flagged
//! private in a [`SplitDataset`]; public samples are used as-is.

pub mod bench;
pub mod central;
pub mod dataset;
pub mod error;
pub mod local;
pub mod noise;
pub mod optim;
pub mod privacy;
pub mod rates;
pub mod rng;

pub use dataset::{split_counts, SplitCounts, SplitDataset};
pub use error::{Error, Result};
pub use privacy::{approx_dp_to_zcdp, zcdp_to_approx_dp, BoundedDistSpec, PrivacyBudget, ZcdpBudget};
pub use rng::RngStream;
