//! Spectral community detection for weighted bipartite networks.
//!
//! The crate covers the full pipeline: block-model parameters and their
//! expected adjacency, edge sampling under several laws, the spectral
//! detectors and their baselines, clustering metrics, theoretical bound
//! evaluation, and a seeded simulation harness.

pub mod detect;
pub mod error;
pub mod interface;
pub mod experiments;
pub mod linalg;
pub mod membership;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod sampling;
pub mod theory;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use membership::Membership;
