//! Simulation sweeps and helpers for real networks.

mod analysis;
mod simulation;

pub use analysis::*;
pub use simulation::*;
