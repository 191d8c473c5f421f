//! Simulation of qubit chains in which every pair of neighbouring qubits
//! decays into a shared environment.
//!
//! The crate builds the Lindblad generator of such a chain (open or closed,
//! arbitrary per-link rates), evolves density matrices with it, locates
//! steady states and their kernel structure, and measures pairwise
//! entanglement with the Wootters concurrence. [`oracle`] holds the
//! closed-form stationary results for the three-site open chain.

pub mod cli;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
