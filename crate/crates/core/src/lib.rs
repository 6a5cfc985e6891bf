//! Hyperdimensional computing and cyclic-group vector symbolic architectures.
//!
//! - [`vsa`]: binary and Z/nZ hypervectors with similarity, binding, bundling
//!   and permutation.
//! - [`rff`]: correlated basis construction from a target similarity matrix
//!   via Gaussian sampling and sign/quantile maps.
//! - [`expressivity`]: convex-hull feasibility of similarity matrices for
//!   binary HDC, classic-initialization limits, and bundling-angle theory.
//! - [`learn`]: encoders, single-pass bundling, SGD and perceptron learners.
//! - [`analysis`]: circuit-depth cost models.
//! - [`harness`]: datasets, synthetic tasks, experiment configs and records.

pub mod analysis;
pub mod error;
pub mod expressivity;
pub mod harness;
pub mod learn;
pub mod linalg;
pub mod rff;
pub mod rng;
pub mod vsa;

pub use error::{Error, Result};
pub use rng::{SeededRng, StreamFamily};
