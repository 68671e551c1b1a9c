//! Simulation-backed software stack for a fluidically innervated lattice
//! fingertip: a forward pressure model, geometric displacement estimation,
//! a learned contact classifier/regressor, a virtual-spring admittance loop,
//! tactile maze exploration, and the binary telemetry tooling around them.

pub mod admittance;
pub mod checksum;
pub mod config;
pub mod error;
pub mod estimator;
pub mod exec;
pub mod maze;
pub mod model;
pub mod net;
pub mod svg;
pub mod telemetry;

pub use error::{Error, Result};
