//! Quasi-Monte Carlo estimation of the Bures/SD geometry of two-qubit states.

pub mod cli;
pub mod constants;
pub mod curvature;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod measures;
pub mod qmc;
pub mod quadrature;
pub mod report;
pub mod separability;
pub mod state_space;

pub use error::{Error, Result};
