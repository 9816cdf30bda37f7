//! Robust linear regression under adversarial contamination.
//!
//! The crate provides a filter-based robust regressor for Gaussian designs
//! with an empirical concentration certificate, generators for two families
//! of hard instances (one-dimensional moment-matched mixtures and a
//! two-block Gaussian corruption), a Hermite-expansion bound on low-degree
//! distinguishing advantage, an estimation-to-testing reduction, and a set of
//! independent numerical oracles used to validate all of the above.

pub mod certificate;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod lowdeg;
pub mod model;
pub mod oracles;
pub mod reduction;
pub mod regress;
pub mod rng;
pub mod sampling;
pub mod sq;
pub mod suite;

pub use error::{Error, Result};
pub use model::{mahalanobis_error, random_unit_vector, Covariance, Dataset, LinearModelSpec, SpikedCovariance};
pub use rng::Seed;
