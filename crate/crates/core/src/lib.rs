//! Predictive density estimation for spherically symmetric location models.
//!
//! The crate evaluates integrated L1 and L2 risks of predictive densities,
//! solves for the scale-expansion thresholds under which one estimator
//! dominates another, computes Stein-type shrinkage caps, and verifies these
//! results by Monte Carlo and quadrature.
//!
//! Closed-form layers (`risk::normal`, the normal distances in [`metrics`])
//! are generic over [`Scalar`]; the aliases below fix the `f64` instances.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod densities;
pub mod error;
pub mod estimators;
pub mod metrics;
pub mod mixing;
pub mod quad;
pub mod risk;
pub mod roots;
pub mod scalar;
pub mod serde_ext;
pub mod sim;
pub mod special;
pub mod verify;

pub use densities::{MixingLaw, RadialDensity, SmnDensity};
pub use error::{Error, Result};
pub use scalar::Scalar;

pub type NormalModel64 = risk::NormalModel<f64>;
pub type NormalModel32 = risk::NormalModel<f32>;
