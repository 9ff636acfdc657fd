//! Stochastic quantum entropy production for two-time measurement protocols
//! on unital open quantum systems, and reconstruction of its distribution
//! from moment-generating-function samples.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod charfunc;
pub mod distribution;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod parallel;
pub mod protocol;
pub mod random;
pub mod reconstruct;

pub use error::{Error, Result};
