//! Walsh-spectral analysis of discrete distributions and the sampling
//! limits that follow from it.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectral`]: fast Walsh-Hadamard transform, biases and spectral mass.
//! - [`infotheory`]: entropy, channel capacity (closed forms, small-bias
//!   approximations and a Blahut-Arimoto solver) and Rényi divergence.
//! - [`sampling`]: minimum sample sizes and detectability conditions.
//! - [`distinguisher`]: a deterministic Monte Carlo harness that measures how
//!   well signal and uniform noise can be told apart at a given sample size.

pub mod distinguisher;
mod error;
pub mod infotheory;
pub mod sampling;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{Distribution, Mask, RealSignal, WalshSpectrum};
