//! Ergodic achievable rates of a pilot-assisted cognitive-radio link.
//!
//! A secondary transmitter/receiver pair senses a licensed band with an
//! energy detector, estimates the Gauss-Markov fading channel from periodic
//! pilot symbols with causal or noncausal Wiener filters, and transmits under
//! an average interference constraint. This crate computes the detector
//! operating characteristics, the estimation error variances, the resulting
//! four-scenario achievable-rate lower bound, and the interference-constrained
//! power allocation that maximizes it — each backed by an independent Monte
//! Carlo or linear-algebra oracle.
//!
//! The `cograte` binary exposes the experiment sweeps; see the crate README.

pub mod channel;
pub mod cli;
pub mod error;
pub mod estimation;
pub mod frame;
pub mod optimizer;
pub mod quad;
pub mod rate;
pub mod sensing;
pub mod specfun;

pub(crate) mod rng;

pub use error::{Error, Result};
