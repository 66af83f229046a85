//! Secure multiplex coding for discrete memoryless wiretap channels.
//!
//! The crate is organised bottom-up:
//!
//! - [`channel`]: distributions, channels, cascades and scalar information measures.
//! - [`spectrum`]: exact finite-blocklength information-density spectra.
//! - [`capacity`]: capacity and secrecy-capacity solvers, multiplex rate regions.
//! - [`code`]: the random multiplex codebook and its decoders.
//! - [`security`]: exact per-message error, leakage and variational-distance secrecy.
//! - [`ensemble`]: random-coding ensemble bounds and experiments.
//! - [`resolvability`]: channel-resolvability distance sweeps.
//!
//! All logarithms are base 2 and all rates are in bits per channel use.

pub mod capacity;
pub mod channel;
pub mod channel_file;
pub mod code;
pub mod ensemble;
mod error;
pub mod resolvability;
pub mod rng;
pub mod security;
pub mod spectrum;
pub mod stats;

pub use capacity::{RateTuple, RegionMode, RegionSpec, SecrecySolution};
pub use channel::{Dist, Dmc, JointWord, WiretapPair};
pub use code::{DecodeOutcome, MultiplexCode};
pub use ensemble::{BoundInputs, EnsembleResult, LemmaBounds};
pub use error::{Error, Result};
pub use resolvability::{SweepTable, TrendReport};
pub use security::{ConditionalOutput, MessageSecurity, SecurityReport};
pub use spectrum::Spectrum;

/// Tolerance used when validating that probabilities sum to one.
pub const PROB_TOL: f64 = 1e-12;

/// Largest outcome space (`|alphabet|^n`, or joint outcome count) that exact
/// enumeration will attempt.
pub const ENUMERATION_BUDGET: u64 = 1 << 24;
