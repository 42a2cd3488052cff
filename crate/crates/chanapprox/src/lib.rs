//! Approximation of finite-input, finite-output channels by upgraded and
//! degraded channels with a prescribed output-alphabet budget.
//!
//! Given a joint input/output distribution, the crate constructs
//!
//! * an *upgraded* channel (the original is a processing of it) whose
//!   output alphabet has at most L symbols, by greedy splitting of the
//!   conditional binary sub-problems of the one-hot input encoding, and
//! * a *degraded* channel (a processing of the original) under the same
//!   budget, by greedy merging,
//!
//! together with the exact mutual-information cost of either reduction and
//! the closed-form guarantees the constructions satisfy. Verification
//! suites and oracles (interval-optimal quantizer, direct recomputation)
//! cross-check every piece.
//!
//! All information values are in nats unless a presentation layer converts
//! them. With the default `parallel` feature the batch helpers in [`par`]
//! use rayon; disabling it gives bit-identical results on a single thread.

// index-based loops over co-indexed numeric arrays read better here than
// chained zips
#![allow(clippy::needless_range_loop)]

pub mod binary;
pub mod bounds;
pub mod dist;
mod error;
pub mod gen;
pub mod io;
mod numerics;
pub mod onehot;
pub mod par;
pub mod verify;

pub use binary::{
    final_beta_map, greedy_merge, greedy_split, merge_cost, split_cost, split_weight, BetaSplit,
    DegradeOutcome, StepCost, UpgradeOutcome,
};
pub use dist::{
    binary_entropy, binary_kl, mutual_information, BinaryPosteriorChannel, JointDistribution,
    PruneReport,
};
pub use error::{Error, Result};
pub use onehot::{
    apply_quantizer, binary_chain, coordinate_budget, degrade, one_hot, upgrade, BinaryChain,
    OneHotDegradeResult, OneHotUpgradeResult,
};

/// Nats-to-bits conversion factor application.
pub fn nats_to_bits(nats: f64) -> f64 {
    nats / std::f64::consts::LN_2
}
