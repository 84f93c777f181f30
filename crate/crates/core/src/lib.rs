// SPDX-License-Identifier: Apache-2.0
//! A laboratory for the cell-probe sampling model.
//!
//! The crate is organised in four layers:
//!
//! * [`forest`]: arity-λ decision trees and forests, evaluation, restriction,
//!   pruning, query profiles and locality.
//! * [`samplers`]: the Thorp shuffle compiled to a forest, Fisher–Yates, the
//!   exact uniform-permutation table and random forest corpora.
//! * [`analysis`]: exact and Monte-Carlo output distributions, statistical
//!   distance, entropy, conditional entropy, collisions and Hamming
//!   neighborhoods.
//! * [`harness`]: verifiers that check finite instances of the inequalities
//!   behind the lower bound and return an [`ExperimentReport`].

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod enumerate;
pub mod error;
pub mod forest;
pub mod harness;
mod mode;
pub mod rng;
pub mod samplers;

pub use error::{Error, Result};
pub use mode::Mode;
pub use forest::{
    BucketStructure, DecisionForest, DecisionTree, InputSpace, Node, OutputSpace,
    PartialAssignment, QueryProfile, Symbol, Transcript,
};
pub use harness::report::{ExperimentReport, Status};

/// Absolute tolerance used for every comparison of exactly computed probabilities.
pub const TOLERANCE: f64 = 1e-9;

/// Default size limit for exact enumeration of an input cube (λ^s states).
pub const DEFAULT_STATE_BUDGET: u64 = 1 << 26;

/// Default limit on the number of materialised members of an outcome set.
pub const DEFAULT_SET_BUDGET: u64 = 1 << 22;

/// Default Monte-Carlo trial count.
pub const DEFAULT_TRIALS: u64 = 100_000;
