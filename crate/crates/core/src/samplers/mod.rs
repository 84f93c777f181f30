// SPDX-License-Identifier: Apache-2.0
//! Reference samplers and forest generators.

mod permutations;
mod random;
mod thorp;

pub use permutations::{fisher_yates, is_permutation, uniform_perm_distribution};
pub use random::{random_forest, ForestGenSpec};
pub use thorp::{thorp_buckets, thorp_forest, thorp_network, ThorpSpec};
