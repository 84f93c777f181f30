// SPDX-License-Identifier: Apache-2.0
//! Arity-λ decision trees and forests.

mod assignment;
mod buckets;
pub mod format;
mod locality;
mod model;
mod profile;
mod tree;

pub use assignment::PartialAssignment;
pub use buckets::BucketStructure;
pub use locality::{independent_outputs, locality, Locality};
pub use model::DecisionForest;
pub use profile::{
    check_lipschitz, expected_query_counts, query_profile, LipschitzCheck, QueryProfile,
};
pub use tree::{DecisionTree, Node, Transcript};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Input and output symbols. The bottom symbol ⊥ of an output space with
/// alphabet `[σ]` is encoded as `σ`.
pub type Symbol = u32;

/// `s` input cells over the alphabet `[λ]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InputSpace {
    pub s: usize,
    pub lambda: Symbol,
}

impl InputSpace {
    pub fn new(s: usize, lambda: Symbol) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidInput("input space needs at least one cell".into()));
        }
        if lambda < 2 {
            return Err(Error::InvalidInput(format!(
                "input alphabet must have at least 2 symbols, got {lambda}"
            )));
        }
        Ok(Self { s, lambda })
    }

    /// `λ^s` as a real; may be infinite.
    pub fn cube_size(&self) -> f64 {
        (self.lambda as f64).powi(self.s as i32)
    }

    pub fn is_enumerable(&self, budget: u64) -> bool {
        self.cube_size() <= budget as f64
    }

    pub fn check_input(&self, input: &[Symbol]) -> Result<()> {
        if input.len() != self.s {
            return Err(Error::InvalidInput(format!(
                "input has length {}, expected {}",
                input.len(),
                self.s
            )));
        }
        if let Some(v) = input.iter().find(|&&v| v >= self.lambda) {
            return Err(Error::InvalidInput(format!(
                "input symbol {v} outside alphabet of size {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// `m` output cells over `[σ]`, optionally extended by ⊥.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutputSpace {
    pub m: usize,
    pub sigma: Symbol,
    pub bot_allowed: bool,
}

impl OutputSpace {
    pub fn new(m: usize, sigma: Symbol, bot_allowed: bool) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("output space needs at least one cell".into()));
        }
        if sigma == 0 {
            return Err(Error::InvalidInput("output alphabet must be nonempty".into()));
        }
        Ok(Self {
            m,
            sigma,
            bot_allowed,
        })
    }

    pub fn bot(&self) -> Symbol {
        self.sigma
    }

    pub fn is_bot(&self, v: Symbol) -> bool {
        v == self.sigma
    }

    /// Number of distinct symbols an output cell can hold (σ, plus one for ⊥).
    pub fn effective_alphabet(&self) -> Symbol {
        self.sigma + self.bot_allowed as Symbol
    }

    pub fn admits(&self, v: Symbol) -> bool {
        v < self.sigma || (self.bot_allowed && v == self.sigma)
    }
}
