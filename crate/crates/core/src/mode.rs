// SPDX-License-Identifier: Apache-2.0
use serde::{Deserialize, Serialize};

/// How a quantity is computed: exhaustively, or from seeded samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    Exact,
    MonteCarlo { trials: u64, seed: u64 },
}

impl Mode {
    pub fn monte_carlo(trials: u64, seed: u64) -> Self {
        Mode::MonteCarlo { trials, seed }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::MonteCarlo { .. } => "monte_carlo",
        }
    }

    pub fn trials(&self) -> Option<u64> {
        match self {
            Mode::Exact => None,
            Mode::MonteCarlo { trials, .. } => Some(*trials),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Mode::Exact => None,
            Mode::MonteCarlo { seed, .. } => Some(*seed),
        }
    }
}
