// SPDX-License-Identifier: Apache-2.0
//! Query statistics `θ_j`: the number of trees that probe cell `j` on a
//! uniformly random input.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DecisionForest, Node};
use crate::enumerate::Cube;
use crate::error::Result;
use crate::rng;
use crate::{Mode, TOLERANCE};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryProfile {
    pub mu: f64,
    /// `E[θ_j]` per cell.
    pub expected_counts: Vec<f64>,
    /// `Pr[θ_j > μ]` per cell.
    pub tail: Vec<f64>,
    pub mode: Mode,
}

impl QueryProfile {
    pub fn max_expected(&self) -> f64 {
        self.expected_counts.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_tail(&self) -> f64 {
        self.tail.iter().copied().fold(0.0, f64::max)
    }

    /// Expected total number of probes.
    pub fn total_expected(&self) -> f64 {
        self.expected_counts.iter().sum()
    }
}

/// `E[θ_j]` for every cell, computed from the tree structure alone. A node
/// at level `t` is reached with probability `λ^{-t}` because no path probes
/// a cell twice.
pub fn expected_query_counts(forest: &DecisionForest) -> Vec<f64> {
    let inv = 1.0 / forest.lambda() as f64;
    let mut counts = vec![0.0; forest.s()];
    for tree in forest.trees() {
        tree.visit(|node, level| {
            if let Node::Query { cell, .. } = node {
                counts[*cell] += inv.powi(level as i32);
            }
        });
    }
    counts
}

#[derive(Clone)]
struct Tally {
    sums: Vec<u64>,
    over: Vec<u64>,
    theta: Vec<u32>,
}

impl Tally {
    fn new(s: usize) -> Self {
        Self {
            sums: vec![0; s],
            over: vec![0; s],
            theta: vec![0; s],
        }
    }

    fn record(&mut self, forest: &DecisionForest, input: &[u32], mu: f64) {
        for tree in forest.trees() {
            tree.eval_with(input, |c| self.theta[c] += 1);
        }
        for j in 0..self.theta.len() {
            let t = std::mem::take(&mut self.theta[j]);
            if t > 0 {
                self.sums[j] += t as u64;
                if t as f64 > mu + TOLERANCE {
                    self.over[j] += 1;
                }
            }
        }
    }

    fn merge(&mut self, other: Tally) {
        for (a, b) in self.sums.iter_mut().zip(other.sums) {
            *a += b;
        }
        for (a, b) in self.over.iter_mut().zip(other.over) {
            *a += b;
        }
    }
}

/// Per-cell `E[θ_j]` and `Pr[θ_j > μ]`, by full enumeration of the mentioned
/// cells or by seeded Monte-Carlo sampling.
pub fn query_profile(
    forest: &DecisionForest,
    mu: f64,
    mode: Mode,
    budget: u64,
) -> Result<QueryProfile> {
    let s = forest.s();
    let (tally, total) = match mode {
        Mode::Exact => {
            let cube = Cube::new(s, forest.lambda(), forest.mentioned_cells().into_iter().collect(), budget)?;
            let tally = cube.fold(
                || Tally::new(s),
                |acc, x| acc.record(forest, x, mu),
                |a, b| a.merge(b),
            );
            (tally, cube.size())
        }
        Mode::MonteCarlo { trials, seed } => {
            let lambda = forest.lambda();
            let chunks = trials.div_ceil(1024).max(1);
            let parts: Vec<Tally> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut acc = Tally::new(s);
                    let mut input = vec![0; s];
                    for t in c * 1024..((c + 1) * 1024).min(trials) {
                        let mut r = rng::stream(seed, t);
                        for v in input.iter_mut() {
                            *v = r.gen_range(0..lambda);
                        }
                        acc.record(forest, &input, mu);
                    }
                    acc
                })
                .collect();
            let mut acc = Tally::new(s);
            for p in parts {
                acc.merge(p);
            }
            (acc, trials)
        }
    };
    let n = total.max(1) as f64;
    Ok(QueryProfile {
        mu,
        expected_counts: tally.sums.iter().map(|&x| x as f64 / n).collect(),
        tail: tally.over.iter().map(|&x| x as f64 / n).collect(),
        mode,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzCheck {
    pub is_average_lipschitz: bool,
    pub is_mu_delta_lipschitz: bool,
    /// Cell with the largest `E[θ_j]` (lowest index on ties).
    pub worst_cell: usize,
    pub max_expected: f64,
    pub max_tail: f64,
}

/// Average-μ-Lipschitz: `max_j E[θ_j] ≤ μ`. (μ, δ)-Lipschitz: `max_j Pr[θ_j > μ] ≤ δ`.
pub fn check_lipschitz(profile: &QueryProfile, mu: f64, delta: f64) -> LipschitzCheck {
    let mut worst_cell = 0;
    for (j, &e) in profile.expected_counts.iter().enumerate() {
        if e > profile.expected_counts[worst_cell] + TOLERANCE {
            worst_cell = j;
        }
    }
    let max_expected = profile.max_expected();
    let max_tail = profile.max_tail();
    LipschitzCheck {
        is_average_lipschitz: max_expected <= mu + TOLERANCE,
        is_mu_delta_lipschitz: max_tail <= delta + TOLERANCE,
        worst_cell,
        max_expected,
        max_tail,
    }
}
