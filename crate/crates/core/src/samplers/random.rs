// SPDX-License-Identifier: Apache-2.0
//! Seeded random forests with structural constraints.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{BucketStructure, DecisionForest, Node, Symbol};
use crate::rng;

/// Parameters of a random forest.
///
/// Shapes are drawn top-down: a node stops early with probability
/// `stop_prob`, otherwise it queries a uniformly chosen admissible cell.
/// Leaves are ⊥ with probability `bot_prob` and uniform over `[σ]` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestGenSpec {
    pub s: usize,
    pub lambda: Symbol,
    pub m: usize,
    pub sigma: Symbol,
    pub depth: usize,
    /// Every tree has depth at most one.
    pub nonadaptive: bool,
    /// Max number of trees that may query a given cell (`ℓ`).
    pub max_influence: Option<usize>,
    /// Max number of distinct cells per tree (`k`).
    pub max_locality: Option<usize>,
    /// Level-`t` queries are drawn from `buckets[t]`.
    pub buckets: Option<Vec<Vec<usize>>>,
    pub stop_prob: f64,
    pub bot_prob: f64,
    pub seed: u64,
}

impl Default for ForestGenSpec {
    fn default() -> Self {
        Self {
            s: 4,
            lambda: 2,
            m: 2,
            sigma: 2,
            depth: 2,
            nonadaptive: false,
            max_influence: None,
            max_locality: None,
            buckets: None,
            stop_prob: 0.2,
            bot_prob: 0.0,
            seed: 0,
        }
    }
}

struct Builder<'a> {
    spec: &'a ForestGenSpec,
    depth: usize,
    buckets: Option<BucketStructure>,
    influence: Vec<usize>,
    rng: rng::Rng,
}

impl Builder<'_> {
    fn leaf(&mut self) -> Node {
        if self.spec.bot_prob > 0.0 && self.rng.gen_bool(self.spec.bot_prob) {
            Node::Leaf(self.spec.sigma)
        } else {
            Node::Leaf(self.rng.gen_range(0..self.spec.sigma))
        }
    }

    fn admissible(&self, level: usize, path: &[usize], used: &BTreeSet<usize>) -> Vec<usize> {
        let pool: Vec<usize> = match &self.buckets {
            Some(b) if level < b.len() => b.buckets()[level].clone(),
            Some(_) => Vec::new(),
            None => (0..self.spec.s).collect(),
        };
        let can_add = self.spec.max_locality.is_none_or(|k| used.len() < k);
        pool.into_iter()
            .filter(|c| !path.contains(c))
            .filter(|c| {
                used.contains(c)
                    || (can_add && self.spec.max_influence.is_none_or(|l| self.influence[*c] < l))
            })
            .collect()
    }

    fn node(&mut self, level: usize, path: &mut Vec<usize>, used: &mut BTreeSet<usize>) -> Node {
        if level >= self.depth || self.rng.gen_bool(self.spec.stop_prob) {
            return self.leaf();
        }
        let Some(&cell) = self.admissible(level, path, used).choose(&mut self.rng) else {
            return self.leaf();
        };
        if used.insert(cell) {
            self.influence[cell] += 1;
        }
        path.push(cell);
        let children = (0..self.spec.lambda)
            .map(|_| self.node(level + 1, path, used))
            .collect();
        path.pop();
        Node::query(cell, children)
    }
}

/// Deterministic in `spec` (including its seed).
pub fn random_forest(spec: &ForestGenSpec) -> Result<DecisionForest> {
    if !(0.0..=1.0).contains(&spec.stop_prob) || !(0.0..=1.0).contains(&spec.bot_prob) {
        return Err(Error::Unsatisfiable(
            "stop_prob and bot_prob must lie in [0, 1]".into(),
        ));
    }
    if spec.sigma == 0 || spec.m == 0 || spec.s == 0 || spec.lambda < 2 {
        return Err(Error::Unsatisfiable(format!(
            "need s, m, σ >= 1 and λ >= 2, got s = {}, m = {}, σ = {}, λ = {}",
            spec.s, spec.m, spec.sigma, spec.lambda
        )));
    }
    let buckets = spec
        .buckets
        .clone()
        .map(|b| BucketStructure::new(spec.s, b))
        .transpose()
        .map_err(|e| Error::Unsatisfiable(e.to_string()))?;
    let depth = if spec.nonadaptive {
        spec.depth.min(1)
    } else {
        spec.depth
    };
    let mut b = Builder {
        spec,
        depth,
        buckets,
        influence: vec![0; spec.s],
        rng: rng::seeded(spec.seed),
    };
    let roots = (0..spec.m)
        .map(|_| b.node(0, &mut Vec::new(), &mut BTreeSet::new()))
        .collect();
    DecisionForest::from_nodes(spec.s, spec.lambda, spec.sigma, spec.bot_prob > 0.0, roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::{format, locality};

    #[test]
    fn constraints_hold() {
        for seed in 0..40 {
            let spec = ForestGenSpec {
                s: 6,
                lambda: 3,
                m: 5,
                sigma: 3,
                depth: 3,
                max_locality: Some(2),
                max_influence: Some(2),
                stop_prob: 0.1,
                seed,
                ..Default::default()
            };
            let f = random_forest(&spec).unwrap();
            let loc = locality(&f);
            assert!(loc.k <= 2);
            assert!(loc.max_influence() <= 2);
            assert!(f.depth() <= 3);
        }
    }

    #[test]
    fn nonadaptive_is_shallow() {
        let spec = ForestGenSpec {
            depth: 4,
            nonadaptive: true,
            stop_prob: 0.0,
            ..Default::default()
        };
        let f = random_forest(&spec).unwrap();
        assert!(f.trees().iter().all(|t| t.depth() == 1));
    }

    #[test]
    fn bucketed_generation() {
        let spec = ForestGenSpec {
            s: 6,
            depth: 3,
            m: 4,
            buckets: Some(vec![vec![0, 1], vec![2, 3], vec![4, 5]]),
            stop_prob: 0.0,
            seed: 11,
            ..Default::default()
        };
        let f = random_forest(&spec).unwrap();
        let b = BucketStructure::new(6, spec.buckets.clone().unwrap()).unwrap();
        assert!(b.is_bucketing_of(&f));
        assert_eq!(f.depth(), 3);
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = ForestGenSpec {
            bot_prob: 0.3,
            seed: 99,
            ..Default::default()
        };
        let a = format::to_json(&random_forest(&spec).unwrap());
        let b = format::to_json(&random_forest(&spec).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_specs() {
        let bad = ForestGenSpec {
            stop_prob: 1.5,
            ..Default::default()
        };
        assert!(matches!(random_forest(&bad), Err(Error::Unsatisfiable(_))));
        let bad = ForestGenSpec {
            buckets: Some(vec![vec![0]]),
            ..Default::default()
        };
        assert!(random_forest(&bad).is_err());
    }
}
