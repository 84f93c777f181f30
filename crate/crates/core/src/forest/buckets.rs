// SPDX-License-Identifier: Apache-2.0
use serde::{Deserialize, Serialize};

use super::{DecisionForest, Node};
use crate::error::{Error, Result};

/// Ordered partition `I_1, …, I_d` of the input cells. A forest is bucketed
/// by it when every query made at level `t` (root = level 1) hits `I_t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketStructure {
    buckets: Vec<Vec<usize>>,
}

impl BucketStructure {
    /// Validates that `buckets` partitions `[s]`.
    pub fn new(s: usize, buckets: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = vec![false; s];
        for (b, bucket) in buckets.iter().enumerate() {
            for &c in bucket {
                if c >= s {
                    return Err(Error::InvalidInput(format!(
                        "bucket {b} contains cell {c} outside [{s}]"
                    )));
                }
                if std::mem::replace(&mut seen[c], true) {
                    return Err(Error::InvalidInput(format!("cell {c} is in two buckets")));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|&x| !x) {
            return Err(Error::InvalidInput(format!("cell {missing} is in no bucket")));
        }
        Ok(Self { buckets })
    }

    /// `d` contiguous blocks of (nearly) equal size.
    pub fn contiguous(s: usize, d: usize) -> Result<Self> {
        if d == 0 || d > s {
            return Err(Error::InvalidInput(format!(
                "cannot split {s} cells into {d} nonempty buckets"
            )));
        }
        let buckets = (0..d)
            .map(|b| (b * s / d..(b + 1) * s / d).collect())
            .collect();
        Self::new(s, buckets)
    }

    pub fn buckets(&self) -> &[Vec<usize>] {
        &self.buckets
    }

    pub fn len(&self) -> usize {
        self.buckets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }

    /// Index of the bucket holding `cell`.
    pub fn bucket_of(&self, cell: usize) -> Option<usize> {
        self.buckets.iter().position(|b| b.contains(&cell))
    }

    /// All cells outside bucket `i`.
    pub fn complement(&self, i: usize) -> Vec<usize> {
        let mut cells: Vec<usize> = self
            .buckets
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .flat_map(|(_, b)| b.iter().copied())
            .collect();
        cells.sort_unstable();
        cells
    }

    /// True when every level-`t` query of `forest` lies in bucket `t`.
    pub fn is_bucketing_of(&self, forest: &DecisionForest) -> bool {
        let mut ok = true;
        for tree in forest.trees() {
            tree.visit(|node, level| {
                if let Node::Query { cell, .. } = node {
                    ok &= self.buckets.get(level).is_some_and(|b| b.contains(cell));
                }
            });
        }
        ok
    }
}
