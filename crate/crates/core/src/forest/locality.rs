// SPDX-License-Identifier: Apache-2.0
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::DecisionForest;

/// Static dependency structure of a forest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Locality {
    /// Max number of distinct cells any single tree can probe.
    pub k: usize,
    /// `influence[j]`: number of trees with a node querying cell `j`.
    pub influence: Vec<usize>,
}

impl Locality {
    pub fn max_influence(&self) -> usize {
        self.influence.iter().copied().max().unwrap_or(0)
    }
}

pub fn locality(forest: &DecisionForest) -> Locality {
    let mut influence = vec![0; forest.s()];
    let mut k = 0;
    for tree in forest.trees() {
        let cells = tree.queried_cells();
        k = k.max(cells.len());
        for c in cells {
            influence[c] += 1;
        }
    }
    Locality { k, influence }
}

/// Greedy set of outputs sharing no input cell: take the lowest remaining
/// output, then discard every output that can read one of its cells. For an
/// `(ℓ, k)`-local forest the result has at least `m / (ℓ·k)` members.
pub fn independent_outputs(forest: &DecisionForest) -> Vec<usize> {
    let cells: Vec<BTreeSet<usize>> = forest.trees().iter().map(|t| t.queried_cells()).collect();
    let mut alive = vec![true; forest.m()];
    let mut chosen = Vec::new();
    for i in 0..forest.m() {
        if !alive[i] {
            continue;
        }
        chosen.push(i);
        for (j, other) in cells.iter().enumerate() {
            if alive[j] && !cells[i].is_disjoint(other) {
                alive[j] = false;
            }
        }
        alive[i] = false;
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::Node;

    #[test]
    fn identity_locality() {
        let f = DecisionForest::identity(5, 2).unwrap();
        let loc = locality(&f);
        assert_eq!(loc.k, 1);
        assert_eq!(loc.influence, vec![1; 5]);
        assert_eq!(independent_outputs(&f), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn shared_cell_kills_independence() {
        let roots = vec![Node::reader(0, 2); 4];
        let f = DecisionForest::from_nodes(2, 2, 2, false, roots).unwrap();
        assert_eq!(locality(&f).influence, vec![4, 0]);
        assert_eq!(independent_outputs(&f), vec![0]);
    }
}
