// SPDX-License-Identifier: Apache-2.0
//! The Thorp shuffle as a switching network and as a decision forest.
//!
//! In every round the card at position `i` and the card at position
//! `n/2 + i` pass through switch `i` and land at positions `2i` and `2i + 1`.
//! Coin 0 keeps their order, coin 1 swaps them. The coin of switch `i` in
//! round `t` (1-based) is input cell `(t − 1)·n/2 + i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{BucketStructure, DecisionForest, Node, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThorpSpec {
    pub log2n: u32,
    pub rounds: usize,
}

/// Trees have `2^rounds` leaves each; this caps `n · 2^rounds`.
const MAX_NODES: u64 = 1 << 26;

impl ThorpSpec {
    pub fn new(log2n: u32, rounds: usize) -> Result<Self> {
        let spec = Self { log2n, rounds };
        spec.validate()?;
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        1 << self.log2n
    }

    /// Number of coin cells.
    pub fn s(&self) -> usize {
        self.rounds * self.n() / 2
    }

    pub fn coin(&self, round: usize, switch: usize) -> usize {
        (round - 1) * self.n() / 2 + switch
    }

    fn validate(&self) -> Result<()> {
        if self.log2n == 0 || self.log2n > 20 || self.rounds == 0 || self.rounds > 40 {
            return Err(Error::InvalidInput(format!(
                "need 1 <= log2n <= 20 and 1 <= rounds <= 40, got {} and {}",
                self.log2n, self.rounds
            )));
        }
        let nodes = (self.n() as f64) * 2f64.powi(self.rounds as i32 + 1);
        if nodes > MAX_NODES as f64 {
            return Err(Error::BudgetExceeded {
                needed: nodes,
                budget: MAX_NODES,
            });
        }
        Ok(())
    }
}

/// Runs the network forward on the given coins; entry `p` of the result is
/// the card at position `p`.
pub fn thorp_network(spec: ThorpSpec, coins: &[Symbol]) -> Result<Vec<Symbol>> {
    if coins.len() != spec.s() || coins.iter().any(|&c| c > 1) {
        return Err(Error::InvalidInput(format!(
            "expected {} binary coins",
            spec.s()
        )));
    }
    let n = spec.n();
    let half = n / 2;
    let mut deck: Vec<Symbol> = (0..n as Symbol).collect();
    let mut next = deck.clone();
    for t in 1..=spec.rounds {
        for i in 0..half {
            let (a, b) = (deck[i], deck[half + i]);
            let (lo, hi) = if coins[spec.coin(t, i)] == 0 { (a, b) } else { (b, a) };
            next[2 * i] = lo;
            next[2 * i + 1] = hi;
        }
        std::mem::swap(&mut deck, &mut next);
    }
    Ok(deck)
}

/// Subtree that finds the card at `position` after `round` rounds.
fn trace(spec: &ThorpSpec, round: usize, position: usize) -> Node {
    if round == 0 {
        return Node::Leaf(position as Symbol);
    }
    let half = spec.n() / 2;
    let switch = position / 2;
    let (keep, swap) = if position.is_multiple_of(2) {
        (switch, half + switch)
    } else {
        (half + switch, switch)
    };
    Node::query(
        spec.coin(round, switch),
        vec![trace(spec, round - 1, keep), trace(spec, round - 1, swap)],
    )
}

/// Forest over binary coins whose tree `p` outputs the card at position `p`.
/// Every tree has depth exactly `rounds` and first queries the last round.
pub fn thorp_forest(spec: ThorpSpec) -> Result<DecisionForest> {
    spec.validate()?;
    let n = spec.n();
    let roots = (0..n).map(|p| trace(&spec, spec.rounds, p)).collect();
    DecisionForest::from_nodes(spec.s(), 2, n as Symbol, false, roots)
}

/// Bucket `t` holds the coins of round `rounds − t`, the cells queried at
/// tree level `t` (0-based).
pub fn thorp_buckets(spec: ThorpSpec) -> Result<BucketStructure> {
    spec.validate()?;
    let half = spec.n() / 2;
    let buckets = (0..spec.rounds)
        .map(|t| {
            let round = spec.rounds - t;
            (0..half).map(|i| spec.coin(round, i)).collect()
        })
        .collect();
    BucketStructure::new(spec.s(), buckets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_round_zero_coins_is_riffle() {
        let spec = ThorpSpec::new(3, 1).unwrap();
        assert_eq!(
            thorp_network(spec, &[0; 4]).unwrap(),
            vec![0, 4, 1, 5, 2, 6, 3, 7]
        );
        let f = thorp_forest(spec).unwrap();
        assert_eq!(f.eval(&[0; 4]).unwrap(), vec![0, 4, 1, 5, 2, 6, 3, 7]);
        assert_eq!(thorp_network(spec, &[1, 0, 0, 0]).unwrap()[..2], [4, 0]);
    }

    #[test]
    fn shape() {
        let spec = ThorpSpec::new(3, 3).unwrap();
        let f = thorp_forest(spec).unwrap();
        assert_eq!(f.s(), 12);
        assert_eq!(f.m(), 8);
        assert!(f.trees().iter().all(|t| t.depth() == 3));
        assert!(thorp_buckets(spec).unwrap().is_bucketing_of(&f));
        let x = [1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1, 0];
        assert_eq!(f.tree(5).transcript(&x).steps.len(), 3);
    }

    #[test]
    fn limits() {
        assert!(ThorpSpec::new(0, 1).is_err());
        assert!(ThorpSpec::new(3, 0).is_err());
        assert!(ThorpSpec::new(10, 30).is_err());
    }
}
