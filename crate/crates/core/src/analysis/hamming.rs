// SPDX-License-Identifier: Apache-2.0
//! Outcome sets, Hamming distance and neighborhoods `N_k(S)`.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::enumerate::checked_size;
use crate::error::{Error, Result};
use crate::forest::Symbol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetKind {
    Container,
    Neighborhood,
    Custom,
}

/// A finite set of tuples in `[alphabet]^arity`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeSet {
    arity: usize,
    alphabet: Symbol,
    members: BTreeSet<Vec<Symbol>>,
    kind: SetKind,
}

impl OutcomeSet {
    pub fn new(
        arity: usize,
        alphabet: Symbol,
        members: impl IntoIterator<Item = Vec<Symbol>>,
        kind: SetKind,
    ) -> Result<Self> {
        let members: BTreeSet<Vec<Symbol>> = members.into_iter().collect();
        for x in &members {
            if x.len() != arity || x.iter().any(|&v| v >= alphabet) {
                return Err(Error::InvalidInput(format!(
                    "member {x:?} is not in [{alphabet}]^{arity}"
                )));
            }
        }
        Ok(Self {
            arity,
            alphabet,
            members,
            kind,
        })
    }

    /// Every tuple of `[alphabet]^arity`.
    pub fn full_cube(arity: usize, alphabet: Symbol, budget: u64) -> Result<Self> {
        let size = cube_size(arity, alphabet, budget)?;
        let members = (0..size).map(|i| unpack(i, arity, alphabet));
        Self::new(arity, alphabet, members, SetKind::Custom)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn alphabet(&self) -> Symbol {
        self.alphabet
    }

    pub fn kind(&self) -> SetKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, x: &[Symbol]) -> bool {
        self.members.contains(x)
    }

    pub fn members(&self) -> &BTreeSet<Vec<Symbol>> {
        &self.members
    }

    pub fn is_subset(&self, other: &OutcomeSet) -> bool {
        self.members.is_subset(&other.members)
    }
}

fn cube_size(arity: usize, alphabet: Symbol, budget: u64) -> Result<u64> {
    checked_size(alphabet, arity, budget).map_err(|_| Error::SetBudgetExceeded { budget })
}

/// Index of `x` in the cube, first coordinate least significant.
pub fn pack(x: &[Symbol], alphabet: Symbol) -> u64 {
    x.iter()
        .rev()
        .fold(0u64, |acc, &v| acc * alphabet as u64 + v as u64)
}

pub fn unpack(mut index: u64, arity: usize, alphabet: Symbol) -> Vec<Symbol> {
    (0..arity)
        .map(|_| {
            let v = (index % alphabet as u64) as Symbol;
            index /= alphabet as u64;
            v
        })
        .collect()
}

/// Number of coordinates where `a` and `b` differ.
pub fn hamming_distance(a: &[Symbol], b: &[Symbol]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub fn hamming_dist_to_set(x: &[Symbol], set: &OutcomeSet) -> Result<usize> {
    if x.len() != set.arity {
        return Err(Error::MismatchedSpaces(format!(
            "tuple of length {} vs set of arity {}",
            x.len(),
            set.arity
        )));
    }
    set.members
        .iter()
        .map(|y| hamming_distance(x, y))
        .min()
        .ok_or(Error::EmptySet)
}

/// `N_k(S)`, materialised only if it has at most `budget` members.
pub fn neighborhood(set: &OutcomeSet, k: usize, budget: u64) -> Result<OutcomeSet> {
    if set.members.len() as u64 > budget {
        return Err(Error::SetBudgetExceeded { budget });
    }
    let mut members = set.members.clone();
    let mut frontier: Vec<Vec<Symbol>> = set.members.iter().cloned().collect();
    for _ in 0..k {
        let mut next = Vec::new();
        for x in &frontier {
            for i in 0..set.arity {
                for v in 0..set.alphabet {
                    if v == x[i] {
                        continue;
                    }
                    let mut y = x.clone();
                    y[i] = v;
                    if !members.contains(&y) {
                        members.insert(y.clone());
                        if members.len() as u64 > budget {
                            return Err(Error::SetBudgetExceeded { budget });
                        }
                        next.push(y);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(OutcomeSet {
        members,
        kind: SetKind::Neighborhood,
        ..*set
    })
}

/// Distance from every point of the cube to `S`, indexed by [`pack`].
/// Multi-source breadth-first search over the Hamming graph.
pub fn distance_map(set: &OutcomeSet, budget: u64) -> Result<Vec<u32>> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let size = cube_size(set.arity, set.alphabet, budget)?;
    let lambda = set.alphabet as u64;
    let mut dist = vec![u32::MAX; size as usize];
    let mut queue = VecDeque::new();
    for x in &set.members {
        let i = pack(x, set.alphabet);
        dist[i as usize] = 0;
        queue.push_back(i);
    }
    while let Some(i) = queue.pop_front() {
        let d = dist[i as usize] + 1;
        let mut place = 1u64;
        for _ in 0..set.arity {
            let digit = (i / place) % lambda;
            let base = i - digit * place;
            for v in 0..lambda {
                let j = (base + v * place) as usize;
                if dist[j] == u32::MAX {
                    dist[j] = d;
                    queue.push_back(j as u64);
                }
            }
            place *= lambda;
        }
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn singleton() -> OutcomeSet {
        OutcomeSet::new(4, 2, [vec![0, 0, 0, 0]], SetKind::Custom).unwrap()
    }

    #[test]
    fn pack_round_trip() {
        for i in 0..81 {
            assert_eq!(pack(&unpack(i, 4, 3), 3), i);
        }
        assert_eq!(unpack(1, 3, 2), vec![1, 0, 0]);
    }

    #[test]
    fn ball_sizes() {
        let s = singleton();
        assert_eq!(neighborhood(&s, 0, 1 << 10).unwrap().members(), s.members());
        assert_eq!(neighborhood(&s, 2, 1 << 10).unwrap().len(), 11);
        assert_eq!(neighborhood(&s, 4, 1 << 10).unwrap().len(), 16);
        assert!(matches!(neighborhood(&s, 2, 5), Err(Error::SetBudgetExceeded { .. })));
    }

    #[test]
    fn distances() {
        let s = singleton();
        assert_eq!(hamming_dist_to_set(&[0, 0, 0, 0], &s).unwrap(), 0);
        assert_eq!(hamming_dist_to_set(&[1, 0, 1, 1], &s).unwrap(), 3);
        let empty = OutcomeSet::new(4, 2, [], SetKind::Custom).unwrap();
        assert!(matches!(hamming_dist_to_set(&[0; 4], &empty), Err(Error::EmptySet)));
        let map = distance_map(&s, 1 << 10).unwrap();
        for (i, &d) in map.iter().enumerate() {
            assert_eq!(d as usize, unpack(i as u64, 4, 2).iter().filter(|&&v| v == 1).count());
        }
    }
}
