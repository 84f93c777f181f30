// SPDX-License-Identifier: Apache-2.0
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{InputSpace, Symbol};
use crate::error::{Error, Result};

/// A restriction `ℓ ∈ (Λ ∪ {⋆})^s`: bound cells carry a symbol, the rest are free.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PartialAssignment {
    bindings: BTreeMap<usize, Symbol>,
}

impl PartialAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Symbol)>) -> Self {
        Self {
            bindings: pairs.into_iter().collect(),
        }
    }

    /// Binds `cells[i] -> values[i]`.
    pub fn from_cells(cells: &[usize], values: &[Symbol]) -> Self {
        Self::from_pairs(cells.iter().copied().zip(values.iter().copied()))
    }

    pub fn bind(&mut self, cell: usize, value: Symbol) {
        self.bindings.insert(cell, value);
    }

    pub fn get(&self, cell: usize) -> Option<Symbol> {
        self.bindings.get(&cell).copied()
    }

    pub fn is_bound(&self, cell: usize) -> bool {
        self.bindings.contains_key(&cell)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Symbol)> + '_ {
        self.bindings.iter().map(|(&c, &v)| (c, v))
    }

    pub fn validate(&self, space: &InputSpace) -> Result<()> {
        for (c, v) in self.iter() {
            if c >= space.s {
                return Err(Error::InvalidInput(format!(
                    "assignment binds cell {c} but there are only {} cells",
                    space.s
                )));
            }
            if v >= space.lambda {
                return Err(Error::InvalidInput(format!(
                    "assignment binds cell {c} to {v}, outside alphabet of size {}",
                    space.lambda
                )));
            }
        }
        Ok(())
    }

    /// True when `input` agrees with every binding.
    pub fn is_consistent(&self, input: &[Symbol]) -> bool {
        self.iter().all(|(c, v)| input.get(c) == Some(&v))
    }

    /// Overwrites the bound cells of `input`.
    pub fn apply(&self, input: &mut [Symbol]) {
        for (c, v) in self.iter() {
            input[c] = v;
        }
    }

    /// Union of two assignments; bindings of `other` win on conflicts.
    pub fn merged(&self, other: &PartialAssignment) -> Self {
        let mut out = self.clone();
        out.bindings.extend(other.iter());
        out
    }
}
