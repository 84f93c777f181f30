// SPDX-License-Identifier: Apache-2.0
//! Exhaustive enumeration of input cubes.
//!
//! A [`Cube`] walks every assignment of `λ` symbols to a list of free cells,
//! keeping all other cells at a fixed base value. Folding is split into a
//! fixed number of contiguous chunks (independent of the thread pool) and the
//! partial results are merged in chunk order, so floating-point reductions
//! are bit-stable.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forest::Symbol;

const MIN_CHUNK: u64 = 4096;
const MAX_CHUNKS: u64 = 64;

#[derive(Debug, Clone)]
pub struct Cube {
    cells: Vec<usize>,
    lambda: Symbol,
    base: Vec<Symbol>,
    size: u64,
}

/// Number of states `lambda^k`, or an error if it exceeds `budget`.
pub fn checked_size(lambda: Symbol, k: usize, budget: u64) -> Result<u64> {
    let needed = (lambda as f64).powi(k as i32);
    if needed > budget as f64 {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok((lambda as u64).pow(k as u32))
}

impl Cube {
    /// Cube over `cells` of an input of length `s`; unlisted cells are zero.
    pub fn new(s: usize, lambda: Symbol, cells: Vec<usize>, budget: u64) -> Result<Self> {
        Self::with_base(vec![0; s], lambda, cells, budget)
    }

    /// Cube over `cells`, all other cells taken from `base`.
    pub fn with_base(
        base: Vec<Symbol>,
        lambda: Symbol,
        cells: Vec<usize>,
        budget: u64,
    ) -> Result<Self> {
        if let Some(&bad) = cells.iter().find(|&&c| c >= base.len()) {
            return Err(Error::InvalidInput(format!(
                "cell {bad} out of range for {} cells",
                base.len()
            )));
        }
        let size = checked_size(lambda, cells.len(), budget)?;
        Ok(Self {
            cells,
            lambda,
            base,
            size,
        })
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    /// Writes state `index` into `input` (first cell is the least significant digit).
    pub fn fill(&self, mut index: u64, input: &mut [Symbol]) {
        input.copy_from_slice(&self.base);
        for &c in &self.cells {
            input[c] = (index % self.lambda as u64) as Symbol;
            index /= self.lambda as u64;
        }
    }

    /// Moves `input` to the next state; returns false after the last one.
    pub fn advance(&self, input: &mut [Symbol]) -> bool {
        for &c in &self.cells {
            input[c] += 1;
            if input[c] < self.lambda {
                return true;
            }
            input[c] = 0;
        }
        false
    }

    /// Sequential visit of every state.
    pub fn for_each(&self, mut f: impl FnMut(&[Symbol])) {
        let mut input = self.base.clone();
        self.fill(0, &mut input);
        loop {
            f(&input);
            if !self.advance(&mut input) {
                break;
            }
        }
    }

    /// Parallel fold with deterministic, chunk-ordered merging.
    pub fn fold<A, I, F, M>(&self, init: I, step: F, merge: M) -> A
    where
        A: Send,
        I: Fn() -> A + Sync,
        F: Fn(&mut A, &[Symbol]) + Sync,
        M: Fn(&mut A, A),
    {
        let chunks = (self.size / MIN_CHUNK).clamp(1, MAX_CHUNKS);
        let per = self.size.div_ceil(chunks);
        let partials: Vec<A> = (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let mut acc = init();
                let start = chunk * per;
                let end = (start + per).min(self.size);
                if start >= end {
                    return acc;
                }
                let mut input = self.base.clone();
                self.fill(start, &mut input);
                for _ in start..end {
                    step(&mut acc, &input);
                    self.advance(&mut input);
                }
                acc
            })
            .collect();
        let mut it = partials.into_iter();
        let mut acc = it.next().unwrap_or_else(&init);
        for p in it {
            merge(&mut acc, p);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn visits_every_state_once() {
        let cube = Cube::new(4, 3, vec![1, 3], 1 << 20).unwrap();
        assert_eq!(cube.size(), 9);
        let mut seen = Vec::new();
        cube.for_each(|x| seen.push(x.to_vec()));
        assert_eq!(seen.len(), 9);
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 9);
        assert!(seen.iter().all(|x| x[0] == 0 && x[2] == 0));
    }

    #[test]
    fn parallel_fold_matches_sequential() {
        let cube = Cube::new(14, 2, (0..14).collect(), 1 << 20).unwrap();
        let total = cube.fold(
            || 0u64,
            |acc, x| *acc += x.iter().map(|&v| v as u64).sum::<u64>(),
            |a, b| *a += b,
        );
        assert_eq!(total, 14 * (1 << 13));
    }

    #[test]
    fn budget_is_enforced() {
        let err = Cube::new(30, 2, (0..30).collect(), 1 << 26).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn empty_cell_list_has_one_state() {
        let cube = Cube::with_base(vec![2, 1], 3, vec![], 10).unwrap();
        let mut seen = Vec::new();
        cube.for_each(|x| seen.push(x.to_vec()));
        assert_eq!(seen, vec![vec![2, 1]]);
    }
}
