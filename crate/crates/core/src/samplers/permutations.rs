// SPDX-License-Identifier: Apache-2.0
use itertools::Itertools;
use rand::Rng as _;

use crate::analysis::Distribution;
use crate::error::{Error, Result};
use crate::forest::Symbol;
use crate::rng;

/// Largest `n` for which the full `n!` table is built.
pub const MAX_TABLE_N: usize = 8;

/// Uniform random permutation of `[n]` by the Fisher–Yates shuffle.
pub fn fisher_yates(n: usize, seed: u64) -> Vec<Symbol> {
    fisher_yates_with(n, &mut rng::seeded(seed))
}

pub(crate) fn fisher_yates_with(n: usize, r: &mut rng::Rng) -> Vec<Symbol> {
    let mut p: Vec<Symbol> = (0..n as Symbol).collect();
    for i in (1..n).rev() {
        let j = r.gen_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// Exact uniform distribution on the `n!` permutations of `[n]`.
pub fn uniform_perm_distribution(n: usize) -> Result<Distribution> {
    if n == 0 || n > MAX_TABLE_N {
        return Err(Error::InvalidInput(format!(
            "permutation table needs 1 <= n <= {MAX_TABLE_N}, got {n}"
        )));
    }
    let perms = (0..n as Symbol).permutations(n).collect();
    Distribution::uniform(n, n as Symbol, perms)
}

pub fn is_permutation(z: &[Symbol]) -> bool {
    let mut seen = vec![false; z.len()];
    z.iter()
        .all(|&v| (v as usize) < z.len() && !std::mem::replace(&mut seen[v as usize], true))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables() {
        let d = uniform_perm_distribution(2).unwrap();
        assert_eq!(d.prob(&[0, 1]), 0.5);
        assert_eq!(d.prob(&[1, 0]), 0.5);
        assert_eq!(uniform_perm_distribution(3).unwrap().support_size(), 6);
        assert!(uniform_perm_distribution(9).is_err());
    }

    #[test]
    fn shuffles_are_permutations() {
        assert_eq!(fisher_yates(1, 5), vec![0]);
        for seed in 0..50 {
            assert!(is_permutation(&fisher_yates(10, seed)));
        }
        assert_eq!(fisher_yates(10, 3), fisher_yates(10, 3));
        assert!(!is_permutation(&[0, 0]));
        assert!(!is_permutation(&[0, 2]));
    }
}
