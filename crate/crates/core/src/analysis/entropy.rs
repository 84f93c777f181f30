// SPDX-License-Identifier: Apache-2.0
//! Shannon entropy in bits.

use std::collections::BTreeSet;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distribution::{output_counts, pairwise_sum, Distribution, OutcomeCounts};
use crate::enumerate::{checked_size, Cube};
use crate::error::Result;
use crate::forest::{DecisionForest, Symbol};
use crate::{rng, Mode};

pub fn entropy(d: &Distribution) -> f64 {
    entropy_of_pmf(&d.probabilities())
}

/// Entropy of a probability vector; zero entries contribute nothing.
pub fn entropy_of_pmf(probs: &[f64]) -> f64 {
    let terms: Vec<f64> = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .collect();
    pairwise_sum(&terms).max(0.0)
}

/// Entropy of the empirical law given by integer counts.
pub(crate) fn entropy_of_counts(mut counts: Vec<u64>) -> f64 {
    counts.sort_unstable();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let terms: Vec<f64> = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| c as f64 * (c as f64).log2())
        .collect();
    (n.log2() - pairwise_sum(&terms) / n).max(0.0)
}

fn counts_entropy(c: OutcomeCounts) -> f64 {
    entropy_of_counts(c.into_pairs().into_iter().map(|(_, n)| n).collect())
}

/// One conditioning value `β` of `u_I` and the entropy of the output given it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaEntropy {
    /// Values of the conditioned cells, in increasing cell order.
    pub beta: Vec<Symbol>,
    pub weight: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalEntropy {
    /// `H(f(u) | u_I)`.
    pub value: f64,
    /// Conditioned cells that influence the output, increasing.
    pub cells: Vec<usize>,
    pub per_beta: Vec<BetaEntropy>,
    /// Plug-in Monte-Carlo estimates underestimate entropy.
    pub biased_low: bool,
    pub mode: Mode,
}

impl ConditionalEntropy {
    pub fn max_beta_entropy(&self) -> f64 {
        self.per_beta.iter().map(|b| b.entropy).fold(0.0, f64::max)
    }

    pub fn min_beta_entropy(&self) -> f64 {
        self.per_beta
            .iter()
            .map(|b| b.entropy)
            .fold(f64::INFINITY, f64::min)
    }
}

/// `H(f(u) | u_I)` over a uniform input. Cells the forest never queries are
/// dropped from `I`, since they are independent of the output.
pub fn conditional_entropy(
    forest: &DecisionForest,
    cells: &BTreeSet<usize>,
    mode: Mode,
    budget: u64,
) -> Result<ConditionalEntropy> {
    let mentioned = forest.mentioned_cells();
    let fixed: Vec<usize> = cells.intersection(&mentioned).copied().collect();
    let free: Vec<usize> = mentioned.difference(cells).copied().collect();
    match mode {
        Mode::Exact => exact_conditional(forest, fixed, free, budget),
        Mode::MonteCarlo { trials, seed } => Ok(sampled_conditional(forest, fixed, trials, seed)),
    }
}

fn exact_conditional(
    forest: &DecisionForest,
    fixed: Vec<usize>,
    free: Vec<usize>,
    budget: u64,
) -> Result<ConditionalEntropy> {
    let lambda = forest.lambda();
    checked_size(lambda, fixed.len() + free.len(), budget)?;
    let outer = Cube::new(forest.s(), lambda, fixed.clone(), budget)?;
    let weight = 1.0 / outer.size() as f64;
    let beta_of = |index: u64| {
        let mut x = vec![0; forest.s()];
        outer.fill(index, &mut x);
        x
    };
    let one = |x: Vec<Symbol>, parallel: bool| -> Result<BetaEntropy> {
        let beta = fixed.iter().map(|&c| x[c]).collect();
        let entropy = if parallel {
            counts_entropy(output_counts(forest, x, free.clone(), budget)?.0)
        } else {
            let inner = Cube::with_base(x, lambda, free.clone(), budget)?;
            let mut acc = OutcomeCounts::new(forest.m(), forest.output().effective_alphabet());
            let mut out = vec![0; forest.m()];
            inner.for_each(|y| {
                forest.eval_into(y, &mut out);
                acc.add(&out, 1);
            });
            counts_entropy(acc)
        };
        Ok(BetaEntropy {
            beta,
            weight,
            entropy,
        })
    };
    let per_beta: Vec<BetaEntropy> = if outer.size() >= 64 {
        (0..outer.size())
            .into_par_iter()
            .map(|i| one(beta_of(i), false))
            .collect::<Result<_>>()?
    } else {
        (0..outer.size())
            .map(|i| one(beta_of(i), true))
            .collect::<Result<_>>()?
    };
    let value = pairwise_sum(&per_beta.iter().map(|b| b.entropy).collect::<Vec<_>>()) * weight;
    Ok(ConditionalEntropy {
        value,
        cells: fixed,
        per_beta,
        biased_low: false,
        mode: Mode::Exact,
    })
}

/// About `√trials` values of `β`, each with `trials / #β` inner samples.
fn sampled_conditional(
    forest: &DecisionForest,
    fixed: Vec<usize>,
    trials: u64,
    seed: u64,
) -> ConditionalEntropy {
    let lambda = forest.lambda();
    let s = forest.s();
    let betas = if fixed.is_empty() {
        1
    } else {
        ((trials as f64).sqrt().ceil() as u64).max(1)
    };
    let inner = (trials / betas).max(1);
    let per_beta: Vec<BetaEntropy> = (0..betas)
        .into_par_iter()
        .map(|b| {
            let mut r = rng::stream(seed, b);
            let mut x = vec![0; s];
            let beta: Vec<Symbol> = fixed.iter().map(|_| r.gen_range(0..lambda)).collect();
            let mut acc = OutcomeCounts::new(forest.m(), forest.output().effective_alphabet());
            let mut out = vec![0; forest.m()];
            for _ in 0..inner {
                x.iter_mut().for_each(|v| *v = r.gen_range(0..lambda));
                for (&c, &v) in fixed.iter().zip(&beta) {
                    x[c] = v;
                }
                forest.eval_into(&x, &mut out);
                acc.add(&out, 1);
            }
            BetaEntropy {
                beta,
                weight: 1.0 / betas as f64,
                entropy: counts_entropy(acc),
            }
        })
        .collect();
    let value = pairwise_sum(&per_beta.iter().map(|b| b.entropy).collect::<Vec<_>>()) / betas as f64;
    ConditionalEntropy {
        value,
        cells: fixed,
        per_beta,
        biased_low: true,
        mode: Mode::MonteCarlo { trials, seed },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::Node;

    fn xor() -> DecisionForest {
        let root = Node::query(
            0,
            vec![
                Node::query(1, vec![Node::Leaf(0), Node::Leaf(1)]),
                Node::query(1, vec![Node::Leaf(1), Node::Leaf(0)]),
            ],
        );
        DecisionForest::from_nodes(2, 2, 2, false, vec![root]).unwrap()
    }

    #[test]
    fn simple_entropies() {
        assert_eq!(entropy_of_pmf(&[1.0]), 0.0);
        assert!((entropy_of_pmf(&[0.125; 8]) - 3.0).abs() < 1e-12);
        assert!((entropy_of_pmf(&[0.5, 0.25, 0.125, 0.125]) - 1.75).abs() < 1e-12);
        assert!((entropy_of_counts(vec![2, 1, 1]) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn xor_conditioning() {
        let f = xor();
        let h = |cells: &[usize]| {
            conditional_entropy(&f, &cells.iter().copied().collect(), Mode::Exact, 1 << 20)
                .unwrap()
                .value
        };
        assert!((h(&[]) - 1.0).abs() < 1e-12);
        assert!((h(&[0]) - 1.0).abs() < 1e-12);
        assert_eq!(h(&[0, 1]), 0.0);
    }

    #[test]
    fn identity_conditioning() {
        let f = DecisionForest::identity(4, 3).unwrap();
        let c = conditional_entropy(&f, &BTreeSet::from([0]), Mode::Exact, 1 << 20).unwrap();
        assert!((c.value - 3.0 * 3f64.log2()).abs() < 1e-9);
        assert_eq!(c.per_beta.len(), 3);
        assert_eq!(c.cells, vec![0]);
    }

    #[test]
    fn parallel_and_sequential_inner_loops_agree() {
        let f = DecisionForest::identity(8, 2).unwrap();
        let small = conditional_entropy(&f, &BTreeSet::from([0]), Mode::Exact, 1 << 20).unwrap();
        let large =
            conditional_entropy(&f, &(0..7).collect(), Mode::Exact, 1 << 20).unwrap();
        assert!((small.value - 7.0).abs() < 1e-9);
        assert!((large.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sampled_is_flagged_and_close() {
        let f = xor();
        let c = conditional_entropy(
            &f,
            &BTreeSet::from([0]),
            Mode::MonteCarlo {
                trials: 40_000,
                seed: 3,
            },
            0,
        )
        .unwrap();
        assert!(c.biased_low);
        assert!((c.value - 1.0).abs() < 0.02);
    }
}
