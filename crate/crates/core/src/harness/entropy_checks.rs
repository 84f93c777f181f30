// SPDX-License-Identifier: Apache-2.0
//! Entropy inequalities checked by exact enumeration.

use std::collections::BTreeSet;

use serde::Serialize;

use super::report::{ExperimentReport, Relation};
use crate::analysis::{
    conditional_entropy, entropy, output_distribution, Distribution, OutcomeSet, SetKind,
};
use crate::enumerate::Cube;
use crate::error::{Error, Result};
use crate::forest::{expected_query_counts, BucketStructure, DecisionForest, PartialAssignment};
use crate::{Mode, TOLERANCE};

/// `E = {x : p(x) ≥ 2^{-2k}}` with a report on its size and mass.
///
/// The size bound `|E| ≤ 2^{2k}` is checked always, the mass bound
/// `Pr[E] ≥ 1/2` only when `H ≤ k`.
pub fn containment_set(d: &Distribution, k: f64) -> Result<(OutcomeSet, ExperimentReport)> {
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::InvalidInput(format!("k must be a finite non-negative number, got {k}")));
    }
    let threshold = (-2.0 * k).exp2();
    let members: Vec<Vec<_>> = d
        .iter()
        .filter(|&(_, p)| p >= threshold * (1.0 - TOLERANCE))
        .map(|(x, _)| x.clone())
        .collect();
    let mass: f64 = members.iter().map(|x| d.prob(x)).sum();
    let size = members.len() as f64;
    let max_size = (2.0 * k).exp2();
    let h = entropy(d);
    let set = OutcomeSet::new(d.arity(), d.alphabet(), members, SetKind::Container)?;
    let id = format!("k={k}");
    let report = if h <= k + TOLERANCE {
        ExperimentReport::check("containment", id, mass, Relation::AtLeast, 0.5)
            .require(size <= max_size, "container larger than 2^(2k)")
    } else {
        ExperimentReport::check("containment", id, size, Relation::AtMost, max_size)
    };
    let report = report
        .with_aux("entropy", h)
        .with_aux("size", size)
        .with_aux("mass", mass)
        .with_aux("max_size", max_size);
    Ok((set, report))
}

/// `H(x) ≤ log(m+1) + E[b(x)]·log(m·|Σ|)` where `b` counts non-⊥ coordinates.
pub fn verify_mixture_bound(d: &Distribution) -> ExperimentReport {
    let m = d.arity() as f64;
    let (sigma, bot) = match d.bot() {
        Some(b) => ((d.alphabet() - 1).max(1) as f64, Some(b)),
        None => (d.alphabet() as f64, None),
    };
    let mean_b: f64 = d
        .iter()
        .map(|(x, p)| p * x.iter().filter(|&&v| Some(v) != bot).count() as f64)
        .sum();
    let h = entropy(d);
    let bound = (m + 1.0).log2() + mean_b * (m * sigma).log2();
    ExperimentReport::check("mixture-bound", format!("m={}", d.arity()), h, Relation::AtMost, bound)
        .with_aux("expected_non_bot", mean_b)
        .with_aux("slack", bound - h)
}

/// `H(f(u)) ≤ Σ_i H(f(u) | u outside bucket i)` for independent buckets.
pub fn verify_chain_bound(
    forest: &DecisionForest,
    partition: &BucketStructure,
    budget: u64,
) -> Result<ExperimentReport> {
    if partition.buckets().iter().map(Vec::len).sum::<usize>() != forest.s() {
        return Err(Error::MismatchedSpaces(
            "partition does not cover the input cells".into(),
        ));
    }
    let h = entropy(&output_distribution(forest, budget)?);
    let mut terms = Vec::with_capacity(partition.len());
    for i in 0..partition.len() {
        let others: BTreeSet<usize> = partition.complement(i).into_iter().collect();
        terms.push(conditional_entropy(forest, &others, Mode::Exact, budget)?.value);
    }
    let sum: f64 = terms.iter().sum();
    Ok(
        ExperimentReport::check("chain-bound", format!("buckets={}", partition.len()), h, Relation::AtMost, sum)
            .with_aux("terms", terms),
    )
}

/// Largest change of the output entropy caused by fixing one cell, against
/// `log(m+1) + E[θ_cell]·log(m·|Σ|)`.
pub fn verify_entropy_deviation(
    forest: &DecisionForest,
    cell: usize,
    budget: u64,
) -> Result<ExperimentReport> {
    if cell >= forest.s() {
        return Err(Error::InvalidInput(format!("cell {cell} out of range")));
    }
    let h = entropy(&output_distribution(forest, budget)?);
    let mut deviation: f64 = 0.0;
    let mut per_value = Vec::with_capacity(forest.lambda() as usize);
    for y in 0..forest.lambda() {
        let fixed = forest.restrict(&PartialAssignment::from_pairs([(cell, y)]))?;
        let hy = entropy(&output_distribution(&fixed, budget)?);
        deviation = deviation.max((hy - h).abs());
        per_value.push(hy);
    }
    let m = forest.m() as f64;
    let sigma = forest.output().effective_alphabet() as f64;
    let theta = expected_query_counts(forest)[cell];
    let bound = (m + 1.0).log2() + theta * (m * sigma).log2();
    Ok(
        ExperimentReport::check("entropy-deviation", format!("cell={cell}"), deviation, Relation::AtMost, bound)
            .with_aux("entropy", h)
            .with_aux("conditional_entropies", per_value)
            .with_aux("expected_queries", theta),
    )
}

/// Exact law of `S = Σ_i f_i(u)` for a forest with outputs in {0, 1}.
fn sum_histogram(forest: &DecisionForest, budget: u64) -> Result<Vec<f64>> {
    if forest.sigma() != 2 || forest.output().bot_allowed {
        return Err(Error::InvalidForest(
            "expected outputs in {0, 1} without ⊥".into(),
        ));
    }
    let m = forest.m();
    let cube = Cube::new(
        forest.s(),
        forest.lambda(),
        forest.mentioned_cells().into_iter().collect(),
        budget,
    )?;
    let (hist, _) = cube.fold(
        || (vec![0u64; m + 1], vec![0; m]),
        |(hist, out), x| {
            forest.eval_into(x, out);
            hist[out.iter().sum::<u32>() as usize] += 1;
        },
        |a, b| a.0.iter_mut().zip(b.0).for_each(|(x, y)| *x += y),
    );
    let n = cube.size() as f64;
    Ok(hist.into_iter().map(|c| c as f64 / n).collect())
}

#[derive(Debug, Clone, Serialize)]
struct TailPoint {
    eps: f64,
    threshold: f64,
    tail: f64,
}

/// `Pr[S ≥ 2(κ + log(1/ε)·d·μ)] ≤ ε` for each `ε`, where `κ = E[S]` and `μ`
/// is the largest expected number of queries to any cell. A zero threshold
/// is read as the strict event `S > 0`.
pub fn verify_second_moment_tail(
    forest: &DecisionForest,
    epsilons: &[f64],
    budget: u64,
) -> Result<ExperimentReport> {
    if epsilons.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::InvalidInput("every ε must lie in (0, 1)".into()));
    }
    let hist = sum_histogram(forest, budget)?;
    let kappa: f64 = hist.iter().enumerate().map(|(s, p)| s as f64 * p).sum();
    let mu = expected_query_counts(forest).into_iter().fold(0.0, f64::max);
    let d = forest.depth() as f64;
    let points: Vec<TailPoint> = epsilons
        .iter()
        .map(|&eps| {
            let threshold = 2.0 * (kappa + (1.0 / eps).log2() * d * mu);
            let tail = hist
                .iter()
                .enumerate()
                .filter(|&(s, _)| {
                    if threshold <= TOLERANCE {
                        s > 0
                    } else {
                        s as f64 >= threshold - TOLERANCE
                    }
                })
                .map(|(_, p)| p)
                .sum();
            TailPoint { eps, threshold, tail }
        })
        .collect();
    let worst = points
        .iter()
        .map(|p| p.tail - p.eps)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(
        ExperimentReport::check("second-moment-tail", format!("m={}", forest.m()), worst, Relation::AtMost, 0.0)
            .with_aux("kappa", kappa)
            .with_aux("mu", mu)
            .with_aux("points", points),
    )
}

/// Exact law of `θ_j` for every cell: `out[j][t] = Pr[θ_j = t]`.
pub fn query_count_laws(forest: &DecisionForest, budget: u64) -> Result<Vec<Vec<f64>>> {
    let (s, m) = (forest.s(), forest.m());
    let cube = Cube::new(s, forest.lambda(), forest.mentioned_cells().into_iter().collect(), budget)?;
    let (hist, _) = cube.fold(
        || (vec![vec![0u64; m + 1]; s], vec![0usize; s]),
        |(hist, theta), x| {
            for tree in forest.trees() {
                tree.eval_with(x, |c| theta[c] += 1);
            }
            for (j, t) in theta.iter_mut().enumerate() {
                hist[j][*t] += 1;
                *t = 0;
            }
        },
        |a, b| {
            for (x, y) in a.0.iter_mut().zip(b.0) {
                x.iter_mut().zip(y).for_each(|(p, q)| *p += q);
            }
        },
    );
    let n = cube.size() as f64;
    Ok(hist
        .into_iter()
        .map(|h| h.into_iter().map(|c| c as f64 / n).collect())
        .collect())
}

/// An average-μ-Lipschitz forest of depth `d` is `(3μd²·log(1/ε), ε)`-Lipschitz.
pub fn verify_avg_to_tail(
    forest: &DecisionForest,
    epsilons: &[f64],
    budget: u64,
) -> Result<ExperimentReport> {
    if epsilons.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
        return Err(Error::InvalidInput("every ε must lie in (0, 1)".into()));
    }
    let laws = query_count_laws(forest, budget)?;
    let mu = expected_query_counts(forest).into_iter().fold(0.0, f64::max);
    let d = forest.depth() as f64;
    let points: Vec<TailPoint> = epsilons
        .iter()
        .map(|&eps| {
            let threshold = 3.0 * mu * d * d * (1.0 / eps).log2();
            let tail = laws
                .iter()
                .map(|law| {
                    law.iter()
                        .enumerate()
                        .filter(|&(t, _)| t as f64 > threshold + TOLERANCE)
                        .map(|(_, p)| p)
                        .sum::<f64>()
                })
                .fold(0.0, f64::max);
            TailPoint { eps, threshold, tail }
        })
        .collect();
    let worst = points
        .iter()
        .map(|p| p.tail - p.eps)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(
        ExperimentReport::check("average-to-tail", format!("m={}", forest.m()), worst, Relation::AtMost, 0.0)
            .with_aux("mu", mu)
            .with_aux("points", points),
    )
}
