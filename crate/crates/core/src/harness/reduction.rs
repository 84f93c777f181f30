// SPDX-License-Identifier: Apache-2.0
//! One step of depth reduction and the bucketed entropy dichotomy.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng as _;
use serde::Serialize;

use super::entropy_checks::containment_set;
use super::report::{ExperimentReport, Relation};
use crate::analysis::{
    collision_probability, conditional_entropy, entropy, output_distribution, output_distribution_in,
    CollisionSource,
};
use crate::error::{Error, Result};
use crate::forest::{BucketStructure, DecisionForest, Node, PartialAssignment, Symbol};
use crate::{rng, Mode, TOLERANCE};

#[derive(Debug, Clone, Serialize)]
pub struct DepthReductionStats {
    /// Sampled first-query cells.
    pub isolated: Vec<usize>,
    /// Trees whose first query is in `isolated`.
    pub trees: Vec<usize>,
    pub entropy_restricted: f64,
    pub entropy_pruned: f64,
    /// Expected number of trees of the pruned forest that stop with ⊥.
    pub expected_pruned: f64,
    pub pruned_depth: usize,
}

#[derive(Debug, Clone)]
pub struct DepthReduction {
    pub stats: DepthReductionStats,
    /// `None` when no tree was selected.
    pub pruned: Option<DecisionForest>,
    pub report: ExperimentReport,
}

/// Probability mass of the paths that reach a non-root query to `cells`.
fn pruned_mass(node: &Node, cells: &BTreeSet<usize>, level: usize, inv: f64) -> f64 {
    match node {
        Node::Leaf(_) => 0.0,
        Node::Query { cell, .. } if level > 0 && cells.contains(cell) => inv.powi(level as i32),
        Node::Query { children, .. } => children
            .iter()
            .map(|c| pruned_mass(c, cells, level + 1, inv))
            .sum(),
    }
}

/// Groups trees by their first-queried cell, keeps each group with
/// probability `alpha`, and prunes the kept trees wherever they query a kept
/// first-query cell below the root.
///
/// The report checks `H(f_J) ≤ H(g) + log(|J|+1) + E[#⊥ in g]·log(|J|·|Σ|)`.
pub fn depth_reduction_step(
    forest: &DecisionForest,
    alpha: f64,
    seed: u64,
    mode: Mode,
    budget: u64,
) -> Result<DepthReduction> {
    if forest.depth() < 2 {
        return Err(Error::Precondition(format!(
            "depth reduction needs depth at least 2, got {}",
            forest.depth()
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidInput(format!("α must lie in [0, 1], got {alpha}")));
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, t) in forest.trees().iter().enumerate() {
        if let Some(c) = t.first_query() {
            groups.entry(c).or_default().push(i);
        }
    }
    let mut r = rng::seeded(seed);
    let isolated: BTreeSet<usize> = groups
        .keys()
        .copied()
        .filter(|_| r.gen_bool(alpha))
        .collect();
    let mut trees: Vec<usize> = isolated.iter().flat_map(|c| groups[c].clone()).collect();
    trees.sort_unstable();
    let id = format!("alpha={alpha}");
    if trees.is_empty() {
        let stats = DepthReductionStats {
            isolated: Vec::new(),
            trees,
            entropy_restricted: 0.0,
            entropy_pruned: 0.0,
            expected_pruned: 0.0,
            pruned_depth: 0,
        };
        let report = ExperimentReport::check("depth-reduction", id, 0.0, Relation::AtMost, 0.0)
            .with_seed(seed)
            .with_aux("stats", &stats);
        return Ok(DepthReduction {
            stats,
            pruned: None,
            report,
        });
    }
    let fj = forest.project(&trees)?;
    let g = fj.prune_on_query_set(&isolated, true);
    let inv = 1.0 / forest.lambda() as f64;
    let expected_pruned: f64 = fj
        .trees()
        .iter()
        .map(|t| pruned_mass(t.root(), &isolated, 0, inv))
        .sum();
    let h_fj = entropy(&output_distribution_in(&fj, mode, budget)?);
    let h_g = entropy(&output_distribution_in(&g, mode, budget)?);
    let j = trees.len() as f64;
    let sigma = forest.output().effective_alphabet() as f64;
    let bound = h_g + (j + 1.0).log2() + expected_pruned * (j * sigma).log2();
    let stats = DepthReductionStats {
        isolated: isolated.into_iter().collect(),
        trees,
        entropy_restricted: h_fj,
        entropy_pruned: h_g,
        expected_pruned,
        pruned_depth: g.depth(),
    };
    let report = ExperimentReport::check("depth-reduction", id, h_fj, Relation::AtMost, bound)
        .with_mode(mode)
        .with_seed(seed)
        .with_aux("stats", &stats);
    Ok(DepthReduction {
        stats,
        pruned: Some(g),
        report,
    })
}

/// Either the output entropy is at most `threshold` and a small container
/// holds half the mass, or some bucket keeps a `1/d` share of the entropy
/// after the others are fixed; then one random fixing of the other buckets
/// leaves a depth-1 forest whose entropy and collision probability are
/// reported.
pub fn bucketed_dichotomy_experiment(
    forest: &DecisionForest,
    buckets: &BucketStructure,
    threshold: f64,
    seed: u64,
    budget: u64,
) -> Result<ExperimentReport> {
    if !buckets.is_bucketing_of(forest) {
        return Err(Error::InvalidForest("forest is not bucketed by the given buckets".into()));
    }
    let dist = output_distribution(forest, budget)?;
    let h = entropy(&dist);
    let id = format!("buckets={},threshold={threshold}", buckets.len());
    if h <= threshold + TOLERANCE {
        let (set, report) = containment_set(&dist, threshold)?;
        return Ok(ExperimentReport {
            lemma_id: "dichotomy".into(),
            instance_id: id,
            ..report
        }
        .with_seed(seed)
        .with_aux("branch", "low_entropy")
        .with_aux("container_size", set.len()));
    }
    let mut best: Option<(usize, f64, Vec<f64>)> = None;
    let mut per_bucket = Vec::with_capacity(buckets.len());
    for i in 0..buckets.len() {
        let others: BTreeSet<usize> = buckets.complement(i).into_iter().collect();
        let ce = conditional_entropy(forest, &others, Mode::Exact, budget)?;
        per_bucket.push(ce.value);
        if best.as_ref().is_none_or(|(_, v, _)| ce.value > v + TOLERANCE) {
            best = Some((i, ce.value, ce.per_beta.iter().map(|b| b.entropy).collect()));
        }
    }
    let (chosen, value, per_beta) = best.expect("a bucketing has at least one bucket");
    let mut r = rng::seeded(seed);
    let beta = PartialAssignment::from_pairs(
        buckets
            .complement(chosen)
            .into_iter()
            .map(|c| (c, r.gen_range(0..forest.lambda()) as Symbol)),
    );
    let restricted = forest.restrict(&beta)?;
    let h_restricted = entropy(&output_distribution(&restricted, budget)?);
    let collision = collision_probability(CollisionSource::Forest(&restricted), Mode::Exact, budget)?;
    let d = buckets.len() as f64;
    Ok(
        ExperimentReport::check("dichotomy", id, value, Relation::AtLeast, h / d)
            .require(restricted.depth() <= 1, "restricted forest deeper than 1")
            .with_seed(seed)
            .with_aux("branch", "high_entropy")
            .with_aux("entropy", h)
            .with_aux("chosen_bucket", chosen)
            .with_aux("bucket_entropies", per_bucket)
            .with_aux("per_beta_entropies", per_beta)
            .with_aux("restricted_entropy", h_restricted)
            .with_aux("restricted_collision_probability", collision.value),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::{thorp_buckets, thorp_forest, ThorpSpec};

    #[test]
    fn shallow_forest_rejected() {
        let f = DecisionForest::identity(3, 2).unwrap();
        assert!(matches!(
            depth_reduction_step(&f, 0.5, 0, Mode::Exact, 1 << 20),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn no_requery_means_no_pruning() {
        let t = |a: usize, b: usize| Node::query(a, vec![Node::reader(b, 2), Node::Leaf(0)]);
        let f = DecisionForest::from_nodes(4, 2, 2, false, vec![t(0, 2), t(1, 3)]).unwrap();
        let out = depth_reduction_step(&f, 1.0, 0, Mode::Exact, 1 << 20).unwrap();
        assert_eq!(out.stats.trees, vec![0, 1]);
        assert_eq!(out.stats.expected_pruned, 0.0);
        assert_eq!(out.pruned.unwrap().trees(), f.trees());
        assert!(out.report.passed());
    }

    #[test]
    fn thorp_reduction() {
        let spec = ThorpSpec::new(3, 3).unwrap();
        let f = thorp_forest(spec).unwrap();
        let out = depth_reduction_step(&f, 0.5, 7, Mode::Exact, 1 << 24).unwrap();
        assert!(out.report.passed());
        assert!(out.stats.pruned_depth <= 3);
        assert!(out.stats.entropy_pruned <= out.stats.entropy_restricted + 1e-9);
    }

    #[test]
    fn dichotomy_branches() {
        let c = DecisionForest::constant(3, 2, 2, &[1, 0]).unwrap();
        let b = BucketStructure::contiguous(3, 1).unwrap();
        let r = bucketed_dichotomy_experiment(&c, &b, 1.0, 0, 1 << 20).unwrap();
        assert_eq!(r.aux["branch"], "low_entropy");
        assert_eq!(r.aux["container_size"], 1);

        let id = DecisionForest::identity(3, 2).unwrap();
        let r = bucketed_dichotomy_experiment(&id, &b, 1.0, 0, 1 << 20).unwrap();
        assert_eq!(r.aux["branch"], "high_entropy");
        assert_eq!(r.aux["restricted_entropy"], 3.0);
        assert!(r.passed());

        let spec = ThorpSpec::new(3, 3).unwrap();
        let f = thorp_forest(spec).unwrap();
        let r = bucketed_dichotomy_experiment(&f, &thorp_buckets(spec).unwrap(), 2.0, 5, 1 << 24).unwrap();
        assert!(r.passed());
        assert_eq!(r.aux["restricted_collision_probability"], 0.0);
        assert!(bucketed_dichotomy_experiment(&f, &b_of(12), 2.0, 5, 1 << 24).is_err());
    }

    fn b_of(s: usize) -> BucketStructure {
        BucketStructure::contiguous(s, 3).unwrap()
    }
}
