// SPDX-License-Identifier: Apache-2.0
//! Making a forest average-Lipschitz by fixing popular cells, and checking
//! that Lipschitzness survives random restrictions.

use std::collections::HashMap;

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{ExperimentReport, Relation};
use crate::error::{Error, Result};
use crate::forest::{
    check_lipschitz, expected_query_counts, query_profile, DecisionForest, DecisionTree,
    PartialAssignment, Symbol,
};
use crate::{rng, Mode, TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestrictionStep {
    pub cell: usize,
    pub value: Symbol,
    /// `E[θ_cell]` just before the cell was fixed.
    pub expected_queries: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestrictionTrace {
    pub steps: Vec<RestrictionStep>,
    pub terminal: DecisionForest,
    pub success: bool,
    /// Maximum number of cells that may be fixed.
    pub depth_budget: usize,
}

impl RestrictionTrace {
    pub fn assignment(&self) -> PartialAssignment {
        PartialAssignment::from_pairs(self.steps.iter().map(|s| (s.cell, s.value)))
    }
}

/// `⌈2·m·d/μ · log(1/ε)⌉` where `m` is the number of trees and `d` the depth.
pub fn enforcement_depth_budget(forest: &DecisionForest, mu: f64, eps: f64) -> usize {
    let m = forest.m() as f64;
    let d = forest.depth() as f64;
    (2.0 * m * d / mu * (1.0 / eps).log2()).ceil() as usize
}

fn check_params(mu: f64, eps: f64) -> Result<()> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::InvalidInput(format!("μ must be positive, got {mu}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidInput(format!("ε must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Cell with the largest value, lowest index on ties.
fn argmax(values: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &v) in values.iter().enumerate() {
        if best.is_none_or(|(_, b)| v > b + TOLERANCE) {
            best = Some((j, v));
        }
    }
    best
}

/// Greedily fixes the cell with the largest `E[θ_j]` to a uniform value
/// until every `E[θ_j] ≤ μ` or the depth budget runs out.
pub fn enforce_avg_lipschitz(
    forest: &DecisionForest,
    mu: f64,
    eps: f64,
    seed: u64,
) -> Result<RestrictionTrace> {
    check_params(mu, eps)?;
    Ok(enforce_with(forest, mu, eps, &mut rng::seeded(seed)))
}

fn enforce_with(forest: &DecisionForest, mu: f64, eps: f64, rng: &mut rng::Rng) -> RestrictionTrace {
    let depth_budget = enforcement_depth_budget(forest, mu, eps);
    let mut current = forest.clone();
    let mut steps = Vec::new();
    loop {
        let counts = expected_query_counts(&current);
        let Some((cell, top)) = argmax(&counts) else {
            break;
        };
        if top <= mu + TOLERANCE {
            break;
        }
        if steps.len() >= depth_budget {
            return RestrictionTrace {
                steps,
                terminal: current,
                success: false,
                depth_budget,
            };
        }
        let value = rng.gen_range(0..forest.lambda());
        current = current
            .restrict(&PartialAssignment::from_pairs([(cell, value)]))
            .expect("cell and value are in range");
        steps.push(RestrictionStep {
            cell,
            value,
            expected_queries: top,
        });
    }
    RestrictionTrace {
        steps,
        terminal: current,
        success: true,
        depth_budget,
    }
}

/// Runs the enforcement `runs` times on streams of `seed` and checks that the
/// failure fraction is at most `ε` plus three 99% Hoeffding half-widths.
/// Every successful terminal forest is rechecked and every step is checked
/// to have fixed a maximal cell.
pub fn verify_enforcement(
    forest: &DecisionForest,
    mu: f64,
    eps: f64,
    runs: u64,
    seed: u64,
) -> Result<ExperimentReport> {
    check_params(mu, eps)?;
    if runs == 0 {
        return Err(Error::InvalidInput("need at least one run".into()));
    }
    let outcomes: Vec<(bool, bool, usize)> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let trace = enforce_with(forest, mu, eps, &mut rng::stream(seed, run));
            (trace.success, trace_is_sound(forest, mu, &trace), trace.steps.len())
        })
        .collect();
    let failures = outcomes.iter().filter(|o| !o.0).count();
    let sound = outcomes.iter().all(|o| o.1);
    let longest = outcomes.iter().map(|o| o.2).max().unwrap_or(0);
    let rate = failures as f64 / runs as f64;
    let bound = eps + 3.0 * rng::halfwidth99(runs);
    Ok(
        ExperimentReport::check("enforcement", format!("mu={mu},eps={eps}"), rate, Relation::AtMost, bound)
            .require(sound, "trace invariant violated")
            .with_mode(Mode::monte_carlo(runs, seed))
            .with_aux("depth_budget", enforcement_depth_budget(forest, mu, eps))
            .with_aux("longest_trace", longest),
    )
}

/// Replays `trace` from `forest`: distinct cells, each maximal when fixed,
/// and a successful terminal forest with every `E[θ_j] ≤ μ`.
pub fn trace_is_sound(forest: &DecisionForest, mu: f64, trace: &RestrictionTrace) -> bool {
    let mut current = forest.clone();
    let mut seen = std::collections::BTreeSet::new();
    for step in &trace.steps {
        let counts = expected_query_counts(&current);
        if !seen.insert(step.cell) || argmax(&counts).map(|(c, _)| c) != Some(step.cell) {
            return false;
        }
        if (counts[step.cell] - step.expected_queries).abs() > TOLERANCE {
            return false;
        }
        current = match current.restrict(&PartialAssignment::from_pairs([(step.cell, step.value)])) {
            Ok(f) => f,
            Err(_) => return false,
        };
    }
    let top = expected_query_counts(&current).into_iter().fold(0.0, f64::max);
    !trace.success || top <= mu + TOLERANCE
}

/// How restrictions `α` are drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum AssignmentSampler {
    /// Fix the listed cells to uniform values.
    Cells(Vec<usize>),
    /// Run the tree on a uniform input and fix the cells it probed.
    Tree(DecisionTree),
}

impl AssignmentSampler {
    pub fn sample(&self, s: usize, lambda: Symbol, rng: &mut rng::Rng) -> PartialAssignment {
        match self {
            AssignmentSampler::Cells(cells) => {
                PartialAssignment::from_pairs(cells.iter().map(|&c| (c, rng.gen_range(0..lambda))))
            }
            AssignmentSampler::Tree(tree) => {
                let x: Vec<Symbol> = (0..s).map(|_| rng.gen_range(0..lambda)).collect();
                PartialAssignment::from_pairs(tree.transcript(&x).steps)
            }
        }
    }

    fn cells(&self) -> Vec<usize> {
        match self {
            AssignmentSampler::Cells(c) => c.clone(),
            AssignmentSampler::Tree(t) => t.queried_cells().into_iter().collect(),
        }
    }
}

/// Samples restrictions `α` and measures how often `f|α` is not
/// `(μ, √δ)`-Lipschitz. The forest must be `(μ, δ)`-Lipschitz.
///
/// The report also carries the largest failure fraction of a single cell.
#[allow(clippy::too_many_arguments)]
pub fn verify_lipschitz_after_conditioning(
    forest: &DecisionForest,
    mu: f64,
    delta: f64,
    sampler: &AssignmentSampler,
    trials: u64,
    seed: u64,
    budget: u64,
) -> Result<ExperimentReport> {
    if !(0.0..=1.0).contains(&delta) || !(mu >= 0.0) {
        return Err(Error::InvalidInput("need μ ≥ 0 and δ in [0, 1]".into()));
    }
    if let Some(&c) = sampler.cells().iter().find(|&&c| c >= forest.s()) {
        return Err(Error::InvalidInput(format!("sampler cell {c} out of range")));
    }
    let base = query_profile(forest, mu, Mode::Exact, budget)?;
    let id = format!("mu={mu},delta={delta}");
    if !check_lipschitz(&base, mu, delta).is_mu_delta_lipschitz {
        return Ok(ExperimentReport::precondition(
            "lipschitz-after-conditioning",
            id,
            format!("forest is not (μ, δ)-Lipschitz: max tail {}", base.max_tail()),
        ));
    }
    let root = delta.sqrt();
    let mut r = rng::seeded(seed);
    let draws: Vec<PartialAssignment> = (0..trials)
        .map(|_| sampler.sample(forest.s(), forest.lambda(), &mut r))
        .collect();
    let mut distinct: Vec<PartialAssignment> = draws.clone();
    distinct.sort();
    distinct.dedup();
    // Per restriction: which cells exceed √δ.
    let verdicts: Vec<Result<Vec<bool>>> = distinct
        .par_iter()
        .map(|alpha| {
            let restricted = forest.restrict(alpha)?;
            let p = query_profile(&restricted, mu, Mode::Exact, budget)?;
            Ok(p.tail.iter().map(|&t| t > root + TOLERANCE).collect())
        })
        .collect();
    let mut cache: HashMap<&PartialAssignment, Vec<bool>> = HashMap::with_capacity(distinct.len());
    for (alpha, v) in distinct.iter().zip(verdicts) {
        cache.insert(alpha, v?);
    }
    let mut failures = 0u64;
    let mut per_cell = vec![0u64; forest.s()];
    for alpha in &draws {
        let bad = &cache[alpha];
        failures += bad.iter().any(|&b| b) as u64;
        for (c, &b) in per_cell.iter_mut().zip(bad) {
            *c += b as u64;
        }
    }
    let n = trials.max(1) as f64;
    let rate = failures as f64 / n;
    let worst_cell = per_cell.iter().copied().max().unwrap_or(0) as f64 / n;
    let bound = root + 3.0 * rng::halfwidth99(trials);
    Ok(
        ExperimentReport::check("lipschitz-after-conditioning", id, rate, Relation::AtMost, bound)
            .with_mode(Mode::monte_carlo(trials, seed))
            .with_aux("delta_measured", base.max_tail())
            .with_aux("worst_single_cell_rate", worst_cell)
            .with_aux("distinct_restrictions", distinct.len()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::Node;
    use crate::Status;

    #[test]
    fn already_lipschitz_is_empty_trace() {
        let f = DecisionForest::identity(4, 2).unwrap();
        let t = enforce_avg_lipschitz(&f, 1.0, 0.5, 0).unwrap();
        assert!(t.success && t.steps.is_empty());
    }

    #[test]
    fn shared_root_fixed_first() {
        let f = DecisionForest::from_nodes(3, 2, 2, false, vec![Node::reader(0, 2); 4]).unwrap();
        let t = enforce_avg_lipschitz(&f, 2.0, 0.25, 3).unwrap();
        assert!(t.success);
        assert_eq!(t.steps.len(), 1);
        assert_eq!(t.steps[0].cell, 0);
        assert_eq!(t.steps[0].expected_queries, 4.0);
        assert_eq!(t.terminal.depth(), 0);
        assert!(trace_is_sound(&f, 2.0, &t));
    }

    #[test]
    fn ties_go_to_lowest_cell() {
        let f = DecisionForest::from_nodes(
            3,
            2,
            2,
            false,
            vec![Node::reader(2, 2), Node::reader(2, 2), Node::reader(1, 2), Node::reader(1, 2)],
        )
        .unwrap();
        let t = enforce_avg_lipschitz(&f, 1.0, 0.5, 0).unwrap();
        assert_eq!(t.steps.iter().map(|s| s.cell).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn exhausted_budget_fails() {
        let f = DecisionForest::from_nodes(3, 2, 2, false, vec![Node::reader(0, 2); 4]).unwrap();
        assert_eq!(enforcement_depth_budget(&f, 64.0, 0.5), 1);
        let t = enforce_avg_lipschitz(&f, 0.5, 0.999, 0).unwrap();
        assert_eq!(t.depth_budget, 1);
        assert!(t.success);
        let g = DecisionForest::from_nodes(
            3,
            2,
            2,
            false,
            vec![Node::query(0, vec![Node::reader(1, 2), Node::reader(2, 2)]); 8],
        )
        .unwrap();
        let t = enforce_avg_lipschitz(&g, 0.1, 0.999, 0).unwrap();
        assert!(!t.success);
        assert_eq!(t.steps.len(), t.depth_budget);
        assert!(trace_is_sound(&g, 0.1, &t));
    }

    #[test]
    fn conditioning_examples() {
        let id = DecisionForest::identity(4, 2).unwrap();
        let sampler = AssignmentSampler::Cells(vec![0, 2]);
        let r = verify_lipschitz_after_conditioning(&id, 1.0, 0.0, &sampler, 200, 1, 1 << 20).unwrap();
        assert!(r.passed());
        assert_eq!(r.measured, 0.0);

        let f = DecisionForest::from_nodes(3, 2, 2, false, vec![Node::reader(0, 2); 3]).unwrap();
        let r = verify_lipschitz_after_conditioning(&f, 1.0, 0.0, &sampler, 10, 1, 1 << 20).unwrap();
        assert_eq!(r.status, Status::PreconditionViolated);
    }
}
