// SPDX-License-Identifier: Apache-2.0
//! Coupling a uniform input `x` with an input `y` that is uniform on the
//! accepting set of a tree, moving few coordinates.
//!
//! Walking down the tree along `y`, at node `v` probing cell `c` the value
//! `y_c` is drawn from the optimal coupling of the uniform law (the law of
//! `x_c`) and `q_v`, the law of the next symbol conditioned on acceptance.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::report::{ExperimentReport, Relation};
use crate::error::{Error, Result};
use crate::forest::{DecisionTree, Node, Symbol};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplingSample {
    pub x: Vec<Symbol>,
    pub y: Vec<Symbol>,
    pub dist: usize,
}

/// Probability that a uniform input reaching `node` ends at a leaf labelled 1.
pub fn acceptance(node: &Node) -> f64 {
    match node {
        Node::Leaf(v) => (*v == 1) as u8 as f64,
        Node::Query { children, .. } => {
            children.iter().map(acceptance).sum::<f64>() / children.len() as f64
        }
    }
}

/// Joint table `π[a][b]` of the greedy optimal coupling of `p` and `q`:
/// shared mass stays on the diagonal, residuals are matched in symbol order.
pub fn optimal_coupling(p: &[f64], q: &[f64]) -> Vec<Vec<f64>> {
    let k = p.len();
    let mut pi = vec![vec![0.0; k]; k];
    let mut rp = vec![0.0; k];
    let mut rq = vec![0.0; k];
    for a in 0..k {
        let shared = p[a].min(q[a]);
        pi[a][a] = shared;
        rp[a] = p[a] - shared;
        rq[a] = q[a] - shared;
    }
    let (mut a, mut b) = (0, 0);
    while a < k && b < k {
        let moved = rp[a].min(rq[b]);
        if moved > 0.0 {
            pi[a][b] += moved;
            rp[a] -= moved;
            rq[b] -= moved;
        }
        if rp[a] <= 0.0 {
            a += 1;
        } else {
            b += 1;
        }
    }
    pi
}

/// Half the L1 distance between two laws on the same finite set.
fn tv(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Law of the next symbol at a query node, conditioned on acceptance.
fn accepting_law(children: &[Node]) -> Vec<f64> {
    let acc: Vec<f64> = children.iter().map(acceptance).collect();
    let total: f64 = acc.iter().sum();
    acc.into_iter().map(|a| a / total).collect()
}

fn check_tree(tree: &DecisionTree, s: usize) -> Result<f64> {
    if let Some(&c) = tree.queried_cells().iter().find(|&&c| c >= s) {
        return Err(Error::InvalidInput(format!("tree probes cell {c} outside [{s}]")));
    }
    let mu = acceptance(tree.root());
    if mu <= 0.0 {
        return Err(Error::Precondition("the tree accepts no input".into()));
    }
    Ok(mu)
}

/// One draw of `(x, y)` over `[λ]^s`.
pub fn couple_sample(tree: &DecisionTree, s: usize, seed: u64) -> Result<CouplingSample> {
    check_tree(tree, s)?;
    let lambda = tree.lambda();
    let mut r = rng::seeded(seed);
    let x: Vec<Symbol> = (0..s).map(|_| r.gen_range(0..lambda)).collect();
    let mut y = x.clone();
    let uniform = vec![1.0 / lambda as f64; lambda as usize];
    let mut node = tree.root();
    while let Node::Query { cell, children } = node {
        let q = accepting_law(children);
        let row = &optimal_coupling(&uniform, &q)[x[*cell] as usize];
        let u: f64 = r.gen::<f64>() * row.iter().sum::<f64>();
        let mut acc = 0.0;
        let mut pick = None;
        for (b, &w) in row.iter().enumerate() {
            acc += w;
            if w > 0.0 {
                pick = Some(b);
                if u < acc {
                    break;
                }
            }
        }
        let b = pick.expect("every row of a coupling carries mass");
        y[*cell] = b as Symbol;
        node = &children[b];
    }
    let dist = x.iter().zip(&y).filter(|(a, b)| a != b).count();
    Ok(CouplingSample { x, y, dist })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingStats {
    /// `Pr[tree accepts]`.
    pub mu: f64,
    pub expected_dist: f64,
    /// Statistical distance from the law of `y` to uniform on the accepting set.
    pub marginal_tv: f64,
}

/// Exact statistics of the coupling by recursion over the tree nodes.
pub fn coupling_stats(tree: &DecisionTree, s: usize) -> Result<CouplingStats> {
    let mu = check_tree(tree, s)?;
    let inv = 1.0 / tree.lambda() as f64;
    let uniform = vec![inv; tree.lambda() as usize];
    let mut stats = CouplingStats {
        mu,
        expected_dist: 0.0,
        marginal_tv: 0.0,
    };
    // `reach` is the probability that y's path visits `node`, `cylinder`
    // the uniform measure of the inputs that do.
    fn go(node: &Node, reach: f64, cylinder: f64, inv: f64, uniform: &[f64], st: &mut CouplingStats) {
        match node {
            Node::Leaf(v) => {
                let target = if *v == 1 { cylinder / st.mu } else { 0.0 };
                st.marginal_tv += 0.5 * (reach - target).abs();
            }
            Node::Query { children, .. } => {
                if reach == 0.0 {
                    let target_mass = acceptance(node) * cylinder / st.mu;
                    st.marginal_tv += 0.5 * target_mass;
                    return;
                }
                let q = accepting_law(children);
                st.expected_dist += reach * tv(uniform, &q);
                for (child, &qa) in children.iter().zip(&q) {
                    go(child, reach * qa, cylinder * inv, inv, uniform, st);
                }
            }
        }
    }
    go(tree.root(), 1.0, 1.0, inv, &uniform, &mut stats);
    Ok(stats)
}

/// Checks that `y` is uniform on the accepting set (statistical distance at
/// most 1e-9) and that `E[dist(x, y)] ≤ C·√(k·ln(1/μ))` with `k` the depth.
pub fn couple_report(tree: &DecisionTree, s: usize, c: f64) -> Result<ExperimentReport> {
    let st = coupling_stats(tree, s)?;
    let k = tree.depth() as f64;
    let bound = c * (k * (1.0 / st.mu).ln()).sqrt();
    Ok(
        ExperimentReport::check("coupling", format!("depth={},s={s}", tree.depth()), st.expected_dist, Relation::AtMost, bound)
            .require(st.marginal_tv <= 1e-9, "y is not uniform on the accepting set")
            .with_aux("mu", st.mu)
            .with_aux("marginal_tv", st.marginal_tv)
            .with_aux("constant", c),
    )
}
