// SPDX-License-Identifier: Apache-2.0
use std::collections::BTreeSet;

use super::{DecisionTree, InputSpace, Node, OutputSpace, PartialAssignment, Symbol, Transcript};
use crate::error::{Error, Result};

/// A sequence of `m` decision trees over the same `s` input cells; tree `i`
/// computes output cell `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecisionForest {
    input: InputSpace,
    output: OutputSpace,
    trees: Vec<DecisionTree>,
}

impl DecisionForest {
    pub fn new(
        input: InputSpace,
        sigma: Symbol,
        bot_allowed: bool,
        trees: Vec<DecisionTree>,
    ) -> Result<Self> {
        let output = OutputSpace::new(trees.len(), sigma, bot_allowed)?;
        for (i, tree) in trees.iter().enumerate() {
            if tree.lambda() != input.lambda {
                return Err(Error::InvalidForest(format!(
                    "tree {i} has arity {}, input alphabet is {}",
                    tree.lambda(),
                    input.lambda
                )));
            }
            if let Some(&cell) = tree.queried_cells().iter().find(|&&c| c >= input.s) {
                return Err(Error::InvalidForest(format!(
                    "tree {i} queries cell {cell} but there are only {} cells",
                    input.s
                )));
            }
            if let Some(&v) = tree.leaf_values().iter().find(|&&v| !output.admits(v)) {
                return Err(Error::InvalidForest(format!(
                    "tree {i} has leaf value {v} outside the output alphabet"
                )));
            }
        }
        Ok(Self {
            input,
            output,
            trees,
        })
    }

    /// Builds a forest from raw nodes, validating each tree.
    pub fn from_nodes(
        s: usize,
        lambda: Symbol,
        sigma: Symbol,
        bot_allowed: bool,
        roots: Vec<Node>,
    ) -> Result<Self> {
        let input = InputSpace::new(s, lambda)?;
        let trees = roots
            .into_iter()
            .map(|r| DecisionTree::new(r, lambda))
            .collect::<Result<Vec<_>>>()?;
        Self::new(input, sigma, bot_allowed, trees)
    }

    /// Tree `i` outputs the content of cell `i`, for `i < s`.
    pub fn identity(s: usize, lambda: Symbol) -> Result<Self> {
        let roots = (0..s).map(|i| Node::reader(i, lambda)).collect();
        Self::from_nodes(s, lambda, lambda, false, roots)
    }

    /// Every tree is a constant leaf.
    pub fn constant(s: usize, lambda: Symbol, sigma: Symbol, values: &[Symbol]) -> Result<Self> {
        let roots = values.iter().map(|&v| Node::Leaf(v)).collect();
        Self::from_nodes(s, lambda, sigma, false, roots)
    }

    pub fn input(&self) -> &InputSpace {
        &self.input
    }

    pub fn output(&self) -> &OutputSpace {
        &self.output
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn tree(&self, i: usize) -> &DecisionTree {
        &self.trees[i]
    }

    pub fn s(&self) -> usize {
        self.input.s
    }

    pub fn lambda(&self) -> Symbol {
        self.input.lambda
    }

    pub fn m(&self) -> usize {
        self.output.m
    }

    pub fn sigma(&self) -> Symbol {
        self.output.sigma
    }

    pub fn bot(&self) -> Symbol {
        self.output.bot()
    }

    /// Maximum tree depth.
    pub fn depth(&self) -> usize {
        self.trees.iter().map(DecisionTree::depth).max().unwrap_or(0)
    }

    /// Cells queried by at least one tree. Cells outside this set do not
    /// influence the output, so exact enumeration only ranges over these.
    pub fn mentioned_cells(&self) -> BTreeSet<usize> {
        self.trees
            .iter()
            .flat_map(|t| t.queried_cells())
            .collect()
    }

    pub fn eval(&self, input: &[Symbol]) -> Result<Vec<Symbol>> {
        self.input.check_input(input)?;
        Ok(self.eval_unchecked(input))
    }

    pub fn eval_unchecked(&self, input: &[Symbol]) -> Vec<Symbol> {
        self.trees.iter().map(|t| t.eval(input)).collect()
    }

    /// Evaluates into a caller-provided buffer of length `m`.
    #[inline]
    pub fn eval_into(&self, input: &[Symbol], out: &mut [Symbol]) {
        for (o, t) in out.iter_mut().zip(&self.trees) {
            *o = t.eval(input);
        }
    }

    pub fn transcripts(&self, input: &[Symbol]) -> Result<Vec<Transcript>> {
        self.input.check_input(input)?;
        Ok(self.trees.iter().map(|t| t.transcript(input)).collect())
    }

    /// Forest with bound cells substituted. Free structure is unchanged.
    pub fn restrict(&self, assignment: &PartialAssignment) -> Result<Self> {
        assignment.validate(&self.input)?;
        Ok(Self {
            input: self.input,
            output: self.output,
            trees: self.trees.iter().map(|t| t.restrict(assignment)).collect(),
        })
    }

    /// Each tree follows the original until it is about to query a cell in
    /// `cells`, where it stops with ⊥. With `exempt_first_query` the root
    /// query of every tree is kept. The result always admits ⊥.
    pub fn prune_on_query_set(&self, cells: &BTreeSet<usize>, exempt_first_query: bool) -> Self {
        let bot = self.output.bot();
        Self {
            input: self.input,
            output: OutputSpace {
                bot_allowed: true,
                ..self.output
            },
            trees: self
                .trees
                .iter()
                .map(|t| t.prune(cells, bot, exempt_first_query))
                .collect(),
        }
    }

    /// Sub-forest made of the trees listed in `outputs`, in that order.
    pub fn project(&self, outputs: &[usize]) -> Result<Self> {
        if outputs.is_empty() {
            return Err(Error::InvalidInput("projection onto no outputs".into()));
        }
        if let Some(&bad) = outputs.iter().find(|&&i| i >= self.m()) {
            return Err(Error::InvalidInput(format!("output {bad} out of range")));
        }
        Ok(Self {
            input: self.input,
            output: OutputSpace {
                m: outputs.len(),
                ..self.output
            },
            trees: outputs.iter().map(|&i| self.trees[i].clone()).collect(),
        })
    }
}
