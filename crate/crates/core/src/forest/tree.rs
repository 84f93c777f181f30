// SPDX-License-Identifier: Apache-2.0
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{PartialAssignment, Symbol};
use crate::error::{Error, Result};

/// A node of an arity-λ decision tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Leaf(Symbol),
    /// Probe input cell `cell`; `children[v]` continues after observing `v`.
    Query { cell: usize, children: Vec<Node> },
}

impl Node {
    pub fn leaf(v: Symbol) -> Self {
        Node::Leaf(v)
    }

    pub fn query(cell: usize, children: Vec<Node>) -> Self {
        Node::Query { cell, children }
    }

    /// Depth-1 node that outputs whatever it reads from `cell`.
    pub fn reader(cell: usize, lambda: Symbol) -> Self {
        Node::Query {
            cell,
            children: (0..lambda).map(Node::Leaf).collect(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf(_) => 0,
            Node::Query { children, .. } => {
                1 + children.iter().map(Node::depth).max().unwrap_or(0)
            }
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf(_))
    }

    fn visit<'a>(&'a self, level: usize, f: &mut impl FnMut(&'a Node, usize)) {
        f(self, level);
        if let Node::Query { children, .. } = self {
            for c in children {
                c.visit(level + 1, f);
            }
        }
    }

    fn validate(&self, lambda: Symbol, path: &mut Vec<usize>) -> Result<()> {
        match self {
            Node::Leaf(_) => Ok(()),
            Node::Query { cell, children } => {
                if children.len() != lambda as usize {
                    return Err(Error::MalformedTree(format!(
                        "node querying cell {cell} has {} children, expected {lambda}",
                        children.len()
                    )));
                }
                if path.contains(cell) {
                    return Err(Error::MalformedTree(format!(
                        "cell {cell} queried twice on one path"
                    )));
                }
                path.push(*cell);
                for c in children {
                    c.validate(lambda, path)?;
                }
                path.pop();
                Ok(())
            }
        }
    }

    fn restricted(&self, assignment: &PartialAssignment) -> Node {
        match self {
            Node::Leaf(v) => Node::Leaf(*v),
            Node::Query { cell, children } => match assignment.get(*cell) {
                Some(v) => children[v as usize].restricted(assignment),
                None => Node::Query {
                    cell: *cell,
                    children: children.iter().map(|c| c.restricted(assignment)).collect(),
                },
            },
        }
    }

    fn pruned(&self, cells: &BTreeSet<usize>, bot: Symbol, exempt: bool) -> Node {
        match self {
            Node::Leaf(v) => Node::Leaf(*v),
            Node::Query { cell, .. } if cells.contains(cell) && !exempt => Node::Leaf(bot),
            Node::Query { cell, children } => Node::Query {
                cell: *cell,
                children: children.iter().map(|c| c.pruned(cells, bot, false)).collect(),
            },
        }
    }
}

/// The probe/answer sequence of one tree on one input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub steps: Vec<(usize, Symbol)>,
    pub value: Symbol,
}

/// A validated arity-λ decision tree.
///
/// Every internal node has exactly λ children and no cell is probed twice on
/// any root-to-leaf path.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DecisionTree {
    root: Node,
    lambda: Symbol,
    depth: usize,
}

impl DecisionTree {
    pub fn new(root: Node, lambda: Symbol) -> Result<Self> {
        if lambda < 2 {
            return Err(Error::MalformedTree(format!("arity {lambda} is below 2")));
        }
        root.validate(lambda, &mut Vec::new())?;
        let depth = root.depth();
        Ok(Self {
            root,
            lambda,
            depth,
        })
    }

    /// Validates the tree and additionally checks `depth <= bound`.
    pub fn with_depth_bound(root: Node, lambda: Symbol, bound: usize) -> Result<Self> {
        let tree = Self::new(root, lambda)?;
        if tree.depth > bound {
            return Err(Error::MalformedTree(format!(
                "depth {} exceeds declared bound {bound}",
                tree.depth
            )));
        }
        Ok(tree)
    }

    pub fn constant(v: Symbol, lambda: Symbol) -> Self {
        Self {
            root: Node::Leaf(v),
            lambda,
            depth: 0,
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn lambda(&self) -> Symbol {
        self.lambda
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Cell probed first, if the tree is not constant.
    pub fn first_query(&self) -> Option<usize> {
        match &self.root {
            Node::Query { cell, .. } => Some(*cell),
            Node::Leaf(_) => None,
        }
    }

    /// Value of the leaf reached on `input`.
    #[inline]
    pub fn eval(&self, input: &[Symbol]) -> Symbol {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(v) => return *v,
                Node::Query { cell, children } => node = &children[input[*cell] as usize],
            }
        }
    }

    /// Calls `probe(cell)` for every cell queried on `input`, in order, and
    /// returns the leaf value.
    #[inline]
    pub fn eval_with(&self, input: &[Symbol], mut probe: impl FnMut(usize)) -> Symbol {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(v) => return *v,
                Node::Query { cell, children } => {
                    probe(*cell);
                    node = &children[input[*cell] as usize];
                }
            }
        }
    }

    pub fn transcript(&self, input: &[Symbol]) -> Transcript {
        let mut steps = Vec::with_capacity(self.depth);
        let value = self.eval_with(input, |c| steps.push((c, input[c])));
        Transcript { steps, value }
    }

    /// Every cell queried anywhere in the tree.
    pub fn queried_cells(&self) -> BTreeSet<usize> {
        let mut cells = BTreeSet::new();
        self.visit(|node, _| {
            if let Node::Query { cell, .. } = node {
                cells.insert(*cell);
            }
        });
        cells
    }

    /// Pre-order visit of every node together with its level (root = 0).
    pub fn visit<'a>(&'a self, mut f: impl FnMut(&'a Node, usize)) {
        self.root.visit(0, &mut f);
    }

    pub fn leaf_values(&self) -> BTreeSet<Symbol> {
        let mut values = BTreeSet::new();
        self.visit(|node, _| {
            if let Node::Leaf(v) = node {
                values.insert(*v);
            }
        });
        values
    }

    /// Tree with every query on a bound cell replaced by the matching child.
    pub fn restrict(&self, assignment: &PartialAssignment) -> DecisionTree {
        let root = self.root.restricted(assignment);
        let depth = root.depth();
        DecisionTree {
            root,
            lambda: self.lambda,
            depth,
        }
    }

    /// Tree that answers `bot` instead of querying any cell in `cells`. The
    /// root query is kept when `exempt_first_query` is set.
    pub fn prune(&self, cells: &BTreeSet<usize>, bot: Symbol, exempt_first_query: bool) -> Self {
        let root = self.root.pruned(cells, bot, exempt_first_query);
        let depth = root.depth();
        DecisionTree {
            root,
            lambda: self.lambda,
            depth,
        }
    }

    /// Tree with every leaf value mapped through `f`.
    pub fn map_leaves(&self, f: &impl Fn(Symbol) -> Symbol) -> Self {
        fn go(node: &Node, f: &impl Fn(Symbol) -> Symbol) -> Node {
            match node {
                Node::Leaf(v) => Node::Leaf(f(*v)),
                Node::Query { cell, children } => Node::Query {
                    cell: *cell,
                    children: children.iter().map(|c| go(c, f)).collect(),
                },
            }
        }
        DecisionTree {
            root: go(&self.root, f),
            lambda: self.lambda,
            depth: self.depth,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_tree_has_empty_transcript() {
        let t = DecisionTree::new(Node::leaf(3), 4).unwrap();
        let tr = t.transcript(&[0, 1, 2]);
        assert!(tr.steps.is_empty());
        assert_eq!(tr.value, 3);
    }

    #[test]
    fn identity_tree_probes_once() {
        let t = DecisionTree::new(Node::reader(2, 4), 4).unwrap();
        let tr = t.transcript(&[0, 1, 2, 3]);
        assert_eq!(tr.steps, vec![(2, 2)]);
        assert_eq!(tr.value, 2);
    }

    #[test]
    fn wrong_child_count_is_rejected() {
        let bad = Node::query(0, vec![Node::leaf(0), Node::leaf(1)]);
        assert!(matches!(
            DecisionTree::new(bad, 3),
            Err(Error::MalformedTree(_))
        ));
    }

    #[test]
    fn repeated_query_on_path_is_rejected() {
        let bad = Node::query(0, vec![Node::reader(0, 2), Node::leaf(1)]);
        assert!(DecisionTree::new(bad, 2).is_err());
        // the same cell on sibling branches is fine
        let ok = Node::query(0, vec![Node::reader(1, 2), Node::reader(1, 2)]);
        assert_eq!(DecisionTree::new(ok, 2).unwrap().depth(), 2);
    }

    #[test]
    fn depth_bound_is_checked() {
        let root = Node::query(0, vec![Node::reader(1, 2), Node::leaf(0)]);
        assert!(DecisionTree::with_depth_bound(root.clone(), 2, 1).is_err());
        assert!(DecisionTree::with_depth_bound(root, 2, 2).is_ok());
    }

    #[test]
    fn prune_keeps_exempt_root() {
        let root = Node::query(0, vec![Node::reader(1, 2), Node::reader(2, 2)]);
        let t = DecisionTree::new(root, 2).unwrap();
        let cells: BTreeSet<usize> = [0, 1].into();
        let p = t.prune(&cells, 9, true);
        assert_eq!(p.eval(&[0, 1, 0]), 9);
        assert_eq!(p.eval(&[1, 1, 0]), 0);
        let q = t.prune(&cells, 9, false);
        assert_eq!(q.depth(), 0);
    }
}
