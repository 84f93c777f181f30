// SPDX-License-Identifier: Apache-2.0
//! JSON forest files.
//!
//! ```json
//! {"input_arity":2,"input_alphabet":2,"output_alphabet":2,"bot_allowed":false,
//!  "trees":[{"query":0,"children":[{"leaf":0},{"leaf":1}]},{"leaf":null}]}
//! ```
//!
//! `{"leaf": null}` is ⊥. [`to_json`] produces the canonical (compact) form,
//! and `to_json(from_json(x)) == x` for every canonical `x`.

use serde::{Deserialize, Serialize};

use super::{DecisionForest, Node, Symbol};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForestFile {
    input_arity: usize,
    input_alphabet: Symbol,
    output_alphabet: Symbol,
    bot_allowed: bool,
    trees: Vec<NodeFile>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum NodeFile {
    Query { query: usize, children: Vec<NodeFile> },
    Leaf { leaf: Option<Symbol> },
}

fn node_to_file(node: &Node, bot: Symbol) -> NodeFile {
    match node {
        Node::Leaf(v) if *v == bot => NodeFile::Leaf { leaf: None },
        Node::Leaf(v) => NodeFile::Leaf { leaf: Some(*v) },
        Node::Query { cell, children } => NodeFile::Query {
            query: *cell,
            children: children.iter().map(|c| node_to_file(c, bot)).collect(),
        },
    }
}

fn node_from_file(node: NodeFile, bot: Symbol, bot_allowed: bool) -> Result<Node> {
    Ok(match node {
        NodeFile::Leaf { leaf: Some(v) } if v >= bot => {
            return Err(Error::Parse(format!(
                "leaf value {v} outside output alphabet of size {bot}"
            )))
        }
        NodeFile::Leaf { leaf: Some(v) } => Node::Leaf(v),
        NodeFile::Leaf { leaf: None } if bot_allowed => Node::Leaf(bot),
        NodeFile::Leaf { leaf: None } => {
            return Err(Error::Parse("⊥ leaf in a forest without bot_allowed".into()))
        }
        NodeFile::Query { query, children } => Node::Query {
            cell: query,
            children: children
                .into_iter()
                .map(|c| node_from_file(c, bot, bot_allowed))
                .collect::<Result<_>>()?,
        },
    })
}

pub fn to_json(forest: &DecisionForest) -> String {
    let bot = forest.bot();
    let file = ForestFile {
        input_arity: forest.s(),
        input_alphabet: forest.lambda(),
        output_alphabet: forest.sigma(),
        bot_allowed: forest.output().bot_allowed,
        trees: forest
            .trees()
            .iter()
            .map(|t| node_to_file(t.root(), bot))
            .collect(),
    };
    serde_json::to_string(&file).expect("forest serialization cannot fail")
}

pub fn from_json(text: &str) -> Result<DecisionForest> {
    let file: ForestFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let bot = file.output_alphabet;
    let roots = file
        .trees
        .into_iter()
        .map(|n| node_from_file(n, bot, file.bot_allowed))
        .collect::<Result<Vec<_>>>()?;
    DecisionForest::from_nodes(
        file.input_arity,
        file.input_alphabet,
        file.output_alphabet,
        file.bot_allowed,
        roots,
    )
}
