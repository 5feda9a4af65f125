//! Decision trees: structure, classification, rendering, induction and pruning.

mod heuristic;
mod induce;
mod prune;

pub use heuristic::{
    cs_id3_score, entropy, icf_score, idx_score, info_gain, split_info, HeuristicError,
};
pub use induce::{
    build_tree, grow_tree, Heuristic, Inducer, InductionParams, Selection, TreeError,
};
pub use prune::{add_errors, prune};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::data::{AttributeKind, AttributeMeta};

/// How an internal node divides its cases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Split {
    /// Child 0 takes values `<= t`, child 1 the rest.
    Threshold(f64),
    /// One child per declared value of a discrete attribute.
    Values,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        class: usize,
        /// Training cases per class that reached this leaf.
        counts: Vec<usize>,
    },
    Test {
        attribute: usize,
        split: Split,
        counts: Vec<usize>,
        children: Vec<Node>,
    },
}

impl Node {
    pub fn leaf(class: usize, counts: Vec<usize>) -> Node {
        Node::Leaf { class, counts }
    }

    pub fn counts(&self) -> &[usize] {
        match self {
            Node::Leaf { counts, .. } | Node::Test { counts, .. } => counts,
        }
    }

    pub fn total(&self) -> usize {
        self.counts().iter().sum()
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }

    pub fn attribute(&self) -> Option<usize> {
        match self {
            Node::Test { attribute, .. } => Some(*attribute),
            Node::Leaf { .. } => None,
        }
    }

    pub fn children(&self) -> &[Node] {
        match self {
            Node::Test { children, .. } => children,
            Node::Leaf { .. } => &[],
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(Node::node_count).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        self.children()
            .iter()
            .map(|c| 1 + c.depth())
            .max()
            .unwrap_or(0)
    }

    /// Index of the child a case with `values` descends to.
    pub fn route(&self, values: &[Option<f64>]) -> Option<usize> {
        let Node::Test {
            attribute,
            split,
            children,
            ..
        } = self
        else {
            return None;
        };
        let v = values.get(*attribute).copied().flatten();
        let chosen = match (split, v) {
            (Split::Threshold(t), Some(v)) => Some(usize::from(v > *t)),
            (Split::Values, Some(v)) if v >= 0.0 && (v as usize) < children.len() => {
                let i = v as usize;
                (children[i].total() > 0).then_some(i)
            }
            _ => None,
        };
        Some(chosen.unwrap_or_else(|| largest_child(children)))
    }

    /// Attributes in pre-order, each listed once.
    pub fn attributes_preorder(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_attributes(&mut out);
        out
    }

    fn collect_attributes(&self, out: &mut Vec<usize>) {
        if let Node::Test {
            attribute,
            children,
            ..
        } = self
        {
            if !out.contains(attribute) {
                out.push(*attribute);
            }
            for c in children {
                c.collect_attributes(out);
            }
        }
    }
}

fn largest_child(children: &[Node]) -> usize {
    let mut best = 0;
    for (i, c) in children.iter().enumerate() {
        if c.total() > children[best].total() {
            best = i;
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: Node,
    pub n_classes: usize,
}

impl DecisionTree {
    pub fn new(root: Node, n_classes: usize) -> Self {
        DecisionTree { root, n_classes }
    }

    /// Predicted class and the internal nodes visited, root first.
    pub fn classify(&self, values: &[Option<f64>]) -> (usize, Vec<&Node>) {
        let mut path = Vec::new();
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { class, .. } => return (*class, path),
                Node::Test { children, .. } => {
                    path.push(node);
                    let i = node.route(values).expect("test node routes");
                    node = &children[i];
                }
            }
        }
    }

    pub fn predict(&self, values: &[Option<f64>]) -> usize {
        let mut node = &self.root;
        while let Some(i) = node.route(values) {
            node = &node.children()[i];
        }
        match node {
            Node::Leaf { class, .. } => *class,
            Node::Test { .. } => unreachable!("route returns None only at leaves"),
        }
    }

    pub fn node_count(&self) -> usize {
        self.root.node_count()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn attributes_used(&self) -> Vec<usize> {
        let mut a = self.root.attributes_preorder();
        a.sort_unstable();
        a
    }

    /// Indented, one line per branch.
    pub fn render(&self, attributes: &[AttributeMeta], classes: &[String]) -> String {
        let mut out = String::new();
        render_node(&self.root, attributes, classes, 0, &mut out);
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

fn render_node(
    node: &Node,
    attributes: &[AttributeMeta],
    classes: &[String],
    depth: usize,
    out: &mut String,
) {
    let class_name = |c: usize| classes.get(c).cloned().unwrap_or_else(|| c.to_string());
    match node {
        Node::Leaf { class, counts } => {
            let n: usize = counts.iter().sum();
            let errors = n - counts.get(*class).copied().unwrap_or(0);
            let _ = writeln!(
                out,
                "{}-> {} ({n}/{errors})",
                "  ".repeat(depth),
                class_name(*class)
            );
        }
        Node::Test {
            attribute,
            split,
            children,
            ..
        } => {
            let meta = attributes.get(*attribute);
            let name = meta
                .map(|m| m.name.clone())
                .unwrap_or_else(|| format!("#{attribute}"));
            for (i, child) in children.iter().enumerate() {
                let cond = match split {
                    Split::Threshold(t) if i == 0 => format!("{name} <= {t}"),
                    Split::Threshold(t) => format!("{name} > {t}"),
                    Split::Values => {
                        let value = match meta.map(|m| &m.kind) {
                            Some(AttributeKind::Discrete(values)) => {
                                values.get(i).cloned().unwrap_or_else(|| i.to_string())
                            }
                            _ => i.to_string(),
                        };
                        format!("{name} = {value}")
                    }
                };
                let _ = writeln!(out, "{}{cond}", "  ".repeat(depth));
                render_node(child, attributes, classes, depth + 1, out);
            }
        }
    }
}
