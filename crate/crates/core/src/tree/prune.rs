//! Pessimistic error pruning.

use super::{DecisionTree, Node};

const CONFIDENCE: [f64; 9] = [0.0, 0.001, 0.005, 0.01, 0.05, 0.10, 0.20, 0.40, 1.00];
const DEVIATE: [f64; 9] = [4.0, 3.09, 2.58, 2.33, 1.65, 1.28, 0.84, 0.25, 0.00];

/// Squared normal deviate for confidence level `cf` in (0, 1], linearly
/// interpolated from a fixed table.
fn squared_deviate(cf: f64) -> f64 {
    let mut i = 0;
    while i < CONFIDENCE.len() - 1 && cf > CONFIDENCE[i] {
        i += 1;
    }
    let dev = if i == 0 {
        DEVIATE[0]
    } else {
        DEVIATE[i - 1]
            + (DEVIATE[i] - DEVIATE[i - 1]) * (cf - CONFIDENCE[i - 1])
                / (CONFIDENCE[i] - CONFIDENCE[i - 1])
    };
    dev * dev
}

/// Extra errors to add to `e` observed errors out of `n` cases for an upper
/// confidence bound at level `cf` (a fraction in (0, 1]).
pub fn add_errors(n: f64, e: f64, cf: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    if e < 1e-6 {
        return n * (1.0 - cf.powf(1.0 / n));
    }
    if e < 0.9999 {
        let v = n * (1.0 - cf.powf(1.0 / n));
        return v + e * (add_errors(n, 1.0, cf) - v);
    }
    if e + 0.5 >= n {
        return 0.67 * (n - e);
    }
    let coeff = squared_deviate(cf);
    let e5 = e + 0.5;
    let pr =
        (e5 + coeff / 2.0 + (coeff * (e5 * (1.0 - e5 / n) + coeff / 4.0)).sqrt()) / (n + coeff);
    n * pr - e
}

/// Replaces subtrees by leaves, bottom-up, wherever the leaf's estimated
/// errors do not exceed the subtree's. `cf` is in [1, 100].
pub fn prune(tree: &DecisionTree, cf: f64) -> DecisionTree {
    let level = (cf / 100.0).clamp(1e-9, 1.0);
    let (root, _) = prune_node(&tree.root, level);
    DecisionTree::new(root, tree.n_classes)
}

fn leaf_estimate(counts: &[usize], class: usize, cf: f64) -> f64 {
    let n: usize = counts.iter().sum();
    let e = (n - counts[class]) as f64;
    e + add_errors(n as f64, e, cf)
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

fn prune_node(node: &Node, cf: f64) -> (Node, f64) {
    match node {
        Node::Leaf { class, counts } => (node.clone(), leaf_estimate(counts, *class, cf)),
        Node::Test {
            attribute,
            split,
            counts,
            children,
        } => {
            let mut subtree = 0.0;
            let mut kept = Vec::with_capacity(children.len());
            for c in children {
                let (n, est) = prune_node(c, cf);
                subtree += est;
                kept.push(n);
            }
            let class = majority(counts);
            let as_leaf = leaf_estimate(counts, class, cf);
            if as_leaf <= subtree + 1e-9 {
                (Node::leaf(class, counts.clone()), as_leaf)
            } else {
                (
                    Node::Test {
                        attribute: *attribute,
                        split: split.clone(),
                        counts: counts.clone(),
                        children: kept,
                    },
                    subtree,
                )
            }
        }
    }
}
