#![allow(dead_code)]

use icet_core::data::{AttributeKind, AttributeMeta, Case, Dataset};
use icet_core::money::Money;
use icet_core::schema::{CostMatrix, TestCost, TestCostSchema};
use icet_core::tree::{DecisionTree, Node, Split};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub fn usd(d: f64) -> Money {
    Money::from_dollars(d).unwrap()
}

pub fn continuous(name: &str, index: usize) -> AttributeMeta {
    AttributeMeta {
        name: name.into(),
        kind: AttributeKind::Continuous,
        index,
    }
}

pub fn discrete(name: &str, index: usize, values: &[&str]) -> AttributeMeta {
    AttributeMeta {
        name: name.into(),
        kind: AttributeKind::Discrete(values.iter().map(|v| v.to_string()).collect()),
        index,
    }
}

/// alpha, beta, delta ("2" / "3"), epsilon.
pub fn example_attributes() -> Vec<AttributeMeta> {
    vec![
        continuous("alpha", 0),
        continuous("beta", 1),
        discrete("delta", 2, &["2", "3"]),
        continuous("epsilon", 3),
    ]
}

pub fn example_classes() -> Vec<String> {
    vec!["0".into(), "1".into()]
}

/// alpha $5 and beta $10 immediate; delta $7 / $5 and epsilon $10 / $8
/// share a $2 group cost and are delayed.
pub fn example_schema() -> TestCostSchema {
    let grouped = |name: &str, cost: f64| TestCost {
        name: name.into(),
        cost: usd(cost),
        group: Some("A".into()),
        group_common_cost: usd(2.0),
        delayed: true,
        usable: true,
    };
    TestCostSchema::new(vec![
        TestCost::immediate("alpha", usd(5.0)),
        TestCost::immediate("beta", usd(10.0)),
        grouped("delta", 7.0),
        grouped("epsilon", 10.0),
    ])
    .unwrap()
}

pub fn example_matrix() -> CostMatrix {
    CostMatrix::simple(2, usd(50.0))
}

fn leaf(class: usize) -> Node {
    let mut counts = vec![0, 0];
    counts[class] = 1;
    Node::leaf(class, counts)
}

fn test(attribute: usize, split: Split, children: Vec<Node>) -> Node {
    let mut counts = vec![0, 0];
    for c in &children {
        for (k, n) in c.counts().iter().enumerate() {
            counts[k] += n;
        }
    }
    Node::Test {
        attribute,
        split,
        counts,
        children,
    }
}

/// alpha < 3 ? (beta > 6 ? 0 : 1)
///           : (delta = 2 ? (beta < 5 ? 1 : 0) : (epsilon < 4 ? 0 : 1))
pub fn example_tree() -> DecisionTree {
    let low_alpha = test(1, Split::Threshold(6.0), vec![leaf(1), leaf(0)]);
    let delta_two = test(1, Split::Threshold(4.5), vec![leaf(1), leaf(0)]);
    let delta_three = test(3, Split::Threshold(3.5), vec![leaf(0), leaf(1)]);
    let high_alpha = test(2, Split::Values, vec![delta_two, delta_three]);
    DecisionTree::new(
        test(0, Split::Threshold(2.5), vec![low_alpha, high_alpha]),
        2,
    )
}

/// alpha = 6, delta = 3, epsilon = 2 (beta unused on this path).
pub fn traced_case() -> Vec<Option<f64>> {
    vec![Some(6.0), Some(0.0), Some(1.0), Some(2.0)]
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn below(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

pub fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Random complete dataset mixing continuous (small integer grid) and
/// discrete attributes.
pub fn random_dataset(
    rng: &mut ChaCha8Rng,
    n_cases: usize,
    n_attr: usize,
    n_classes: usize,
) -> Dataset {
    let attributes: Vec<AttributeMeta> = (0..n_attr)
        .map(|i| {
            if i % 2 == 0 {
                continuous(&format!("c{i}"), i)
            } else {
                let k = 2 + below(rng, 3);
                let values: Vec<String> = (0..k).map(|v| format!("v{v}")).collect();
                let refs: Vec<&str> = values.iter().map(String::as_str).collect();
                discrete(&format!("d{i}"), i, &refs)
            }
        })
        .collect();
    let cases = (0..n_cases)
        .map(|_| Case {
            values: attributes
                .iter()
                .map(|a| match &a.kind {
                    AttributeKind::Continuous => Some(below(rng, 8) as f64),
                    AttributeKind::Discrete(v) => Some(below(rng, v.len()) as f64),
                })
                .collect(),
            class: below(rng, n_classes),
        })
        .collect();
    Dataset::new(
        "random",
        attributes,
        (0..n_classes).map(|c| c.to_string()).collect(),
        cases,
    )
    .unwrap()
}

/// Random schema over `n_attr` tests with up to two groups.
pub fn random_schema(rng: &mut ChaCha8Rng, n_attr: usize, delayed_prob: f64) -> TestCostSchema {
    let commons = [usd(2.10), usd(3.00)];
    let tests = (0..n_attr)
        .map(|i| {
            let g = below(rng, 3);
            let cost = usd(1.0 + below(rng, 2000) as f64 / 100.0 + 3.0);
            let (group, common) = match g {
                0 => (None, Money::ZERO),
                k => (Some(format!("G{k}")), commons[k - 1]),
            };
            TestCost {
                name: format!("t{i}"),
                cost,
                group,
                group_common_cost: common,
                delayed: unit(rng) < delayed_prob,
                usable: true,
            }
        })
        .collect();
    TestCostSchema::new(tests).unwrap()
}

/// Random tree over `n_attr` continuous attributes with values in 0..8.
pub fn random_tree(rng: &mut ChaCha8Rng, n_attr: usize, max_depth: usize) -> DecisionTree {
    fn grow(rng: &mut ChaCha8Rng, n_attr: usize, depth: usize) -> Node {
        if depth == 0 || unit(rng) < 0.25 {
            let class = below(rng, 2);
            let mut counts = vec![0, 0];
            counts[class] = 1 + below(rng, 5);
            return Node::leaf(class, counts);
        }
        let children = vec![grow(rng, n_attr, depth - 1), grow(rng, n_attr, depth - 1)];
        let mut counts = vec![0, 0];
        for c in &children {
            counts[0] += c.counts()[0];
            counts[1] += c.counts()[1];
        }
        Node::Test {
            attribute: below(rng, n_attr),
            split: Split::Threshold(below(rng, 7) as f64 + 0.5),
            counts,
            children,
        }
    }
    DecisionTree::new(grow(rng, n_attr, max_depth), 2)
}

pub fn random_values(rng: &mut ChaCha8Rng, n_attr: usize) -> Vec<Option<f64>> {
    (0..n_attr).map(|_| Some(below(rng, 8) as f64)).collect()
}
