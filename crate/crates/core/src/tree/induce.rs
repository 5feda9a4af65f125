//! Top-down induction with pluggable selection heuristics.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::heuristic::{check_cost, entropy, icf_score, HeuristicError};
use super::prune::prune;
use super::{DecisionTree, Node, Split};
use crate::data::{AttributeKind, Dataset};

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("case {row} is missing a value for attribute {attribute}")]
    MissingValue { row: usize, attribute: usize },
    #[error("heuristic has {got} costs for {expected} attributes")]
    CostLength { expected: usize, got: usize },
    #[error("cf must lie in [1, 100], got {0}")]
    ConfidenceOutOfRange(f64),
    #[error("min_cases must be at least 1")]
    MinCases,
    #[error("no training cases")]
    Empty,
    #[error(transparent)]
    Heuristic(#[from] HeuristicError),
}

/// Attribute-selection rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Heuristic {
    GainRatio,
    Icf { costs: Vec<f64>, omega: f64 },
    CsId3 { costs: Vec<f64> },
    Idx { costs: Vec<f64> },
}

impl Heuristic {
    pub fn icf(costs: Vec<f64>, omega: f64) -> Result<Self, HeuristicError> {
        if !(0.0..=1.0).contains(&omega) {
            return Err(HeuristicError::OmegaOutOfRange(omega));
        }
        if let Some(&c) = costs.iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(HeuristicError::NonPositiveCost(c));
        }
        Ok(Heuristic::Icf { costs, omega })
    }

    pub fn cs_id3(costs: Vec<f64>) -> Result<Self, HeuristicError> {
        costs.iter().try_for_each(|&c| check_cost(c))?;
        Ok(Heuristic::CsId3 { costs })
    }

    pub fn idx(costs: Vec<f64>) -> Result<Self, HeuristicError> {
        costs.iter().try_for_each(|&c| check_cost(c))?;
        Ok(Heuristic::Idx { costs })
    }

    fn costs(&self) -> Option<&[f64]> {
        match self {
            Heuristic::GainRatio => None,
            Heuristic::Icf { costs, .. }
            | Heuristic::CsId3 { costs }
            | Heuristic::Idx { costs } => Some(costs),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InductionParams {
    pub heuristic: Heuristic,
    /// Pruning confidence in [1, 100]; lower prunes harder.
    pub cf: f64,
    pub excluded: BTreeSet<usize>,
    pub min_cases: usize,
    /// Restrict gain-ratio ranking to attributes with at least average gain.
    pub gain_ratio_guard: bool,
    /// Feed gain ratio instead of gain into the ICF numerator.
    pub icf_uses_gain_ratio: bool,
}

impl InductionParams {
    pub fn new(heuristic: Heuristic, cf: f64) -> Self {
        InductionParams {
            heuristic,
            cf,
            excluded: BTreeSet::new(),
            min_cases: 2,
            gain_ratio_guard: true,
            icf_uses_gain_ratio: false,
        }
    }

    pub fn c45() -> Self {
        Self::new(Heuristic::GainRatio, 25.0)
    }

    pub fn with_excluded(mut self, excluded: impl IntoIterator<Item = usize>) -> Self {
        self.excluded = excluded.into_iter().collect();
        self
    }

    pub fn with_min_cases(mut self, min_cases: usize) -> Self {
        self.min_cases = min_cases;
        self
    }

    fn validate(&self, n_attributes: usize) -> Result<(), TreeError> {
        if !(1.0..=100.0).contains(&self.cf) {
            return Err(TreeError::ConfidenceOutOfRange(self.cf));
        }
        if self.min_cases == 0 {
            return Err(TreeError::MinCases);
        }
        if let Some(costs) = self.heuristic.costs() {
            if costs.len() != n_attributes {
                return Err(TreeError::CostLength {
                    expected: n_attributes,
                    got: costs.len(),
                });
            }
        }
        Ok(())
    }
}

/// Chosen test for a node.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub attribute: usize,
    pub split: Split,
    pub gain: f64,
    pub score: f64,
}

/// Gains below this are treated as zero.
const MIN_GAIN: f64 = 1e-12;

/// `a` beats `b` by more than rounding noise.
fn better(a: f64, b: f64) -> bool {
    a > b + 1e-9 * b.abs()
}

struct Candidate {
    attribute: usize,
    split: Split,
    gain: f64,
    split_info: f64,
}

/// Column-major copy of a dataset, shared by many inductions over subsets
/// of its rows.
pub struct Inducer {
    columns: Vec<Vec<f64>>,
    classes: Vec<usize>,
    /// Number of values for discrete attributes, `None` for continuous.
    arity: Vec<Option<usize>>,
    n_classes: usize,
}

impl Inducer {
    pub fn new(d: &Dataset) -> Result<Self, TreeError> {
        let n_attr = d.attributes().len();
        let mut columns = vec![Vec::with_capacity(d.len()); n_attr];
        for (row, case) in d.cases().iter().enumerate() {
            for (a, v) in case.values.iter().enumerate() {
                columns[a].push(v.ok_or(TreeError::MissingValue { row, attribute: a })?);
            }
        }
        Ok(Inducer {
            columns,
            classes: d.cases().iter().map(|c| c.class).collect(),
            arity: d
                .attributes()
                .iter()
                .map(|a| match &a.kind {
                    AttributeKind::Continuous => None,
                    AttributeKind::Discrete(v) => Some(v.len()),
                })
                .collect(),
            n_classes: d.classes().len(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.classes.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.columns.len()
    }

    fn class_counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &r in rows {
            counts[self.classes[r]] += 1;
        }
        counts
    }

    /// Grows and prunes a tree on `rows`.
    pub fn induce(
        &self,
        rows: &[usize],
        params: &InductionParams,
    ) -> Result<DecisionTree, TreeError> {
        let grown = self.grow(rows, params)?;
        Ok(prune(&grown, params.cf))
    }

    /// Grows an unpruned tree on `rows`.
    pub fn grow(
        &self,
        rows: &[usize],
        params: &InductionParams,
    ) -> Result<DecisionTree, TreeError> {
        params.validate(self.n_attributes())?;
        if rows.is_empty() {
            return Err(TreeError::Empty);
        }
        let mut used = vec![false; self.n_attributes()];
        for &a in &params.excluded {
            if a < used.len() {
                used[a] = true;
            }
        }
        let root = self.grow_node(rows.to_vec(), &mut used, params);
        Ok(DecisionTree::new(root, self.n_classes))
    }

    fn grow_node(&self, rows: Vec<usize>, blocked: &mut [bool], params: &InductionParams) -> Node {
        let counts = self.class_counts(&rows);
        let majority = majority(&counts);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || rows.len() < 2 * params.min_cases {
            return Node::leaf(majority, counts);
        }
        let candidates: Vec<usize> = (0..self.n_attributes()).filter(|&a| !blocked[a]).collect();
        let Some(sel) = self.select(&rows, &candidates, params) else {
            return Node::leaf(majority, counts);
        };
        let parts = self.partition(&rows, sel.attribute, &sel.split);
        let discrete = matches!(sel.split, Split::Values);
        if discrete {
            blocked[sel.attribute] = true;
        }
        let children = parts
            .into_iter()
            .map(|part| {
                if part.is_empty() {
                    Node::leaf(majority, vec![0; self.n_classes])
                } else {
                    self.grow_node(part, blocked, params)
                }
            })
            .collect();
        if discrete {
            blocked[sel.attribute] = false;
        }
        Node::Test {
            attribute: sel.attribute,
            split: sel.split,
            counts,
            children,
        }
    }

    fn partition(&self, rows: &[usize], attribute: usize, split: &Split) -> Vec<Vec<usize>> {
        let col = &self.columns[attribute];
        match split {
            Split::Threshold(t) => {
                let (lo, hi): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| col[r] <= *t);
                vec![lo, hi]
            }
            Split::Values => {
                let mut parts = vec![Vec::new(); self.arity[attribute].unwrap_or(0)];
                for &r in rows {
                    parts[col[r] as usize].push(r);
                }
                parts
            }
        }
    }

    /// Best test among `candidates` for `rows`, or `None` when no candidate
    /// has a positive score.
    pub fn select(
        &self,
        rows: &[usize],
        candidates: &[usize],
        params: &InductionParams,
    ) -> Option<Selection> {
        let parent = self.class_counts(rows);
        let cands: Vec<Candidate> = candidates
            .iter()
            .filter_map(|&a| self.best_split(rows, a, &parent, params.min_cases))
            .filter(|c| c.gain > MIN_GAIN)
            .collect();
        if cands.is_empty() {
            return None;
        }
        match &params.heuristic {
            Heuristic::GainRatio => {
                let floor = if params.gain_ratio_guard {
                    cands.iter().map(|c| c.gain).sum::<f64>() / cands.len() as f64 - 1e-3
                } else {
                    f64::NEG_INFINITY
                };
                pick(cands.into_iter().filter(|c| c.gain >= floor), |c| {
                    c.gain / c.split_info
                })
            }
            Heuristic::Icf { costs, omega } => pick(cands.into_iter(), |c| {
                let g = if params.icf_uses_gain_ratio {
                    c.gain / c.split_info
                } else {
                    c.gain
                };
                icf_score(g, costs[c.attribute], *omega)
            }),
            Heuristic::CsId3 { costs } => {
                pick(cands.into_iter(), |c| c.gain * c.gain / costs[c.attribute])
            }
            Heuristic::Idx { costs } => pick(cands.into_iter(), |c| c.gain / costs[c.attribute]),
        }
    }

    fn best_split(
        &self,
        rows: &[usize],
        attribute: usize,
        parent: &[usize],
        min_cases: usize,
    ) -> Option<Candidate> {
        let col = &self.columns[attribute];
        let n = rows.len();
        let h_parent = entropy(parent);
        match self.arity[attribute] {
            Some(arity) => {
                let mut table = vec![vec![0usize; self.n_classes]; arity];
                for &r in rows {
                    table[col[r] as usize][self.classes[r]] += 1;
                }
                let sizes: Vec<usize> = table.iter().map(|t| t.iter().sum()).collect();
                if sizes.iter().filter(|&&s| s >= min_cases).count() < 2 {
                    return None;
                }
                let remainder: f64 = table
                    .iter()
                    .zip(&sizes)
                    .map(|(t, &s)| s as f64 / n as f64 * entropy(t))
                    .sum();
                Some(Candidate {
                    attribute,
                    split: Split::Values,
                    gain: (h_parent - remainder).max(0.0),
                    split_info: entropy(&sizes),
                })
            }
            None => {
                let mut pairs: Vec<(f64, usize)> =
                    rows.iter().map(|&r| (col[r], self.classes[r])).collect();
                pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
                let mut left = vec![0usize; self.n_classes];
                let mut right = parent.to_vec();
                let mut best: Option<(f64, f64, usize)> = None;
                for i in 0..n - 1 {
                    let (v, c) = pairs[i];
                    left[c] += 1;
                    right[c] -= 1;
                    let nl = i + 1;
                    let next = pairs[i + 1].0;
                    if v == next || nl < min_cases || n - nl < min_cases {
                        continue;
                    }
                    let gain = h_parent
                        - nl as f64 / n as f64 * entropy(&left)
                        - (n - nl) as f64 / n as f64 * entropy(&right);
                    if best.map_or(true, |(g, _, _)| better(gain, g)) {
                        let mid = v + (next - v) / 2.0;
                        let t = if mid < next { mid } else { v };
                        best = Some((gain, t, nl));
                    }
                }
                let (gain, t, nl) = best?;
                Some(Candidate {
                    attribute,
                    split: Split::Threshold(t),
                    gain: gain.max(0.0),
                    split_info: entropy(&[nl, n - nl]),
                })
            }
        }
    }
}

/// Highest score wins; near-ties keep the earlier (lower-index) candidate.
fn pick(
    cands: impl Iterator<Item = Candidate>,
    score: impl Fn(&Candidate) -> f64,
) -> Option<Selection> {
    let mut best: Option<Selection> = None;
    for c in cands {
        let s = score(&c);
        if !(s > 0.0) {
            continue;
        }
        let wins = best.as_ref().map_or(true, |b| {
            better(s, b.score) || (!better(b.score, s) && c.attribute < b.attribute)
        });
        if wins {
            best = Some(Selection {
                attribute: c.attribute,
                split: c.split,
                gain: c.gain,
                score: s,
            });
        }
    }
    best
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

/// Grows and prunes a tree on every case of `train`.
pub fn build_tree(train: &Dataset, params: &InductionParams) -> Result<DecisionTree, TreeError> {
    let inducer = Inducer::new(train)?;
    let rows: Vec<usize> = (0..train.len()).collect();
    inducer.induce(&rows, params)
}

/// Grows a tree on every case of `train` without pruning.
pub fn grow_tree(train: &Dataset, params: &InductionParams) -> Result<DecisionTree, TreeError> {
    let inducer = Inducer::new(train)?;
    let rows: Vec<usize> = (0..train.len()).collect();
    inducer.grow(&rows, params)
}
