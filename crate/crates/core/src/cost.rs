//! Cost of classifying cases with a tree: test charges, group discounts,
//! delayed-test commitment and misclassification penalties.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{AttributeKind, AttributeMeta, Case, Dataset};
use crate::money::Money;
use crate::schema::{CostMatrix, TestCostSchema};
use crate::tree::{DecisionTree, Node};

#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("attribute {0} has no cost entry")]
    MissingEntry(usize),
    #[error("class {class} outside the {n}x{n} cost matrix")]
    ClassOutOfRange { class: usize, n: usize },
    #[error("no cases to evaluate")]
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Charge {
    pub attribute: usize,
    pub price: Money,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum LedgerStep {
    /// A test reached on the path. `charges` is empty when the test was
    /// already paid for; a delayed test that opens a commitment lists every
    /// test bought with it.
    Test {
        attribute: usize,
        value: Option<f64>,
        charges: Vec<Charge>,
    },
    Guess {
        guess: usize,
        actual: usize,
        cost: Money,
    },
}

/// Itemized cost of one case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    pub steps: Vec<LedgerStep>,
    pub tests_charged: Vec<Charge>,
    pub error_cost: Money,
    pub total: Money,
    pub guess: usize,
}

impl CostLedger {
    pub fn test_cost(&self) -> Money {
        self.tests_charged.iter().map(|c| c.price).sum()
    }

    /// Step / action / result / cost table.
    pub fn render(&self, attributes: &[AttributeMeta], classes: &[String]) -> String {
        let name = |a: usize| {
            attributes
                .get(a)
                .map(|m| m.name.clone())
                .unwrap_or_else(|| format!("#{a}"))
        };
        let class = |c: usize| classes.get(c).cloned().unwrap_or_else(|| c.to_string());
        let mut rows = vec![(
            "step".to_string(),
            "action".to_string(),
            "result".to_string(),
            "cost".to_string(),
        )];
        for (i, step) in self.steps.iter().enumerate() {
            let (action, result, cost) = match step {
                LedgerStep::Test {
                    attribute,
                    value,
                    charges,
                } => {
                    let shown = match (value, attributes.get(*attribute).map(|m| &m.kind)) {
                        (None, _) => "?".to_string(),
                        (Some(v), Some(AttributeKind::Discrete(values))) => values
                            .get(*v as usize)
                            .cloned()
                            .unwrap_or_else(|| v.to_string()),
                        (Some(v), _) => v.to_string(),
                    };
                    let cost = match charges.as_slice() {
                        [] => "already paid".to_string(),
                        [one] => one.price.to_string(),
                        many => {
                            let parts: Vec<String> =
                                many.iter().map(|c| c.price.to_string()).collect();
                            let sum: Money = many.iter().map(|c| c.price).sum();
                            format!("{} = {sum}", parts.join(" + "))
                        }
                    };
                    (
                        format!("do {}", name(*attribute)),
                        format!("{} = {shown}", name(*attribute)),
                        cost,
                    )
                }
                LedgerStep::Guess {
                    guess,
                    actual,
                    cost,
                } => (
                    format!("guess class = {}", class(*guess)),
                    format!("actual class = {}", class(*actual)),
                    cost.to_string(),
                ),
            };
            rows.push(((i + 1).to_string(), action, result, cost));
        }
        rows.push((
            String::new(),
            "total".into(),
            String::new(),
            self.total.to_string(),
        ));
        let w0 = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        let w1 = rows.iter().map(|r| r.1.len()).max().unwrap_or(0);
        let w2 = rows.iter().map(|r| r.2.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (a, b, c, d) in rows {
            let line = format!("{a:<w0$}  {b:<w1$}  {c:<w2$}  {d}");
            let _ = writeln!(out, "{}", line.trim_end());
        }
        out
    }
}

struct Purchases<'a> {
    schema: &'a TestCostSchema,
    charged: Vec<bool>,
    groups: Vec<bool>,
}

impl<'a> Purchases<'a> {
    fn new(schema: &'a TestCostSchema) -> Self {
        Purchases {
            schema,
            charged: vec![false; schema.len()],
            groups: vec![false; schema.n_groups()],
        }
    }

    fn paid(&self, attribute: usize) -> bool {
        self.charged.get(attribute).copied().unwrap_or(false)
    }

    fn buy(&mut self, attribute: usize) -> Result<Money, CostError> {
        let t = self
            .schema
            .get(attribute)
            .ok_or(CostError::MissingEntry(attribute))?;
        self.charged[attribute] = true;
        Ok(match self.schema.group_of(attribute) {
            Some(g) if self.groups[g] => t.subsequent_cost(),
            Some(g) => {
                self.groups[g] = true;
                t.first_in_group_cost()
            }
            None => t.first_in_group_cost(),
        })
    }
}

/// Walks `values` down the tree, returning (test cost, guess) and filling
/// `steps` when given.
fn walk(
    tree: &DecisionTree,
    values: &[Option<f64>],
    schema: &TestCostSchema,
    mut steps: Option<&mut Vec<LedgerStep>>,
    mut charges_out: Option<&mut Vec<Charge>>,
) -> Result<(Money, usize), CostError> {
    let mut bought = Purchases::new(schema);
    let mut committed = false;
    let mut spent = Money::ZERO;
    let mut node = &tree.root;
    loop {
        let Node::Test {
            attribute,
            children,
            ..
        } = node
        else {
            let Node::Leaf { class, .. } = node else {
                unreachable!()
            };
            return Ok((spent, *class));
        };
        let attribute = *attribute;
        if schema.get(attribute).is_none() {
            return Err(CostError::MissingEntry(attribute));
        }
        let mut charges = Vec::new();
        if !bought.paid(attribute) {
            if !committed && schema.is_delayed(attribute) {
                committed = true;
                for a in node.attributes_preorder() {
                    if !bought.paid(a) {
                        let price = bought.buy(a)?;
                        charges.push(Charge {
                            attribute: a,
                            price,
                        });
                    }
                }
            } else {
                let price = bought.buy(attribute)?;
                charges.push(Charge { attribute, price });
            }
        }
        spent += charges.iter().map(|c| c.price).sum();
        if let Some(out) = charges_out.as_deref_mut() {
            out.extend_from_slice(&charges);
        }
        if let Some(steps) = steps.as_deref_mut() {
            steps.push(LedgerStep::Test {
                attribute,
                value: values.get(attribute).copied().flatten(),
                charges,
            });
        }
        let i = node.route(values).expect("test node routes");
        node = &children[i];
    }
}

/// Itemized cost of classifying `values` whose true class is `actual`.
pub fn case_cost(
    tree: &DecisionTree,
    values: &[Option<f64>],
    schema: &TestCostSchema,
    matrix: &CostMatrix,
    actual: usize,
) -> Result<CostLedger, CostError> {
    let mut steps = Vec::new();
    let mut tests_charged = Vec::new();
    let (spent, guess) = walk(
        tree,
        values,
        schema,
        Some(&mut steps),
        Some(&mut tests_charged),
    )?;
    let error_cost = matrix_entry(matrix, guess, actual)?;
    steps.push(LedgerStep::Guess {
        guess,
        actual,
        cost: error_cost,
    });
    Ok(CostLedger {
        steps,
        tests_charged,
        error_cost,
        total: spent + error_cost,
        guess,
    })
}

fn matrix_entry(matrix: &CostMatrix, guess: usize, actual: usize) -> Result<Money, CostError> {
    let n = matrix.n_classes();
    for class in [guess, actual] {
        if class >= n {
            return Err(CostError::ClassOutOfRange { class, n });
        }
    }
    Ok(matrix.get(guess, actual))
}

/// Totals over a set of evaluated cases.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostTotals {
    pub cases: usize,
    pub test_cost: Money,
    pub error_cost: Money,
    pub errors: usize,
}

impl CostTotals {
    pub fn total(&self) -> Money {
        self.test_cost + self.error_cost
    }

    pub fn average_cost(&self) -> f64 {
        self.total().dollars() / self.cases.max(1) as f64
    }

    pub fn average_test_cost(&self) -> f64 {
        self.test_cost.dollars() / self.cases.max(1) as f64
    }

    pub fn error_rate_pct(&self) -> f64 {
        100.0 * self.errors as f64 / self.cases.max(1) as f64
    }

    pub fn merge(self, other: CostTotals) -> CostTotals {
        CostTotals {
            cases: self.cases + other.cases,
            test_cost: self.test_cost + other.test_cost,
            error_cost: self.error_cost + other.error_cost,
            errors: self.errors + other.errors,
        }
    }

    /// Normalizes against a standard cost and a total test cost T.
    pub fn report(&self, standard_cost: Money, all_tests: Money) -> EvaluationReport {
        let pct = |x: f64, of: Money| {
            if of == Money::ZERO {
                0.0
            } else {
                100.0 * x / of.dollars()
            }
        };
        EvaluationReport {
            cases: self.cases,
            average_cost: self.average_cost(),
            average_test_cost: self.average_test_cost(),
            normalized_cost_pct: pct(self.average_cost(), standard_cost),
            test_expenditure_pct: pct(self.average_test_cost(), all_tests),
            error_rate_pct: self.error_rate_pct(),
            standard_cost,
            all_tests_cost: all_tests,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub cases: usize,
    pub average_cost: f64,
    pub average_test_cost: f64,
    pub normalized_cost_pct: f64,
    pub test_expenditure_pct: f64,
    pub error_rate_pct: f64,
    pub standard_cost: Money,
    pub all_tests_cost: Money,
}

/// Sums costs over `cases` without building ledgers.
pub fn total_cost<'a>(
    tree: &DecisionTree,
    cases: impl IntoIterator<Item = &'a Case>,
    schema: &TestCostSchema,
    matrix: &CostMatrix,
) -> Result<CostTotals, CostError> {
    let mut t = CostTotals::default();
    for case in cases {
        let (spent, guess) = walk(tree, &case.values, schema, None, None)?;
        t.cases += 1;
        t.test_cost += spent;
        t.error_cost += matrix_entry(matrix, guess, case.class)?;
        t.errors += usize::from(guess != case.class);
    }
    Ok(t)
}

/// Average cost per case of classifying `test`.
pub fn average_cost(
    tree: &DecisionTree,
    test: &Dataset,
    schema: &TestCostSchema,
    matrix: &CostMatrix,
) -> Result<CostTotals, CostError> {
    if test.is_empty() {
        return Err(CostError::Empty);
    }
    total_cost(tree, test.cases(), schema, matrix)
}

/// Full evaluation normalized by the standard cost of `population`, the
/// whole dataset `test` was drawn from.
pub fn evaluate(
    tree: &DecisionTree,
    test: &Dataset,
    population: &Dataset,
    schema: &TestCostSchema,
    matrix: &CostMatrix,
) -> Result<EvaluationReport, CostError> {
    let totals = average_cost(tree, test, schema, matrix)?;
    let standard = standard_cost(population, schema, matrix)?;
    Ok(totals.report(standard, schema.total_test_cost()))
}

/// T plus the expected error cost of always guessing the most common class
/// under the worst matrix entry: `T + min_i(1 - f_i) * max C`.
pub fn standard_cost(
    dataset: &Dataset,
    schema: &TestCostSchema,
    matrix: &CostMatrix,
) -> Result<Money, CostError> {
    if dataset.is_empty() {
        return Err(CostError::Empty);
    }
    if dataset.classes().len() > matrix.n_classes() {
        return Err(CostError::ClassOutOfRange {
            class: dataset.classes().len() - 1,
            n: matrix.n_classes(),
        });
    }
    let counts = dataset.class_counts();
    let n = dataset.len() as i128;
    let most = *counts.iter().max().expect("classes nonempty") as i128;
    let max = i128::from(matrix.max().cents());
    // (n - most) / n * max, rounded half away from zero, in cents.
    let num = (n - most) * max;
    let cents = (2 * num + n) / (2 * n);
    Ok(schema.total_test_cost() + Money::from_cents(cents as i64))
}

/// T plus the largest matrix entry.
pub fn max_cost(schema: &TestCostSchema, matrix: &CostMatrix) -> Money {
    schema.total_test_cost() + matrix.max()
}
