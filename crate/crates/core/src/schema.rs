//! Test-cost schemas and classification-cost matrices.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::money::Money;

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid cost file {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("test {0}: costs must be finite and non-negative")]
    BadCost(String),
    #[error("group {group}: members disagree on the common cost")]
    InconsistentGroup { group: String },
    #[error("test {0}: group common cost exceeds the test's cost")]
    CommonExceedsCost(String),
    #[error("test {0}: group_common_cost given without a group")]
    CommonWithoutGroup(String),
    #[error("attribute {0} has no cost entry")]
    MissingEntry(String),
    #[error("cost entry {0} does not name an attribute of the dataset")]
    UnknownTest(String),
    #[error("cost entry {0} appears twice")]
    DuplicateTest(String),
    #[error("cost matrix: {0}")]
    Matrix(String),
}

/// Price record for one attribute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestCost {
    pub name: String,
    /// Full price: the price when no other member of the group has been
    /// bought yet, or the only price of an ungrouped test.
    pub cost: Money,
    pub group: Option<String>,
    /// Share of `cost` that is charged once per group.
    pub group_common_cost: Money,
    pub delayed: bool,
    pub usable: bool,
}

impl TestCost {
    pub fn immediate(name: impl Into<String>, cost: Money) -> Self {
        TestCost {
            name: name.into(),
            cost,
            group: None,
            group_common_cost: Money::ZERO,
            delayed: false,
            usable: true,
        }
    }

    pub fn base_cost(&self) -> Money {
        self.cost
    }

    pub fn first_in_group_cost(&self) -> Money {
        self.cost
    }

    pub fn subsequent_cost(&self) -> Money {
        self.cost - self.group_common_cost
    }
}

/// Per-attribute test costs, aligned with a dataset's attribute order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestCostSchema {
    tests: Vec<TestCost>,
    #[serde(skip)]
    group_ids: Vec<Option<usize>>,
    #[serde(skip)]
    n_groups: usize,
}

impl TestCostSchema {
    pub fn new(tests: Vec<TestCost>) -> Result<Self, SchemaError> {
        let mut common: HashMap<&str, Money> = HashMap::new();
        let mut ids: HashMap<&str, usize> = HashMap::new();
        let mut group_ids = Vec::with_capacity(tests.len());
        for t in &tests {
            if t.cost.is_negative() || t.group_common_cost.is_negative() {
                return Err(SchemaError::BadCost(t.name.clone()));
            }
            match &t.group {
                Some(g) => {
                    if t.group_common_cost > t.cost {
                        return Err(SchemaError::CommonExceedsCost(t.name.clone()));
                    }
                    if *common.entry(g).or_insert(t.group_common_cost) != t.group_common_cost {
                        return Err(SchemaError::InconsistentGroup { group: g.clone() });
                    }
                    let next = ids.len();
                    group_ids.push(Some(*ids.entry(g).or_insert(next)));
                }
                None => {
                    if t.group_common_cost != Money::ZERO {
                        return Err(SchemaError::CommonWithoutGroup(t.name.clone()));
                    }
                    group_ids.push(None);
                }
            }
        }
        let n_groups = ids.len();
        Ok(TestCostSchema {
            tests,
            group_ids,
            n_groups,
        })
    }

    pub fn tests(&self) -> &[TestCost] {
        &self.tests
    }

    pub fn len(&self) -> usize {
        self.tests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tests.is_empty()
    }

    pub fn get(&self, attr: usize) -> Option<&TestCost> {
        self.tests.get(attr)
    }

    /// Dense group index of `attr`, if it belongs to a group.
    pub fn group_of(&self, attr: usize) -> Option<usize> {
        self.group_ids.get(attr).copied().flatten()
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn is_delayed(&self, attr: usize) -> bool {
        self.tests.get(attr).is_some_and(|t| t.delayed)
    }

    pub fn usable(&self) -> Vec<usize> {
        (0..self.tests.len())
            .filter(|&i| self.tests[i].usable)
            .collect()
    }

    /// Price of `attr` given the attributes already bought. Returns `None`
    /// when `attr` has no entry.
    pub fn price_of_test(&self, attr: usize, already_selected: &[usize]) -> Option<Money> {
        let t = self.tests.get(attr)?;
        let discounted = match self.group_of(attr) {
            Some(g) => already_selected
                .iter()
                .any(|&s| s != attr && self.group_of(s) == Some(g)),
            None => false,
        };
        Some(if discounted {
            t.subsequent_cost()
        } else {
            t.first_in_group_cost()
        })
    }

    /// Full (undiscounted) price of every attribute, in dollars.
    pub fn true_costs(&self) -> Vec<f64> {
        self.tests.iter().map(|t| t.cost.dollars()).collect()
    }

    /// T: the price of performing every usable test once, paying each
    /// group's common cost a single time.
    pub fn total_test_cost(&self) -> Money {
        let mut seen = vec![false; self.n_groups];
        let mut total = Money::ZERO;
        for (i, t) in self.tests.iter().enumerate().filter(|(_, t)| t.usable) {
            total += t.subsequent_cost();
            if let Some(g) = self.group_of(i) {
                if !seen[g] {
                    seen[g] = true;
                    total += t.group_common_cost;
                }
            }
        }
        total
    }

    /// Every test made immediate.
    pub fn all_immediate(&self) -> TestCostSchema {
        let mut s = self.clone();
        for t in &mut s.tests {
            t.delayed = false;
        }
        s
    }

    /// Every test charged its full price regardless of what else was bought.
    pub fn without_group_discounts(&self) -> TestCostSchema {
        let tests = self
            .tests
            .iter()
            .cloned()
            .map(|mut t| {
                t.group = None;
                t.group_common_cost = Money::ZERO;
                t
            })
            .collect();
        TestCostSchema::new(tests).expect("removing groups keeps a schema valid")
    }
}

impl TestCostSchema {
    /// Rebuilds a schema read back from JSON (derived indices are skipped
    /// by serde).
    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        #[derive(Deserialize)]
        struct Raw {
            tests: Vec<TestCost>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| SchemaError::Parse {
            path: PathBuf::from("<json>"),
            message: e.to_string(),
        })?;
        TestCostSchema::new(raw.tests)
    }
}

/// Square matrix of classification costs indexed `[guess][actual]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    n: usize,
    entries: Vec<Money>,
}

impl CostMatrix {
    pub fn new(rows: Vec<Vec<Money>>) -> Result<Self, SchemaError> {
        let n = rows.len();
        if n == 0 {
            return Err(SchemaError::Matrix("empty matrix".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(SchemaError::Matrix(format!("matrix must be {n}x{n}")));
        }
        Ok(CostMatrix {
            n,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Zero diagonal, `k` everywhere else.
    pub fn simple(n: usize, k: Money) -> Self {
        let entries = (0..n * n)
            .map(|i| if i / n == i % n { Money::ZERO } else { k })
            .collect();
        CostMatrix { n, entries }
    }

    pub fn n_classes(&self) -> usize {
        self.n
    }

    pub fn get(&self, guess: usize, actual: usize) -> Money {
        self.entries[guess * self.n + actual]
    }

    pub fn max(&self) -> Money {
        self.entries.iter().copied().max().unwrap_or(Money::ZERO)
    }
}

// ---------------------------------------------------------------------------
// Cost files

#[derive(Clone, Debug, Deserialize, Serialize)]
struct TestRecord {
    name: String,
    cost: f64,
    #[serde(default)]
    group: Option<String>,
    #[serde(default)]
    group_common_cost: Option<f64>,
    #[serde(default)]
    delayed: bool,
    #[serde(default = "yes")]
    usable: bool,
}

fn yes() -> bool {
    true
}

/// One cell of a parameterized cost matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MatrixEntry {
    Fixed(Money),
    Positive,
    Negative,
    /// The smaller of the two error costs.
    Min,
    /// The larger of the two error costs.
    Max,
}

impl MatrixEntry {
    fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "positive" => Some(MatrixEntry::Positive),
            "negative" => Some(MatrixEntry::Negative),
            "min" => Some(MatrixEntry::Min),
            "max" => Some(MatrixEntry::Max),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| *v >= 0.0)
                .and_then(Money::from_dollars)
                .map(MatrixEntry::Fixed),
        }
    }

    fn resolve(self, positive: Money, negative: Money) -> Money {
        match self {
            MatrixEntry::Fixed(m) => m,
            MatrixEntry::Positive => positive,
            MatrixEntry::Negative => negative,
            MatrixEntry::Min => positive.min(negative),
            MatrixEntry::Max => positive.max(negative),
        }
    }
}

/// A cost matrix written in terms of a positive-error cost (healthy
/// called sick) and a negative-error cost (sick called healthy).
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTemplate {
    pub classes: Vec<String>,
    pub entries: Vec<Vec<MatrixEntry>>,
}

impl MatrixTemplate {
    /// Instantiates the matrix with classes ordered as in `dataset`.
    pub fn instantiate(
        &self,
        dataset: &Dataset,
        positive: Money,
        negative: Money,
    ) -> Result<CostMatrix, SchemaError> {
        let classes = dataset.classes();
        if classes.len() != self.classes.len() {
            return Err(SchemaError::Matrix(format!(
                "template has {} classes, dataset has {}",
                self.classes.len(),
                classes.len()
            )));
        }
        let pos: Vec<usize> = classes
            .iter()
            .map(|c| {
                self.classes
                    .iter()
                    .position(|t| t == c)
                    .ok_or_else(|| SchemaError::Matrix(format!("class {c} not in template")))
            })
            .collect::<Result<_, _>>()?;
        let rows = pos
            .iter()
            .map(|&g| {
                pos.iter()
                    .map(|&a| self.entries[g][a].resolve(positive, negative))
                    .collect()
            })
            .collect();
        CostMatrix::new(rows)
    }

    /// Both error costs equal to `k`.
    pub fn simple(&self, dataset: &Dataset, k: Money) -> Result<CostMatrix, SchemaError> {
        self.instantiate(dataset, k, k)
    }
}

#[derive(Deserialize)]
struct RawMatrix {
    classes: Vec<String>,
    matrix: Vec<Vec<String>>,
}

#[derive(Deserialize)]
struct RawCostFile {
    dataset: String,
    tests: Vec<TestRecord>,
    classification_costs: RawMatrix,
}

/// Parsed cost file: test records plus a matrix template.
#[derive(Clone, Debug)]
pub struct CostSpec {
    pub dataset: String,
    records: Vec<TestRecord>,
    pub matrix: MatrixTemplate,
}

impl CostSpec {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self, SchemaError> {
        let parse_err = |message: String| SchemaError::Parse {
            path: origin.to_path_buf(),
            message,
        };
        let raw: RawCostFile = toml::from_str(text).map_err(|e| parse_err(e.to_string()))?;
        let n = raw.classification_costs.classes.len();
        if raw.classification_costs.matrix.len() != n
            || raw.classification_costs.matrix.iter().any(|r| r.len() != n)
        {
            return Err(parse_err(format!("classification matrix must be {n}x{n}")));
        }
        let entries = raw
            .classification_costs
            .matrix
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| {
                        MatrixEntry::parse(s)
                            .ok_or_else(|| parse_err(format!("bad matrix entry {s:?}")))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        for r in &raw.tests {
            if !r.cost.is_finite() || r.cost < 0.0 {
                return Err(SchemaError::BadCost(r.name.clone()));
            }
            if r.group_common_cost
                .is_some_and(|c| !c.is_finite() || c < 0.0)
            {
                return Err(SchemaError::BadCost(r.name.clone()));
            }
        }
        Ok(CostSpec {
            dataset: raw.dataset,
            records: raw.tests,
            matrix: MatrixTemplate {
                classes: raw.classification_costs.classes,
                entries,
            },
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, SchemaError> {
        let text = fs::read_to_string(path).map_err(|source| SchemaError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, path)
    }

    /// Aligns the records with `dataset`'s attributes. Every attribute needs
    /// exactly one record and every record must name an attribute.
    pub fn schema_for(&self, dataset: &Dataset) -> Result<TestCostSchema, SchemaError> {
        let mut by_name: HashMap<&str, &TestRecord> = HashMap::new();
        for r in &self.records {
            if by_name.insert(r.name.as_str(), r).is_some() {
                return Err(SchemaError::DuplicateTest(r.name.clone()));
            }
            if dataset.attribute_index(&r.name).is_none() {
                return Err(SchemaError::UnknownTest(r.name.clone()));
            }
        }
        let tests = dataset
            .attributes()
            .iter()
            .map(|a| {
                let r = by_name
                    .get(a.name.as_str())
                    .ok_or_else(|| SchemaError::MissingEntry(a.name.clone()))?;
                let money =
                    |v: f64| Money::from_dollars(v).ok_or(SchemaError::BadCost(r.name.clone()));
                if r.group.is_none() && r.group_common_cost.is_some_and(|c| c != 0.0) {
                    return Err(SchemaError::CommonWithoutGroup(r.name.clone()));
                }
                Ok(TestCost {
                    name: r.name.clone(),
                    cost: money(r.cost)?,
                    group: r.group.clone(),
                    group_common_cost: money(r.group_common_cost.unwrap_or(0.0))?,
                    delayed: r.delayed,
                    usable: r.usable,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        TestCostSchema::new(tests)
    }
}
