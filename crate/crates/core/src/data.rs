//! Tabular cases, dataset descriptors, missing-value handling and splits.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid descriptor {path}: {message}")]
    Descriptor { path: PathBuf, message: String },
    #[error("line {line}: expected {expected} fields, found {found}")]
    Arity {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: cannot parse {value:?} for column {column}")]
    Value {
        line: usize,
        column: String,
        value: String,
    },
    #[error("line {line}: unknown class label {label:?}")]
    UnknownClass { line: usize, label: String },
    #[error("{0} contains no cases")]
    Empty(String),
    #[error("invalid dataset: {0}")]
    Invalid(String),
    #[error("cannot impute {attribute}: no case has a value for it")]
    Unimputable { attribute: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AttributeKind {
    Continuous,
    /// Values are stored as indices into this list.
    Discrete(Vec<String>),
}

impl AttributeKind {
    pub fn is_continuous(&self) -> bool {
        matches!(self, AttributeKind::Continuous)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeMeta {
    pub name: String,
    pub kind: AttributeKind,
    pub index: usize,
}

/// One row. Discrete values hold the domain index as `f64`; `None` is a
/// missing measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub values: Vec<Option<f64>>,
    pub class: usize,
}

impl Case {
    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    name: String,
    attributes: Vec<AttributeMeta>,
    classes: Vec<String>,
    cases: Vec<Case>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        attributes: Vec<AttributeMeta>,
        classes: Vec<String>,
        cases: Vec<Case>,
    ) -> Result<Self, DataError> {
        let mut names = HashSet::new();
        for (i, a) in attributes.iter().enumerate() {
            if a.index != i {
                return Err(DataError::Invalid(format!(
                    "attribute {} has index {}, expected {i}",
                    a.name, a.index
                )));
            }
            if !names.insert(a.name.as_str()) {
                return Err(DataError::Invalid(format!(
                    "duplicate attribute {}",
                    a.name
                )));
            }
            if let AttributeKind::Discrete(values) = &a.kind {
                if values.len() < 2 {
                    return Err(DataError::Invalid(format!(
                        "discrete attribute {} needs at least two values",
                        a.name
                    )));
                }
            }
        }
        if classes.is_empty() {
            return Err(DataError::Invalid("no classes declared".into()));
        }
        for (row, case) in cases.iter().enumerate() {
            if case.values.len() != attributes.len() {
                return Err(DataError::Invalid(format!(
                    "case {row} has {} values for {} attributes",
                    case.values.len(),
                    attributes.len()
                )));
            }
            if case.class >= classes.len() {
                return Err(DataError::Invalid(format!(
                    "case {row} has undeclared class"
                )));
            }
            for (a, v) in attributes.iter().zip(&case.values) {
                if let (AttributeKind::Discrete(values), Some(v)) = (&a.kind, v) {
                    if v.fract() != 0.0 || *v < 0.0 || *v as usize >= values.len() {
                        return Err(DataError::Invalid(format!(
                            "case {row}: {v} outside the domain of {}",
                            a.name
                        )));
                    }
                }
            }
        }
        Ok(Dataset {
            name: name.into(),
            attributes,
            classes,
            cases,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn attributes(&self) -> &[AttributeMeta] {
        &self.attributes
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn cases(&self) -> &[Case] {
        &self.cases
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn missing_count(&self) -> usize {
        self.cases
            .iter()
            .map(|c| c.values.iter().filter(|v| v.is_none()).count())
            .sum()
    }

    /// Same schema, cases at `rows` in the given order.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            attributes: self.attributes.clone(),
            classes: self.classes.clone(),
            cases: rows.iter().map(|&r| self.cases[r].clone()).collect(),
        }
    }

    pub fn with_cases(&self, cases: Vec<Case>) -> Result<Dataset, DataError> {
        Dataset::new(
            self.name.clone(),
            self.attributes.clone(),
            self.classes.clone(),
            cases,
        )
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for c in &self.cases {
            counts[c.class] += 1;
        }
        counts
    }
}

// ---------------------------------------------------------------------------
// Descriptor files

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnSpec {
    Continuous {
        name: String,
    },
    Discrete {
        name: String,
        values: Vec<String>,
    },
    /// The class column. With `threshold`, a numeric column is binarized:
    /// values below it map to `classes[0]`, the rest to `classes[1]`.
    Class {
        name: String,
        classes: Vec<String>,
        #[serde(default)]
        threshold: Option<f64>,
    },
    Ignore {
        name: String,
    },
}

/// Describes the layout of a delimited data file.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct DatasetDescriptor {
    pub name: String,
    #[serde(default)]
    pub title: Option<String>,
    /// Data file, relative to the descriptor's directory.
    pub file: String,
    /// A single delimiter character, or `"whitespace"`.
    #[serde(default = "default_delimiter")]
    pub delimiter: String,
    #[serde(default = "default_missing")]
    pub missing: String,
    /// Remove every case with a missing value after loading.
    #[serde(default)]
    pub drop_incomplete: bool,
    /// Fill missing values by nearest neighbour after loading.
    #[serde(default)]
    pub impute: bool,
    pub columns: Vec<ColumnSpec>,
}

fn default_delimiter() -> String {
    ",".into()
}

fn default_missing() -> String {
    "?".into()
}

impl DatasetDescriptor {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self, DataError> {
        let d: DatasetDescriptor = toml::from_str(text).map_err(|e| DataError::Descriptor {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        d.validate(origin)?;
        Ok(d)
    }

    pub fn from_file(path: &Path) -> Result<Self, DataError> {
        let text = fs::read_to_string(path).map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, path)
    }

    fn validate(&self, origin: &Path) -> Result<(), DataError> {
        let bad = |message: String| DataError::Descriptor {
            path: origin.to_path_buf(),
            message,
        };
        let class_cols = self
            .columns
            .iter()
            .filter(|c| matches!(c, ColumnSpec::Class { .. }))
            .count();
        if class_cols != 1 {
            return Err(bad(format!(
                "expected one class column, found {class_cols}"
            )));
        }
        if let Some(ColumnSpec::Class {
            classes, threshold, ..
        }) = self
            .columns
            .iter()
            .find(|c| matches!(c, ColumnSpec::Class { .. }))
        {
            if threshold.is_some() && classes.len() != 2 {
                return Err(bad("a class threshold needs exactly two classes".into()));
            }
        }
        if self.delimiter != "whitespace" && self.delimiter.chars().count() != 1 {
            return Err(bad(format!("unsupported delimiter {:?}", self.delimiter)));
        }
        Ok(())
    }

    fn split_line<'a>(&self, line: &'a str) -> Vec<&'a str> {
        if self.delimiter == "whitespace" {
            line.split_whitespace().collect()
        } else {
            let d = self.delimiter.chars().next().unwrap_or(',');
            line.split(d).map(str::trim).collect()
        }
    }

    fn attributes(&self) -> Vec<AttributeMeta> {
        let mut out = Vec::new();
        for c in &self.columns {
            let (name, kind) = match c {
                ColumnSpec::Continuous { name } => (name, AttributeKind::Continuous),
                ColumnSpec::Discrete { name, values } => {
                    (name, AttributeKind::Discrete(values.clone()))
                }
                _ => continue,
            };
            out.push(AttributeMeta {
                name: name.clone(),
                kind,
                index: out.len(),
            });
        }
        out
    }

    /// Parses data text laid out per this descriptor. Missing markers are
    /// preserved; `drop_incomplete` / `impute` are applied by
    /// [`DatasetDescriptor::prepare`].
    pub fn parse(&self, text: &str) -> Result<Dataset, DataError> {
        let attributes = self.attributes();
        let (classes, threshold) = self
            .columns
            .iter()
            .find_map(|c| match c {
                ColumnSpec::Class {
                    classes, threshold, ..
                } => Some((classes.clone(), *threshold)),
                _ => None,
            })
            .expect("validated descriptor has a class column");

        let mut cases = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line_no = lineno + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields = self.split_line(line);
            if fields.len() != self.columns.len() {
                return Err(DataError::Arity {
                    line: line_no,
                    expected: self.columns.len(),
                    found: fields.len(),
                });
            }
            let mut values = Vec::with_capacity(attributes.len());
            let mut class = None;
            for (spec, raw) in self.columns.iter().zip(fields) {
                let missing = raw == self.missing;
                match spec {
                    ColumnSpec::Ignore { .. } => {}
                    ColumnSpec::Continuous { name } => {
                        if missing {
                            values.push(None);
                        } else {
                            let v = parse_number(raw).ok_or_else(|| DataError::Value {
                                line: line_no,
                                column: name.clone(),
                                value: raw.to_string(),
                            })?;
                            values.push(Some(v));
                        }
                    }
                    ColumnSpec::Discrete {
                        name,
                        values: domain,
                    } => {
                        if missing {
                            values.push(None);
                        } else {
                            let idx = match_token(raw, domain).ok_or_else(|| DataError::Value {
                                line: line_no,
                                column: name.clone(),
                                value: raw.to_string(),
                            })?;
                            values.push(Some(idx as f64));
                        }
                    }
                    ColumnSpec::Class { .. } => {
                        let unknown = || DataError::UnknownClass {
                            line: line_no,
                            label: raw.to_string(),
                        };
                        if missing {
                            return Err(unknown());
                        }
                        class = Some(match threshold {
                            Some(t) => {
                                let v = parse_number(raw).ok_or_else(unknown)?;
                                usize::from(v >= t)
                            }
                            None => match_token(raw, &classes).ok_or_else(unknown)?,
                        });
                    }
                }
            }
            cases.push(Case {
                values,
                class: class.expect("class column present"),
            });
        }
        if cases.is_empty() {
            return Err(DataError::Empty(self.name.clone()));
        }
        Dataset::new(self.name.clone(), attributes, classes, cases)
    }

    /// Applies the descriptor's missing-value policy.
    pub fn prepare(&self, raw: Dataset) -> Result<Dataset, DataError> {
        let d = if self.drop_incomplete {
            drop_missing_cases(&raw)
        } else {
            raw
        };
        if self.impute && d.missing_count() > 0 {
            impute_nearest_neighbor(&d)
        } else {
            Ok(d)
        }
    }
}

fn parse_number(raw: &str) -> Option<f64> {
    raw.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn match_token(raw: &str, domain: &[String]) -> Option<usize> {
    if let Some(i) = domain.iter().position(|d| d == raw) {
        return Some(i);
    }
    let v = parse_number(raw)?;
    domain
        .iter()
        .position(|d| parse_number(d).is_some_and(|dv| dv == v))
}

/// Reads the data file at `path` using `descriptor`, keeping missing markers.
pub fn load_dataset(path: &Path, descriptor: &DatasetDescriptor) -> Result<Dataset, DataError> {
    let text = fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    descriptor.parse(&text)
}

// ---------------------------------------------------------------------------
// Missing values

pub fn drop_missing_cases(d: &Dataset) -> Dataset {
    Dataset {
        name: d.name.clone(),
        attributes: d.attributes.clone(),
        classes: d.classes.clone(),
        cases: d
            .cases
            .iter()
            .filter(|c| c.is_complete())
            .cloned()
            .collect(),
    }
}

/// Single nearest neighbour imputation over min-max normalized attributes.
///
/// Per-attribute distance is the absolute normalized difference for
/// continuous attributes, 0/1 mismatch for discrete ones, and 1 whenever
/// either side is missing. Each missing value is copied from the closest
/// other case that has it (ties to the lower row index), measured on the
/// original, un-imputed values.
pub fn impute_nearest_neighbor(d: &Dataset) -> Result<Dataset, DataError> {
    if d.missing_count() == 0 {
        return Ok(d.clone());
    }
    if d.len() < 2 {
        return Err(DataError::Invalid(
            "imputation needs at least two cases".into(),
        ));
    }
    let n_attr = d.attributes.len();
    let ranges: Vec<Option<(f64, f64)>> = (0..n_attr)
        .map(|a| {
            if !d.attributes[a].kind.is_continuous() {
                return None;
            }
            let mut it = d.cases.iter().filter_map(|c| c.values[a]);
            let first = it.next()?;
            Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
        })
        .collect();

    let distance = |x: &Case, y: &Case| -> f64 {
        (0..n_attr)
            .map(|a| match (x.values[a], y.values[a]) {
                (Some(u), Some(v)) => match ranges[a] {
                    Some((lo, hi)) if hi > lo => ((u - v) / (hi - lo)).abs(),
                    Some(_) => 0.0,
                    None => f64::from(u8::from(u != v)),
                },
                _ => 1.0,
            })
            .sum()
    };

    let mut cases = d.cases.clone();
    for (i, case) in d.cases.iter().enumerate() {
        if case.is_complete() {
            continue;
        }
        let mut neighbours: Vec<(f64, usize)> = d
            .cases
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, other)| (distance(case, other), j))
            .collect();
        neighbours.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for a in (0..n_attr).filter(|&a| case.values[a].is_none()) {
            let value = neighbours
                .iter()
                .find_map(|&(_, j)| d.cases[j].values[a])
                .ok_or_else(|| DataError::Unimputable {
                    attribute: d.attributes[a].name.clone(),
                })?;
            cases[i].values[a] = Some(value);
        }
    }
    d.with_cases(cases)
}

// ---------------------------------------------------------------------------
// Splits

#[derive(Clone, Debug)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
}

/// Row indices shuffled by Fisher-Yates driven by ChaCha8 seeded with
/// `seed`; bounded draws use the high 64 bits of `u64 * bound`.
pub fn shuffled_rows(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = ((u128::from(rng.next_u64()) * (i as u128 + 1)) >> 64) as usize;
        rows.swap(i, j);
    }
    rows
}

/// Partitions `0..n` into (`first_len` rows, the rest), each side in
/// ascending order.
pub fn partition_rows(n: usize, first_len: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let rows = shuffled_rows(n, seed);
    let (a, b) = rows.split_at(first_len.min(n));
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    (a, b)
}

/// Training-set size for a two-thirds split, rounded to nearest.
pub fn two_thirds(n: usize) -> usize {
    (2 * n + 1) / 3
}

/// Sub-training size for a half split; the extra case of an odd set goes to
/// the sub-training side.
pub fn half(n: usize) -> usize {
    n.div_ceil(2)
}

pub fn random_split(d: &Dataset, seed: u64) -> SplitPair {
    let (train, test) = partition_rows(d.len(), two_thirds(d.len()), seed);
    SplitPair {
        train: d.subset(&train),
        test: d.subset(&test),
        seed,
    }
}

pub fn sub_split(train: &Dataset, seed: u64) -> SplitPair {
    let (a, b) = partition_rows(train.len(), half(train.len()), seed);
    SplitPair {
        train: train.subset(&a),
        test: train.subset(&b),
        seed,
    }
}

/// Fraction of cases in each class.
pub fn class_frequencies(d: &Dataset) -> Vec<f64> {
    let n = d.len().max(1) as f64;
    d.class_counts().into_iter().map(|c| c as f64 / n).collect()
}
