//! Dataset directories: a data file, its descriptor and its cost file.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::data::{load_dataset, DataError, Dataset, DatasetDescriptor};
use crate::money::Money;
use crate::schema::{CostMatrix, CostSpec, SchemaError, TestCostSchema};

/// The bundled benchmark directories, in report order.
pub const BENCHMARKS: [&str; 5] = ["bupa", "heart", "hepatitis", "pima", "thyroid"];

pub const DESCRIPTOR_FILE: &str = "descriptor.toml";
pub const COSTS_FILE: &str = "costs.toml";

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("missing data file {0}")]
    MissingFile(PathBuf),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

/// `ICET_DATA_DIR` if set, otherwise the repository's `data/` directory.
pub fn default_data_dir() -> PathBuf {
    std::env::var_os("ICET_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

/// A prepared dataset with its test costs and matrix template.
#[derive(Clone, Debug)]
pub struct Problem {
    pub name: String,
    pub descriptor: DatasetDescriptor,
    /// Cases as read from disk, before dropping or imputing.
    pub raw: Dataset,
    pub dataset: Dataset,
    pub schema: TestCostSchema,
    pub costs: CostSpec,
}

impl Problem {
    /// Loads `dir/descriptor.toml`, the data file it names and
    /// `dir/costs.toml`.
    pub fn load(dir: &Path) -> Result<Problem, ProblemError> {
        let descriptor = DatasetDescriptor::from_file(&dir.join(DESCRIPTOR_FILE))?;
        let data_path = dir.join(&descriptor.file);
        if !data_path.is_file() {
            return Err(ProblemError::MissingFile(data_path));
        }
        let raw = load_dataset(&data_path, &descriptor)?;
        let dataset = descriptor.prepare(raw.clone())?;
        let costs = CostSpec::from_file(&dir.join(COSTS_FILE))?;
        let schema = costs.schema_for(&dataset)?;
        Ok(Problem {
            name: descriptor.name.clone(),
            descriptor,
            raw,
            dataset,
            schema,
            costs,
        })
    }

    pub fn load_named(data_dir: &Path, name: &str) -> Result<Problem, ProblemError> {
        Self::load(&data_dir.join(name))
    }

    /// Matrix with the given positive- and negative-error costs.
    pub fn matrix(&self, positive: Money, negative: Money) -> Result<CostMatrix, SchemaError> {
        self.costs
            .matrix
            .instantiate(&self.dataset, positive, negative)
    }

    /// Matrix with both error costs equal to `k`.
    pub fn simple_matrix(&self, k: Money) -> Result<CostMatrix, SchemaError> {
        self.matrix(k, k)
    }
}
