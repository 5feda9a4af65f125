//! Experiment harness for the cost-sensitive tree learners: canonical
//! splits, every learner on every cost setting, summaries and plots.

use std::path::PathBuf;

use thiserror::Error;

pub mod config;
pub mod experiment;
pub mod output;
pub mod summary;

pub use config::{Algorithm, ExperimentConfig, IcetSetting, MatrixMode, Scale, Variant};
pub use experiment::{run_experiment, ExperimentRun, ResultRow};
pub use output::emit_outputs;
pub use summary::{summarize, SummaryLine, Window};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no result rows")]
    NoRows,
    #[error(transparent)]
    Problem(#[from] icet_core::ProblemError),
    #[error(transparent)]
    Schema(#[from] icet_core::schema::SchemaError),
    #[error(transparent)]
    Tree(#[from] icet_core::tree::TreeError),
    #[error(transparent)]
    Cost(#[from] icet_core::cost::CostError),
    #[error(transparent)]
    Search(#[from] icet_core::search::SearchError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("plotting {path}: {message}")]
    Plot { path: PathBuf, message: String },
}
