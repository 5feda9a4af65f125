//! Cost-sensitive decision tree induction.
//!
//! Trees are grown top-down with a choice of selection heuristic and scored
//! by the full cost of using them: test prices (with shared group costs and
//! delayed results) plus misclassification penalties. A genetic search over
//! per-attribute pseudo-costs tunes the inducer's bias for a given cost
//! setting.

pub mod benchmark;
pub mod cost;
pub mod data;
pub mod money;
pub mod schema;
pub mod search;
pub mod tree;

pub use benchmark::{Problem, ProblemError};
pub use cost::{case_cost, standard_cost, CostLedger, EvaluationReport};
pub use data::{Case, Dataset};
pub use money::Money;
pub use schema::{CostMatrix, TestCostSchema};
pub use tree::{DecisionTree, InductionParams};
