//! Experiment configuration: which datasets, learners, matrices and scale.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use icet_core::benchmark::{default_data_dir, BENCHMARKS};
use icet_core::search::{GaConfig, SearchMode};
use icet_core::Money;
use serde::{Deserialize, Serialize};

use crate::BenchError;

pub const DEFAULT_ERROR_COSTS: [f64; 7] = [10.0, 50.0, 100.0, 500.0, 1000.0, 5000.0, 10000.0];

/// Ratio of negative to positive error cost with the (negative, positive)
/// dollar amounts used for it.
pub const RATIO_PAIRS: [(f64, f64, f64); 7] = [
    (0.125, 50.0, 400.0),
    (0.25, 50.0, 200.0),
    (0.5, 50.0, 100.0),
    (1.0, 50.0, 50.0),
    (2.0, 100.0, 50.0),
    (4.0, 200.0, 50.0),
    (8.0, 400.0, 50.0),
];

pub const MISMATCH_TRAIN: f64 = 100.0;
pub const MISMATCH_TEST: [f64; 3] = [50.0, 100.0, 500.0];
pub const MUTATION_ONLY_RATES: [f64; 3] = [0.05, 0.10, 0.15];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    Icet,
    Eg2,
    CsId3,
    Idx,
    C45,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Icet,
        Algorithm::Eg2,
        Algorithm::CsId3,
        Algorithm::Idx,
        Algorithm::C45,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Icet => "ICET",
            Algorithm::Eg2 => "EG2",
            Algorithm::CsId3 => "CS-ID3",
            Algorithm::Idx => "IDX",
            Algorithm::C45 => "C4.5",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "icet" => Ok(Algorithm::Icet),
            "eg2" => Ok(Algorithm::Eg2),
            "csid3" => Ok(Algorithm::CsId3),
            "idx" => Ok(Algorithm::Idx),
            "c45" => Ok(Algorithm::C45),
            _ => Err(BenchError::Config(format!("unknown algorithm {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Scale {
    Full,
    Desk,
}

impl Scale {
    pub fn splits(self) -> usize {
        match self {
            Scale::Full => 10,
            Scale::Desk => 3,
        }
    }

    pub fn ga(self) -> GaConfig {
        match self {
            Scale::Full => GaConfig::default(),
            Scale::Desk => GaConfig::desk(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Variant {
    Baseline,
    NoDelay,
    NoDiscount,
    Ratios,
    Mismatch,
    Seeded,
    Binary,
    MutationOnly,
}

/// How the classification matrix is built for each column of results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum MatrixMode {
    /// One simple matrix per error cost.
    Simple(Vec<Money>),
    /// Each entry is (ratio, negative cost, positive cost).
    Ratio(Vec<(f64, Money, Money)>),
    /// Train at one simple cost, evaluate at several.
    Mismatch { train: Money, test: Vec<Money> },
}

impl MatrixMode {
    pub fn axis(&self) -> Axis {
        match self {
            MatrixMode::Simple(_) => Axis::ErrorCost,
            MatrixMode::Ratio(_) => Axis::Ratio,
            MatrixMode::Mismatch { .. } => Axis::TestErrorCost,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    ErrorCost,
    Ratio,
    TestErrorCost,
}

impl Axis {
    pub fn title(self) -> &'static str {
        match self {
            Axis::ErrorCost => "Cost of misclassification error",
            Axis::Ratio => "Ratio of negative to positive error cost",
            Axis::TestErrorCost => "Test-set misclassification error cost",
        }
    }
}

/// One genetic-search configuration, reported under its own label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IcetSetting {
    pub label: String,
    pub mode: SearchMode,
    pub seeded: bool,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
}

impl IcetSetting {
    pub fn standard() -> Self {
        let ga = GaConfig::default();
        IcetSetting {
            label: "ICET".into(),
            mode: SearchMode::Real,
            seeded: false,
            crossover_rate: ga.crossover_rate,
            mutation_rate: ga.mutation_rate,
        }
    }

    pub fn seeded() -> Self {
        IcetSetting {
            label: "ICET-seeded".into(),
            seeded: true,
            ..Self::standard()
        }
    }

    pub fn binary() -> Self {
        IcetSetting {
            label: "ICET-binary".into(),
            mode: SearchMode::Binary,
            ..Self::standard()
        }
    }

    pub fn mutation_only(rate: f64) -> Self {
        IcetSetting {
            label: format!("ICET-mut{rate:.2}"),
            crossover_rate: 0.0,
            mutation_rate: rate,
            ..Self::standard()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub datasets: Vec<String>,
    pub algorithms: Vec<Algorithm>,
    /// Searches run when `algorithms` contains ICET.
    pub icet: Vec<IcetSetting>,
    pub matrix: MatrixMode,
    pub splits: usize,
    pub seed: u64,
    pub all_immediate: bool,
    pub no_group_discounts: bool,
    pub ga: GaConfig,
    pub data_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::new(Variant::Baseline, Scale::Full)
    }
}

fn dollars(values: &[f64]) -> Vec<Money> {
    values
        .iter()
        .map(|&v| Money::from_dollars(v).expect("finite constant"))
        .collect()
}

impl ExperimentConfig {
    pub fn new(variant: Variant, scale: Scale) -> Self {
        let mut cfg = ExperimentConfig {
            datasets: BENCHMARKS.iter().map(|s| s.to_string()).collect(),
            algorithms: Algorithm::ALL.to_vec(),
            icet: vec![IcetSetting::standard()],
            matrix: MatrixMode::Simple(dollars(&DEFAULT_ERROR_COSTS)),
            splits: scale.splits(),
            seed: 1,
            all_immediate: false,
            no_group_discounts: false,
            ga: scale.ga(),
            data_dir: default_data_dir(),
        };
        match variant {
            Variant::Baseline => {}
            Variant::NoDelay => cfg.all_immediate = true,
            Variant::NoDiscount => cfg.no_group_discounts = true,
            Variant::Ratios => {
                cfg.matrix = MatrixMode::Ratio(
                    RATIO_PAIRS
                        .iter()
                        .map(|&(r, neg, pos)| (r, dollars(&[neg])[0], dollars(&[pos])[0]))
                        .collect(),
                );
            }
            Variant::Mismatch => {
                cfg.matrix = MatrixMode::Mismatch {
                    train: dollars(&[MISMATCH_TRAIN])[0],
                    test: dollars(&MISMATCH_TEST),
                };
            }
            Variant::Seeded => cfg.icet.push(IcetSetting::seeded()),
            Variant::Binary => cfg.icet.push(IcetSetting::binary()),
            Variant::MutationOnly => cfg
                .icet
                .extend(MUTATION_ONLY_RATES.iter().map(|&r| IcetSetting::mutation_only(r))),
        }
        cfg
    }

    /// Replaces the error costs of a simple-matrix configuration.
    pub fn with_error_costs(mut self, costs: Vec<Money>) -> Self {
        if let MatrixMode::Simple(_) = self.matrix {
            self.matrix = MatrixMode::Simple(costs);
        }
        self
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::Config(m));
        if self.datasets.is_empty() {
            return bad("no datasets selected".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms selected".into());
        }
        if self.splits == 0 {
            return bad("splits must be positive".into());
        }
        if self.algorithms.contains(&Algorithm::Icet) && self.icet.is_empty() {
            return bad("ICET selected without a search setting".into());
        }
        let empty = match &self.matrix {
            MatrixMode::Simple(v) => v.is_empty(),
            MatrixMode::Ratio(v) => v.is_empty(),
            MatrixMode::Mismatch { test, .. } => test.is_empty(),
        };
        if empty {
            return bad("no error costs selected".into());
        }
        Ok(())
    }
}
