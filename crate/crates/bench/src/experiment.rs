//! Runs every (dataset, learner, matrix, split) cell of a configuration.

use std::time::Instant;

use icet_core::benchmark::Problem;
use icet_core::cost::{standard_cost, total_cost};
use icet_core::data::{partition_rows, two_thirds};
use icet_core::schema::{CostMatrix, TestCostSchema};
use icet_core::search::{icet, GaConfig, SearchContext};
use icet_core::tree::{DecisionTree, Heuristic, Inducer, InductionParams};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Algorithm, Axis, ExperimentConfig, IcetSetting, MatrixMode};
use crate::BenchError;

/// Confidence factor used by every non-evolved learner.
pub const DEFAULT_CF: f64 = 25.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub algorithm: String,
    pub axis: Axis,
    /// Error cost, cost ratio or test-set error cost, depending on `axis`.
    pub x: f64,
    pub split: usize,
    pub average_cost: f64,
    pub normalized_cost_pct: f64,
    pub test_expenditure_pct: f64,
    pub error_rate_pct: f64,
    /// Seconds spent inducing the tree the row evaluates.
    #[serde(default)]
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaLogRow {
    pub dataset: String,
    pub algorithm: String,
    /// Index of the training matrix within the configuration.
    pub train_matrix: usize,
    pub split: usize,
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_so_far: f64,
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentRun {
    pub rows: Vec<ResultRow>,
    pub ga_log: Vec<GaLogRow>,
}

/// Seed of canonical split `split`; independent of the dataset so every
/// dataset sees the same seed sequence.
pub fn split_seed(seed: u64, split: usize) -> u64 {
    derive(seed, split as u64)
}

/// The canonical (train, test) row partitions of an `n`-case dataset.
pub fn canonical_splits(n: usize, seed: u64, splits: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    (0..splits)
        .map(|s| partition_rows(n, two_thirds(n), split_seed(seed, s)))
        .collect()
}

fn derive(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

fn name_key(name: &str) -> u64 {
    // FNV-1a; only needs to be stable across runs.
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Genetic-search seed for one dataset, split and training matrix. Shared by
/// all search settings so they start from the same random population.
pub fn search_seed(seed: u64, dataset: &str, split: usize, train_matrix: usize) -> u64 {
    let s = derive(seed ^ name_key(dataset), 1 << 32 | split as u64);
    derive(s, train_matrix as u64 + 1)
}

/// Schema after applying the configuration's environment changes.
pub fn effective_schema(problem: &Problem, cfg: &ExperimentConfig) -> TestCostSchema {
    let mut schema = problem.schema.clone();
    if cfg.all_immediate {
        schema = schema.all_immediate();
    }
    if cfg.no_group_discounts {
        schema = schema.without_group_discounts();
    }
    schema
}

/// Parameters of a learner that ignores the classification matrix.
pub fn fixed_params(
    algorithm: Algorithm,
    schema: &TestCostSchema,
) -> Result<InductionParams, BenchError> {
    let usable = schema.usable();
    let costs: Vec<f64> = schema
        .true_costs()
        .iter()
        .enumerate()
        .map(|(a, &c)| if usable.contains(&a) { c } else { 1.0 })
        .collect();
    let heuristic = match algorithm {
        Algorithm::Eg2 => Heuristic::icf(costs, 1.0),
        Algorithm::CsId3 => Heuristic::cs_id3(costs),
        Algorithm::Idx => Heuristic::idx(costs),
        Algorithm::C45 => Ok(Heuristic::GainRatio),
        Algorithm::Icet => {
            return Err(BenchError::Config("ICET has no fixed parameters".into()));
        }
    }
    .map_err(|e| BenchError::Config(e.to_string()))?;
    let excluded = (0..schema.len()).filter(|a| !usable.contains(a));
    Ok(InductionParams::new(heuristic, DEFAULT_CF).with_excluded(excluded))
}

struct Column {
    x: f64,
    train: usize,
    test: CostMatrix,
    standard: icet_core::Money,
}

struct Plan {
    trains: Vec<CostMatrix>,
    columns: Vec<Column>,
}

fn plan(problem: &Problem, schema: &TestCostSchema, mode: &MatrixMode) -> Result<Plan, BenchError> {
    let mut trains = Vec::new();
    let mut cols = Vec::new();
    match mode {
        MatrixMode::Simple(costs) => {
            for (i, &k) in costs.iter().enumerate() {
                let m = problem.simple_matrix(k)?;
                trains.push(m.clone());
                cols.push((k.dollars(), i, m));
            }
        }
        MatrixMode::Ratio(pairs) => {
            for (i, &(ratio, negative, positive)) in pairs.iter().enumerate() {
                let m = problem.matrix(positive, negative)?;
                trains.push(m.clone());
                cols.push((ratio, i, m));
            }
        }
        MatrixMode::Mismatch { train, test } => {
            trains.push(problem.simple_matrix(*train)?);
            for &k in test {
                cols.push((k.dollars(), 0, problem.simple_matrix(k)?));
            }
        }
    }
    let columns = cols
        .into_iter()
        .map(|(x, train, test)| {
            let standard = standard_cost(&problem.dataset, schema, &test)?;
            Ok(Column {
                x,
                train,
                test,
                standard,
            })
        })
        .collect::<Result<_, BenchError>>()?;
    Ok(Plan { trains, columns })
}

struct Prepared {
    problem: Problem,
    schema: TestCostSchema,
    inducer: Inducer,
    splits: Vec<(Vec<usize>, Vec<usize>)>,
    plan: Plan,
}

#[derive(Clone, Copy)]
enum Learner<'a> {
    Fixed(Algorithm),
    Search(&'a IcetSetting, usize),
}

struct Job<'a> {
    data: &'a Prepared,
    split: usize,
    learner: Learner<'a>,
}

fn ga_for(cfg: &ExperimentConfig, setting: &IcetSetting, rng_seed: u64) -> GaConfig {
    GaConfig {
        crossover_rate: setting.crossover_rate,
        mutation_rate: setting.mutation_rate,
        mode: setting.mode,
        seed_with_true_costs: setting.seeded,
        rng_seed,
        ..cfg.ga.clone()
    }
}

fn run_job(job: &Job<'_>, cfg: &ExperimentConfig) -> Result<ExperimentRun, BenchError> {
    let data = job.data;
    let name = data.problem.name.as_str();
    let (train, test) = &data.splits[job.split];
    let start = Instant::now();
    let mut out = ExperimentRun::default();
    let (label, tree, train_filter): (String, DecisionTree, Option<usize>) = match job.learner {
        Learner::Fixed(algorithm) => {
            let params = fixed_params(algorithm, &data.schema)?;
            let tree = data.inducer.induce(train, &params)?;
            (algorithm.label().to_string(), tree, None)
        }
        Learner::Search(setting, t) => {
            let ctx = SearchContext {
                dataset: &data.problem.dataset,
                inducer: &data.inducer,
                train: train.clone(),
                schema: &data.schema,
                matrix: &data.plan.trains[t],
                min_cases: cfg.ga.min_cases,
            };
            let seed = search_seed(cfg.seed, name, job.split, t);
            let run = icet(&ctx, &ga_for(cfg, setting, seed))?;
            out.ga_log.extend(run.log.iter().map(|g| GaLogRow {
                dataset: name.to_string(),
                algorithm: setting.label.clone(),
                train_matrix: t,
                split: job.split,
                generation: g.generation,
                best_fitness: g.best_fitness,
                mean_fitness: g.mean_fitness,
                best_so_far: g.best_so_far,
            }));
            (setting.label.clone(), run.tree, Some(t))
        }
    };
    let wall_time = start.elapsed().as_secs_f64();
    let cases = data.problem.dataset.cases();
    let all_tests = data.schema.total_test_cost();
    for col in &data.plan.columns {
        if train_filter.is_some_and(|t| t != col.train) {
            continue;
        }
        let totals = total_cost(&tree, test.iter().map(|&i| &cases[i]), &data.schema, &col.test)?;
        let report = totals.report(col.standard, all_tests);
        out.rows.push(ResultRow {
            dataset: name.to_string(),
            algorithm: label.clone(),
            axis: cfg.matrix.axis(),
            x: col.x,
            split: job.split,
            average_cost: report.average_cost,
            normalized_cost_pct: report.normalized_cost_pct,
            test_expenditure_pct: report.test_expenditure_pct,
            error_rate_pct: report.error_rate_pct,
            wall_time,
        });
    }
    Ok(out)
}

/// Loads every selected dataset, failing on the first one missing.
pub fn load_problems(cfg: &ExperimentConfig) -> Result<Vec<Problem>, BenchError> {
    cfg.datasets
        .iter()
        .map(|name| Problem::load_named(&cfg.data_dir, name).map_err(BenchError::from))
        .collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun, BenchError> {
    cfg.validate()?;
    let problems = load_problems(cfg)?;
    run_on_problems(cfg, problems)
}

/// Runs `cfg` on already loaded problems; `cfg.datasets` is ignored.
pub fn run_on_problems(
    cfg: &ExperimentConfig,
    problems: Vec<Problem>,
) -> Result<ExperimentRun, BenchError> {
    cfg.validate()?;
    let prepared = problems
        .into_iter()
        .map(|problem| {
            let schema = effective_schema(&problem, cfg);
            let plan = plan(&problem, &schema, &cfg.matrix)?;
            let inducer = Inducer::new(&problem.dataset)?;
            let splits = canonical_splits(problem.dataset.len(), cfg.seed, cfg.splits);
            Ok(Prepared {
                problem,
                schema,
                inducer,
                splits,
                plan,
            })
        })
        .collect::<Result<Vec<_>, BenchError>>()?;

    let mut jobs = Vec::new();
    for data in &prepared {
        for split in 0..cfg.splits {
            for &algorithm in &cfg.algorithms {
                if algorithm == Algorithm::Icet {
                    for setting in &cfg.icet {
                        for t in 0..data.plan.trains.len() {
                            jobs.push(Job {
                                data,
                                split,
                                learner: Learner::Search(setting, t),
                            });
                        }
                    }
                } else {
                    jobs.push(Job {
                        data,
                        split,
                        learner: Learner::Fixed(algorithm),
                    });
                }
            }
        }
    }
    let parts = jobs
        .par_iter()
        .map(|job| run_job(job, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let mut run = ExperimentRun::default();
    for p in parts {
        run.rows.extend(p.rows);
        run.ga_log.extend(p.ga_log);
    }
    sort_rows(&mut run.rows);
    run.ga_log.sort_by(|a, b| {
        (&a.dataset, &a.algorithm, a.train_matrix, a.split, a.generation).cmp(&(
            &b.dataset,
            &b.algorithm,
            b.train_matrix,
            b.split,
            b.generation,
        ))
    });
    Ok(run)
}

/// Canonical row order: dataset, algorithm, x, split.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.dataset
            .cmp(&b.dataset)
            .then_with(|| a.algorithm.cmp(&b.algorithm))
            .then_with(|| a.x.total_cmp(&b.x))
            .then_with(|| a.split.cmp(&b.split))
    });
}
