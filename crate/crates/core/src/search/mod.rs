//! Genetic search over induction biases.
//!
//! An individual encodes one pseudo-cost per usable attribute plus the ICF
//! exponent and the pruning confidence. Each trial induces a tree on half of
//! the training set under the decoded bias and scores it by average cost on
//! the other half; the fittest bias is then applied to the full training set.

mod gray;

pub use gray::{gray_decode, gray_encode};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{total_cost, CostError};
use crate::data::{half, partition_rows, Dataset};
use crate::schema::{CostMatrix, TestCostSchema};
use crate::tree::{DecisionTree, Heuristic, Inducer, InductionParams, TreeError};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("{value} does not fit in a {width}-bit code")]
    GrayRange { value: u32, width: usize },
    #[error("genome has {got} bits, expected {expected}")]
    GenomeLength { expected: usize, got: usize },
    #[error("need at least two training cases, got {0}")]
    TooFewCases(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Cost(#[from] CostError),
}

pub const COST_BITS: usize = 12;
pub const PARAM_BITS: usize = 8;
pub const MIN_PSEUDO_COST: f64 = 1.0;
pub const MAX_PSEUDO_COST: f64 = 10_000.0;
/// Attributes whose pseudo-cost exceeds this are withheld from induction.
pub const EXCLUSION_THRESHOLD: f64 = 9_000.0;

const COST_CODES: f64 = ((1u32 << COST_BITS) - 1) as f64;
const PARAM_CODES: f64 = ((1u32 << PARAM_BITS) - 1) as f64;

pub fn pseudo_cost_from_code(code: u32) -> f64 {
    MIN_PSEUDO_COST + (f64::from(code) * (MAX_PSEUDO_COST - MIN_PSEUDO_COST) / COST_CODES).round()
}

pub fn omega_from_code(code: u32) -> f64 {
    f64::from(code) / PARAM_CODES
}

pub fn cf_from_code(code: u32) -> f64 {
    1.0 + f64::from(code) * 99.0 / PARAM_CODES
}

pub fn is_excluded(pseudo_cost: f64) -> bool {
    pseudo_cost > EXCLUSION_THRESHOLD
}

fn nearest_code(value: f64, lo: f64, hi: f64, codes: f64) -> u32 {
    ((value.clamp(lo, hi) - lo) * codes / (hi - lo)).round() as u32
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchMode {
    /// 12 bits of pseudo-cost per attribute, then ω and CF.
    Real,
    /// One inclusion bit per attribute, then ω and CF; induction uses the
    /// true no-discount costs.
    Binary,
}

pub fn genome_len(mode: SearchMode, n: usize) -> usize {
    match mode {
        SearchMode::Real => COST_BITS * n + 2 * PARAM_BITS,
        SearchMode::Binary => n + 2 * PARAM_BITS,
    }
}

/// Decoded bias over the `n` searchable attributes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bias {
    pub costs: Vec<f64>,
    pub omega: f64,
    pub cf: f64,
    pub excluded: Vec<bool>,
}

fn decode_params(bits: &[bool]) -> (f64, f64) {
    let omega = omega_from_code(gray_decode(&bits[..PARAM_BITS]));
    let cf = cf_from_code(gray_decode(&bits[PARAM_BITS..2 * PARAM_BITS]));
    (omega, cf)
}

/// Decodes a real-mode genome of `12n + 16` bits.
pub fn decode_individual(bits: &[bool], n: usize) -> Result<Bias, SearchError> {
    check_len(bits, genome_len(SearchMode::Real, n))?;
    let costs: Vec<f64> = bits[..COST_BITS * n]
        .chunks(COST_BITS)
        .map(|c| pseudo_cost_from_code(gray_decode(c)))
        .collect();
    let (omega, cf) = decode_params(&bits[COST_BITS * n..]);
    Ok(Bias {
        excluded: costs.iter().map(|&c| is_excluded(c)).collect(),
        costs,
        omega,
        cf,
    })
}

/// Decodes a binary-mode genome of `n + 16` bits; bit `i` set keeps
/// attribute `i`.
pub fn decode_binary(bits: &[bool], true_costs: &[f64]) -> Result<Bias, SearchError> {
    let n = true_costs.len();
    check_len(bits, genome_len(SearchMode::Binary, n))?;
    let (omega, cf) = decode_params(&bits[n..]);
    Ok(Bias {
        costs: true_costs.to_vec(),
        omega,
        cf,
        excluded: bits[..n].iter().map(|&b| !b).collect(),
    })
}

fn check_len(bits: &[bool], expected: usize) -> Result<(), SearchError> {
    if bits.len() == expected {
        Ok(())
    } else {
        Err(SearchError::GenomeLength {
            expected,
            got: bits.len(),
        })
    }
}

/// Real-mode genome whose decoding is as close as the codes allow to
/// `bias`.
pub fn encode_individual(bias: &Bias) -> Vec<bool> {
    let mut bits = Vec::with_capacity(genome_len(SearchMode::Real, bias.costs.len()));
    for &c in &bias.costs {
        let code = nearest_code(c, MIN_PSEUDO_COST, MAX_PSEUDO_COST, COST_CODES);
        bits.extend(gray_encode(code, COST_BITS).expect("code in range"));
    }
    push_params(&mut bits, bias.omega, bias.cf);
    bits
}

fn push_params(bits: &mut Vec<bool>, omega: f64, cf: f64) {
    let w = nearest_code(omega, 0.0, 1.0, PARAM_CODES);
    let c = nearest_code(cf, 1.0, 100.0, PARAM_CODES);
    bits.extend(gray_encode(w, PARAM_BITS).expect("code in range"));
    bits.extend(gray_encode(c, PARAM_BITS).expect("code in range"));
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub bits: Vec<bool>,
    /// Exact phenotype carried by a seeded individual for as long as its
    /// bits are unchanged; the seed's true costs and CF are generally not
    /// representable by the codes.
    pub pinned: Option<Bias>,
}

impl Individual {
    pub fn new(bits: Vec<bool>) -> Self {
        Individual { bits, pinned: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub total_trials: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Fraction of the population replaced each generation. Only 1.0 is
    /// supported.
    pub generation_gap: f64,
    pub elitism: usize,
    /// Expected offspring of the worst-ranked individual; the best gets
    /// `2 - rank_min`.
    pub rank_min: f64,
    pub rng_seed: u64,
    pub mode: SearchMode,
    pub seed_with_true_costs: bool,
    pub min_cases: usize,
    /// Use this sub-split seed for every trial instead of a fresh one.
    pub fixed_trial_seed: Option<u64>,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 50,
            total_trials: 1000,
            crossover_rate: 0.6,
            mutation_rate: 0.001,
            generation_gap: 1.0,
            elitism: 1,
            rank_min: 0.75,
            rng_seed: 123_456_789,
            mode: SearchMode::Real,
            seed_with_true_costs: false,
            min_cases: 2,
            fixed_trial_seed: None,
        }
    }
}

impl GaConfig {
    pub fn desk() -> Self {
        GaConfig {
            population_size: 20,
            total_trials: 200,
            ..GaConfig::default()
        }
    }

    pub fn generations(&self) -> usize {
        (self.total_trials / self.population_size.max(1)).max(1)
    }

    fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::Config(m.into()));
        if self.population_size == 0 {
            return bad("population_size must be positive");
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) || !(0.0..=1.0).contains(&self.mutation_rate)
        {
            return bad("rates must lie in [0, 1]");
        }
        if self.generation_gap != 1.0 {
            return bad("only a generation gap of 1.0 is supported");
        }
        if !(0.0..=1.0).contains(&self.rank_min) {
            return bad("rank_min must lie in [0, 1]");
        }
        if self.elitism > self.population_size {
            return bad("elitism exceeds the population");
        }
        Ok(())
    }
}

/// Per-trial sub-split seed.
pub fn trial_seed(rng_seed: u64, trial: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(trial as u64 + 1);
    rng.next_u64()
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn below(rng: &mut ChaCha8Rng, bound: usize) -> usize {
    ((u128::from(rng.next_u64()) * bound as u128) >> 64) as usize
}

/// Training data and evaluation costs for one search.
pub struct SearchContext<'a> {
    pub dataset: &'a Dataset,
    pub inducer: &'a Inducer,
    /// Rows of `dataset` forming the training set.
    pub train: Vec<usize>,
    /// Schema and matrix the fitness is measured with.
    pub schema: &'a TestCostSchema,
    pub matrix: &'a CostMatrix,
    pub min_cases: usize,
}

impl<'a> SearchContext<'a> {
    /// Attributes the genome covers, in attribute order.
    pub fn searchable(&self) -> Vec<usize> {
        self.schema.usable()
    }

    /// Full, undiscounted price of each searchable attribute.
    pub fn true_costs(&self) -> Vec<f64> {
        let all = self.schema.true_costs();
        self.searchable().iter().map(|&a| all[a]).collect()
    }

    pub fn decode(&self, ind: &Individual, mode: SearchMode) -> Result<Bias, SearchError> {
        if let Some(b) = &ind.pinned {
            return Ok(b.clone());
        }
        match mode {
            SearchMode::Real => decode_individual(&ind.bits, self.searchable().len()),
            SearchMode::Binary => decode_binary(&ind.bits, &self.true_costs()),
        }
    }

    /// Induction parameters over all attributes for a bias over the
    /// searchable ones. Unsearchable attributes are always excluded.
    pub fn params(&self, bias: &Bias) -> Result<InductionParams, SearchError> {
        let searchable = self.searchable();
        let n_attr = self.schema.len();
        let mut costs = vec![MIN_PSEUDO_COST; n_attr];
        let mut excluded: Vec<usize> = (0..n_attr).filter(|a| !searchable.contains(a)).collect();
        for (j, &a) in searchable.iter().enumerate() {
            costs[a] = bias.costs[j];
            if bias.excluded[j] {
                excluded.push(a);
            }
        }
        let heuristic = Heuristic::icf(costs, bias.omega).map_err(TreeError::from)?;
        Ok(InductionParams::new(heuristic, bias.cf)
            .with_excluded(excluded)
            .with_min_cases(self.min_cases))
    }

    /// Average cost on a sub-test half after inducing on the sub-training
    /// half selected by `seed`.
    pub fn fitness_of_bias(&self, bias: &Bias, seed: u64) -> Result<f64, SearchError> {
        let n = self.train.len();
        if n < 2 {
            return Err(SearchError::TooFewCases(n));
        }
        let (a, b) = partition_rows(n, half(n), seed);
        let sub_train: Vec<usize> = a.iter().map(|&i| self.train[i]).collect();
        let params = self.params(bias)?;
        let tree = self.inducer.induce(&sub_train, &params)?;
        let cases = self.dataset.cases();
        let totals = total_cost(
            &tree,
            b.iter().map(|&i| &cases[self.train[i]]),
            self.schema,
            self.matrix,
        )?;
        Ok(totals.average_cost())
    }

    /// Tree induced on the whole training set under `bias`.
    pub fn final_tree(&self, bias: &Bias) -> Result<DecisionTree, SearchError> {
        Ok(self.inducer.induce(&self.train, &self.params(bias)?)?)
    }
}

/// Real-mode fitness of `individual` on `train`.
pub fn fitness(
    individual: &Individual,
    train: &Dataset,
    schema: &TestCostSchema,
    matrix: &CostMatrix,
    trial_seed: u64,
) -> Result<f64, SearchError> {
    fitness_in_mode(
        individual,
        train,
        schema,
        matrix,
        trial_seed,
        SearchMode::Real,
    )
}

/// Binary-mode fitness of `individual` on `train`.
pub fn binary_mode_fitness(
    individual: &Individual,
    train: &Dataset,
    schema: &TestCostSchema,
    matrix: &CostMatrix,
    trial_seed: u64,
) -> Result<f64, SearchError> {
    fitness_in_mode(
        individual,
        train,
        schema,
        matrix,
        trial_seed,
        SearchMode::Binary,
    )
}

fn fitness_in_mode(
    individual: &Individual,
    train: &Dataset,
    schema: &TestCostSchema,
    matrix: &CostMatrix,
    seed: u64,
    mode: SearchMode,
) -> Result<f64, SearchError> {
    let inducer = Inducer::new(train)?;
    let ctx = SearchContext {
        dataset: train,
        inducer: &inducer,
        train: (0..train.len()).collect(),
        schema,
        matrix,
        min_cases: 2,
    };
    let bias = ctx.decode(individual, mode)?;
    ctx.fitness_of_bias(&bias, seed)
}

fn random_individual(len: usize, rng: &mut ChaCha8Rng) -> Individual {
    Individual::new((0..len).map(|_| rng.next_u32() & 1 == 1).collect())
}

/// The bias of plain cost-weighted induction: true costs, ω = 1, CF = 25.
pub fn seed_individual(true_costs: &[f64], mode: SearchMode) -> Individual {
    let bias = Bias {
        costs: true_costs.to_vec(),
        omega: 1.0,
        cf: 25.0,
        excluded: vec![false; true_costs.len()],
    };
    let bits = match mode {
        SearchMode::Real => encode_individual(&bias),
        SearchMode::Binary => {
            let mut bits = vec![true; true_costs.len()];
            push_params(&mut bits, bias.omega, bias.cf);
            bits
        }
    };
    Individual {
        bits,
        pinned: Some(bias),
    }
}

/// Linear-rank selection with stochastic universal sampling, two-point
/// crossover, bitwise mutation and elitism. Lower fitness is better.
pub fn next_generation(
    population: &[Individual],
    fitness: &[f64],
    cfg: &GaConfig,
    rng: &mut ChaCha8Rng,
) -> Vec<Individual> {
    let n = population.len();
    assert_eq!(n, fitness.len(), "one fitness per individual");
    if n == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]));

    let elite = cfg.elitism.min(n);
    let mut next: Vec<Individual> = order[..elite]
        .iter()
        .map(|&i| population[i].clone())
        .collect();
    let m = n - elite;
    if m == 0 {
        return next;
    }

    let hi = 2.0 - cfg.rank_min;
    let expected: Vec<f64> = (0..n)
        .map(|r| {
            if n == 1 {
                1.0
            } else {
                hi - (hi - cfg.rank_min) * r as f64 / (n - 1) as f64
            }
        })
        .collect();
    let total: f64 = expected.iter().sum();
    let step = total / m as f64;
    let mut pointer = uniform(rng) * step;
    let mut parents = Vec::with_capacity(m);
    let mut acc = 0.0;
    for (r, e) in expected.iter().enumerate() {
        acc += e;
        while pointer < acc && parents.len() < m {
            parents.push(order[r]);
            pointer += step;
        }
    }
    while parents.len() < m {
        parents.push(order[n - 1]);
    }
    for i in (1..parents.len()).rev() {
        let j = below(rng, i + 1);
        parents.swap(i, j);
    }

    let mut k = 0;
    while k < m {
        let pa = &population[parents[k]];
        if k + 1 < m {
            let pb = &population[parents[k + 1]];
            let mut a = pa.bits.clone();
            let mut b = pb.bits.clone();
            if uniform(rng) < cfg.crossover_rate && a.len() > 1 {
                let mut x = 1 + below(rng, a.len() - 1);
                let mut y = 1 + below(rng, a.len() - 1);
                if x > y {
                    std::mem::swap(&mut x, &mut y);
                }
                a[x..y].swap_with_slice(&mut b[x..y]);
            }
            next.push(offspring(a, pa, pb, cfg, rng));
            next.push(offspring(b, pb, pa, cfg, rng));
            k += 2;
        } else {
            next.push(offspring(pa.bits.clone(), pa, pa, cfg, rng));
            k += 1;
        }
    }
    next
}

fn offspring(
    mut bits: Vec<bool>,
    first: &Individual,
    second: &Individual,
    cfg: &GaConfig,
    rng: &mut ChaCha8Rng,
) -> Individual {
    if cfg.mutation_rate > 0.0 {
        for bit in &mut bits {
            if uniform(rng) < cfg.mutation_rate {
                *bit = !*bit;
            }
        }
    }
    let pinned = [first, second]
        .into_iter()
        .find(|p| p.pinned.is_some() && p.bits == bits)
        .and_then(|p| p.pinned.clone());
    Individual { bits, pinned }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_so_far: f64,
    pub best_bias: Bias,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IcetRun {
    pub tree: DecisionTree,
    pub bias: Bias,
    pub fitness: f64,
    pub trials: usize,
    pub log: Vec<GenerationStats>,
}

/// Evolves a bias on `ctx.train` and returns the tree it induces on the
/// whole training set.
pub fn icet(ctx: &SearchContext<'_>, cfg: &GaConfig) -> Result<IcetRun, SearchError> {
    cfg.validate()?;
    if ctx.train.len() < 2 {
        return Err(SearchError::TooFewCases(ctx.train.len()));
    }
    let n = ctx.searchable().len();
    let len = genome_len(cfg.mode, n);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut population: Vec<Individual> = (0..cfg.population_size)
        .map(|_| random_individual(len, &mut rng))
        .collect();
    if cfg.seed_with_true_costs {
        population[0] = seed_individual(&ctx.true_costs(), cfg.mode);
    }

    let mut best: Option<(Bias, f64)> = None;
    let mut log = Vec::new();
    let mut trials = 0;
    let generations = cfg.generations();
    for generation in 0..generations {
        let biases = population
            .iter()
            .map(|ind| ctx.decode(ind, cfg.mode))
            .collect::<Result<Vec<_>, _>>()?;
        let base = trials;
        let fitness = biases
            .par_iter()
            .enumerate()
            .map(|(i, bias)| {
                let seed = cfg
                    .fixed_trial_seed
                    .unwrap_or_else(|| trial_seed(cfg.rng_seed, base + i));
                ctx.fitness_of_bias(bias, seed)
            })
            .collect::<Result<Vec<f64>, _>>()?;
        trials += fitness.len();

        let mut gen_best = 0;
        for (i, &f) in fitness.iter().enumerate() {
            if f < fitness[gen_best] {
                gen_best = i;
            }
            if best.as_ref().map_or(true, |(_, b)| f < *b) {
                best = Some((biases[i].clone(), f));
            }
        }
        let (best_bias, best_so_far) = best.clone().expect("population nonempty");
        log.push(GenerationStats {
            generation,
            best_fitness: fitness[gen_best],
            mean_fitness: fitness.iter().sum::<f64>() / fitness.len() as f64,
            best_so_far,
            best_bias,
        });
        if generation + 1 < generations {
            population = next_generation(&population, &fitness, cfg, &mut rng);
        }
    }
    let (bias, fitness) = best.expect("at least one trial");
    let tree = ctx.final_tree(&bias)?;
    Ok(IcetRun {
        tree,
        bias,
        fitness,
        trials,
        log,
    })
}
