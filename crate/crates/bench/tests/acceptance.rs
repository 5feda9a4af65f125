//! Acceptance suite. Prints one PASS/FAIL line per criterion. Exits nonzero
//! if any criterion fails for a reason other than a dataset that is not
//! bundled.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use icet_bench::config::{Algorithm, Scale, Variant};
use icet_bench::experiment::{canonical_splits, run_on_problems, ResultRow};
use icet_bench::summary::{summarize_metric, Metric};
use icet_bench::{summarize, ExperimentConfig, Window};
use icet_core::benchmark::{default_data_dir, Problem, BENCHMARKS};
use icet_core::cost::{case_cost, standard_cost, LedgerStep};
use icet_core::data::{AttributeKind, AttributeMeta, Case, Dataset};
use icet_core::schema::{CostMatrix, TestCost, TestCostSchema};
use icet_core::search::{gray_decode, gray_encode, icet, GaConfig, SearchContext};
use icet_core::tree::{
    build_tree, cs_id3_score, icf_score, idx_score, DecisionTree, Heuristic, Inducer,
    InductionParams, Node, Split,
};
use icet_core::Money;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const SCORE_TOL: f64 = 1e-12;
const GAIN_TIE_TOL: f64 = 1e-9;
const SCORE_TRIPLES: usize = 1000;
const ARGMAX_DATASETS: usize = 100;
const ORACLE_TREES: usize = 200;
const EQUIVALENCE_SPLITS: usize = 3;
const CENT: f64 = 0.005 + 1e-9;
/// Published five-dataset averages: (algorithm, $10-$10000, $10-$100).
const TABLE_BASELINE: [(&str, f64, f64); 5] = [
    ("ICET", 49.0, 29.0),
    ("EG2", 58.0, 43.0),
    ("CS-ID3", 61.0, 49.0),
    ("IDX", 58.0, 43.0),
    ("C4.5", 77.0, 82.0),
];
const BASELINE_TOL: f64 = 10.0;
/// How far apart EG2 and IDX may be and still count as "about equal".
const EG2_IDX_CLOSE: f64 = 5.0;
const SEEDED_SLACK: f64 = 2.0;
const SEED: u64 = 1;

/// Marks a failure caused only by a dataset that is not bundled while the
/// available datasets meet the criterion.
const BLOCKED: &str = "blocked by data:";

type Verdict = Result<String, String>;

struct Line {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(id: usize, name: &'static str, budget: Duration, f: impl FnOnce() -> Verdict) -> Line {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f))
        .unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
    let elapsed = start.elapsed();
    let timing = format!("{:.2}s of {}s", elapsed.as_secs_f64(), budget.as_secs());
    let (pass, detail) = match outcome {
        Ok(d) if elapsed <= budget => (true, format!("{d} [{timing}]")),
        Ok(d) => (false, format!("{d} [over budget: {timing}]")),
        Err(d) => (false, format!("{d} [{timing}]")),
    };
    let line = Line {
        id,
        name,
        pass,
        detail,
    };
    println!(
        "{} criterion {:>2} {}: {}",
        if line.pass { "PASS" } else { "FAIL" },
        line.id,
        line.name,
        line.detail
    );
    line
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn usd(d: f64) -> Money {
    Money::from_dollars(d).unwrap()
}

fn below(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn continuous(name: &str, index: usize) -> AttributeMeta {
    AttributeMeta {
        name: name.into(),
        kind: AttributeKind::Continuous,
        index,
    }
}

fn discrete(name: &str, index: usize, values: usize) -> AttributeMeta {
    AttributeMeta {
        name: name.into(),
        kind: AttributeKind::Discrete((0..values).map(|v| format!("v{v}")).collect()),
        index,
    }
}

// Criterion 1 ---------------------------------------------------------------

fn traced_example() -> Verdict {
    let grouped = |name: &str, cost: f64| TestCost {
        name: name.into(),
        cost: usd(cost),
        group: Some("A".into()),
        group_common_cost: usd(2.0),
        delayed: true,
        usable: true,
    };
    let schema = TestCostSchema::new(vec![
        TestCost::immediate("alpha", usd(5.0)),
        TestCost::immediate("beta", usd(10.0)),
        grouped("delta", 7.0),
        grouped("epsilon", 10.0),
    ])
    .map_err(|e| e.to_string())?;
    let leaf = |c: usize| {
        let mut counts = vec![0, 0];
        counts[c] = 1;
        Node::leaf(c, counts)
    };
    let test = |attribute, split, children: Vec<Node>| Node::Test {
        attribute,
        split,
        counts: vec![1, 1],
        children,
    };
    let tree = DecisionTree::new(
        test(
            0,
            Split::Threshold(2.5),
            vec![
                test(1, Split::Threshold(6.0), vec![leaf(1), leaf(0)]),
                test(
                    2,
                    Split::Values,
                    vec![
                        test(1, Split::Threshold(4.5), vec![leaf(1), leaf(0)]),
                        test(3, Split::Threshold(3.5), vec![leaf(0), leaf(1)]),
                    ],
                ),
            ],
        ),
        2,
    );
    let values = [Some(6.0), Some(0.0), Some(1.0), Some(2.0)];
    let ledger = case_cost(&tree, &values, &schema, &CostMatrix::simple(2, usd(50.0)), 1)
        .map_err(|e| e.to_string())?;
    let lines: Vec<String> = ledger
        .steps
        .iter()
        .map(|s| match s {
            LedgerStep::Test { charges, .. } if charges.is_empty() => "already paid".into(),
            LedgerStep::Test { charges, .. } => charges.iter().map(|c| c.price).sum::<Money>().to_string(),
            LedgerStep::Guess { cost, .. } => cost.to_string(),
        })
        .collect();
    let expected = ["$5.00", "$25.00", "already paid", "$50.00"];
    ensure(lines == expected, || format!("ledger lines {lines:?}"))?;
    ensure(ledger.total == usd(80.0), || format!("total {}", ledger.total))?;
    Ok(format!("total {} with lines {}", ledger.total, lines.join(" / ")))
}

// Criterion 2 ---------------------------------------------------------------

fn entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.log2()
        })
        .sum()
}

/// Best information gain of each attribute over its admissible splits:
/// thresholds between distinct values with at least `min_cases` on each
/// side, or a multiway split with at least two branches of `min_cases`.
fn oracle_gains(d: &Dataset, min_cases: usize) -> Vec<Option<f64>> {
    let k = d.classes().len();
    let n = d.len();
    let mut parent = vec![0; k];
    for c in d.cases() {
        parent[c.class] += 1;
    }
    let hp = entropy(&parent);
    d.attributes()
        .iter()
        .enumerate()
        .map(|(a, meta)| {
            let value = |c: &Case| c.values[a].unwrap();
            match &meta.kind {
                AttributeKind::Discrete(vals) => {
                    let mut parts = vec![vec![0; k]; vals.len()];
                    for c in d.cases() {
                        parts[value(c) as usize][c.class] += 1;
                    }
                    let sizes: Vec<usize> = parts.iter().map(|p| p.iter().sum()).collect();
                    if sizes.iter().filter(|&&s| s >= min_cases).count() < 2 {
                        return None;
                    }
                    let rem: f64 = parts
                        .iter()
                        .zip(&sizes)
                        .map(|(p, &s)| s as f64 / n as f64 * entropy(p))
                        .sum();
                    Some(hp - rem)
                }
                AttributeKind::Continuous => {
                    let distinct: BTreeSet<u64> =
                        d.cases().iter().map(|c| value(c).to_bits()).collect();
                    let mut vals: Vec<f64> = distinct.into_iter().map(f64::from_bits).collect();
                    vals.sort_by(f64::total_cmp);
                    let mut best: Option<f64> = None;
                    for w in vals.windows(2) {
                        let t = (w[0] + w[1]) / 2.0;
                        let mut l = vec![0; k];
                        let mut r = vec![0; k];
                        for c in d.cases() {
                            if value(c) <= t {
                                l[c.class] += 1;
                            } else {
                                r[c.class] += 1;
                            }
                        }
                        let (nl, nr) = (l.iter().sum::<usize>(), r.iter().sum::<usize>());
                        if nl < min_cases || nr < min_cases {
                            continue;
                        }
                        let g = hp - nl as f64 / n as f64 * entropy(&l) - nr as f64 / n as f64 * entropy(&r);
                        best = Some(best.map_or(g, |b: f64| b.max(g)));
                    }
                    best
                }
            }
        })
        .collect()
}

fn random_small_dataset(rng: &mut ChaCha8Rng) -> Dataset {
    let n_attr = 2 + below(rng, 4);
    let n_classes = 2 + below(rng, 2);
    let attributes: Vec<AttributeMeta> = (0..n_attr)
        .map(|i| {
            if below(rng, 2) == 0 {
                continuous(&format!("a{i}"), i)
            } else {
                discrete(&format!("a{i}"), i, 2 + below(rng, 3))
            }
        })
        .collect();
    let n = 15 + below(rng, 30);
    let cases = (0..n)
        .map(|_| Case {
            values: attributes
                .iter()
                .map(|a| match &a.kind {
                    AttributeKind::Continuous => Some(below(rng, 12) as f64 + 0.25),
                    AttributeKind::Discrete(v) => Some(below(rng, v.len()) as f64),
                })
                .collect(),
            class: below(rng, n_classes),
        })
        .collect();
    Dataset::new(
        "random",
        attributes,
        (0..n_classes).map(|c| c.to_string()).collect(),
        cases,
    )
    .unwrap()
}

fn selection_scores() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..SCORE_TRIPLES {
        let gain = unit(&mut rng) * 3.0;
        let cost = 1.0 + unit(&mut rng) * 9999.0;
        let omega = unit(&mut rng);
        let checks = [
            (icf_score(gain, cost, omega), (2f64.powf(gain) - 1.0) / (cost + 1.0).powf(omega)),
            (cs_id3_score(gain, cost).map_err(|e| e.to_string())?, gain * gain / cost),
            (idx_score(gain, cost).map_err(|e| e.to_string())?, gain / cost),
        ];
        for (got, want) in checks {
            let err = (got - want).abs() / want.abs().max(1.0);
            worst = worst.max(err);
            ensure(err <= SCORE_TOL, || {
                format!("score {got} vs oracle {want} at gain {gain}, cost {cost}, omega {omega}")
            })?;
        }
    }
    for i in 0..ARGMAX_DATASETS {
        let d = random_small_dataset(&mut rng);
        let n_attr = d.attributes().len();
        let costs: Vec<f64> = (0..n_attr).map(|_| 1.0 + unit(&mut rng) * 1000.0).collect();
        let inducer = Inducer::new(&d).map_err(|e| e.to_string())?;
        let params = InductionParams::new(Heuristic::icf(costs, 0.0).map_err(|e| e.to_string())?, 25.0);
        let rows: Vec<usize> = (0..d.len()).collect();
        let all: Vec<usize> = (0..n_attr).collect();
        let chosen = inducer.select(&rows, &all, &params).map(|s| s.attribute);
        let gains = oracle_gains(&d, params.min_cases);
        let max = gains.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        match chosen {
            None => ensure(max <= 1e-12, || format!("dataset {i}: no split chosen but gain {max}"))?,
            Some(a) => {
                let g = gains[a].unwrap_or(f64::NEG_INFINITY);
                ensure(g >= max - GAIN_TIE_TOL, || {
                    format!("dataset {i}: chose attribute {a} with gain {g}, best gain {max}")
                })?;
                let first = gains
                    .iter()
                    .position(|x| x.is_some_and(|x| x >= max - GAIN_TIE_TOL))
                    .unwrap();
                ensure(first == a, || format!("dataset {i}: tie broken to {a}, expected {first}"))?;
            }
        }
    }
    Ok(format!(
        "{SCORE_TRIPLES} triples within {SCORE_TOL:e} (worst {worst:.1e}); \
         {ARGMAX_DATASETS} datasets agree with the gain argmax"
    ))
}

// Criterion 3 ---------------------------------------------------------------

fn gray_codes() -> Verdict {
    for width in [8usize, 12] {
        let mut prev: Option<Vec<bool>> = None;
        let mut seen = BTreeSet::new();
        for v in 0..(1u32 << width) {
            let g = gray_encode(v, width).map_err(|e| e.to_string())?;
            ensure(g.len() == width, || format!("width {width}: {v} encoded to {} bits", g.len()))?;
            ensure(gray_decode(&g) == v, || format!("width {width}: {v} does not roundtrip"))?;
            ensure(seen.insert(g.clone()), || format!("width {width}: duplicate code for {v}"))?;
            if let Some(p) = &prev {
                let d = p.iter().zip(&g).filter(|(a, b)| a != b).count();
                ensure(d == 1, || format!("width {width}: {} -> {v} differs in {d} bits", v - 1))?;
            }
            prev = Some(g);
        }
    }
    Ok("widths 8 and 12 roundtrip with unit Hamming steps".into())
}

// Criterion 4 ---------------------------------------------------------------

const ORACLE_ATTRS: usize = 6;
const DISCRETE_ARITY: usize = 3;

fn is_discrete(a: usize) -> bool {
    a >= ORACLE_ATTRS / 2
}

fn random_schema(rng: &mut ChaCha8Rng) -> TestCostSchema {
    let delayed_p = unit(rng);
    let tests = (0..ORACLE_ATTRS)
        .map(|i| {
            let (group, common) = match below(rng, 3) {
                0 => (None, Money::ZERO),
                1 => (Some("G1".to_string()), usd(2.10)),
                _ => (Some("G2".to_string()), usd(3.00)),
            };
            TestCost {
                name: format!("t{i}"),
                cost: Money::from_cents(400 + below(rng, 3000) as i64),
                group,
                group_common_cost: common,
                delayed: unit(rng) < delayed_p,
                usable: true,
            }
        })
        .collect();
    TestCostSchema::new(tests).unwrap()
}

fn random_tree(rng: &mut ChaCha8Rng, depth: usize) -> Node {
    if depth == 0 || unit(rng) < 0.2 {
        let class = below(rng, 2);
        let mut counts = vec![0, 0];
        counts[class] = 1;
        return Node::leaf(class, counts);
    }
    let attribute = below(rng, ORACLE_ATTRS);
    let (split, arity) = if is_discrete(attribute) {
        (Split::Values, DISCRETE_ARITY)
    } else {
        (Split::Threshold(below(rng, 7) as f64 + 0.5), 2)
    };
    Node::Test {
        attribute,
        split,
        counts: vec![1, 1],
        children: (0..arity).map(|_| random_tree(rng, depth - 1)).collect(),
    }
}

/// Prices the set of tests a case commits to: every test on its path up to
/// the first unpaid delayed test, plus every test in that test's subtree.
fn committed_set_cost(tree: &DecisionTree, values: &[Option<f64>], schema: &TestCostSchema) -> Money {
    fn subtree(node: &Node, out: &mut BTreeSet<usize>) {
        if let Node::Test {
            attribute,
            children,
            ..
        } = node
        {
            out.insert(*attribute);
            children.iter().for_each(|c| subtree(c, out));
        }
    }
    let mut committed = BTreeSet::new();
    let mut node = &tree.root;
    while let Node::Test {
        attribute,
        split,
        children,
        ..
    } = node
    {
        if schema.tests()[*attribute].delayed && !committed.contains(attribute) {
            subtree(node, &mut committed);
            break;
        }
        committed.insert(*attribute);
        let v = values[*attribute].unwrap();
        node = match split {
            Split::Threshold(t) => &children[usize::from(v > *t)],
            Split::Values => &children[v as usize],
        };
    }
    let mut groups = BTreeSet::new();
    let mut total = Money::ZERO;
    for &a in &committed {
        let t = &schema.tests()[a];
        total += t.cost - t.group_common_cost;
        if let Some(g) = &t.group {
            if groups.insert(g.clone()) {
                total += t.group_common_cost;
            }
        }
    }
    total
}

fn delayed_commitment() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let matrix = CostMatrix::simple(2, usd(50.0));
    for i in 0..ORACLE_TREES {
        let schema = random_schema(&mut rng);
        let tree = DecisionTree::new(random_tree(&mut rng, 4), 2);
        for _ in 0..5 {
            let values: Vec<Option<f64>> = (0..ORACLE_ATTRS)
                .map(|a| {
                    Some(if is_discrete(a) {
                        below(&mut rng, DISCRETE_ARITY) as f64
                    } else {
                        below(&mut rng, 8) as f64
                    })
                })
                .collect();
            let ledger = case_cost(&tree, &values, &schema, &matrix, 0).map_err(|e| e.to_string())?;
            let want = committed_set_cost(&tree, &values, &schema);
            ensure(ledger.test_cost() == want, || {
                format!("tree {i}: test cost {} vs oracle {want}", ledger.test_cost())
            })?;
        }
    }
    Ok(format!("{ORACLE_TREES} trees x 5 cases match the committed-set oracle"))
}

// Data ----------------------------------------------------------------------

struct Loaded {
    problems: Vec<Problem>,
    missing: Vec<String>,
}

fn load_all(dir: &Path) -> Loaded {
    let mut problems = Vec::new();
    let mut missing = Vec::new();
    for name in BENCHMARKS {
        match Problem::load_named(dir, name) {
            Ok(p) => problems.push(p),
            Err(e) => missing.push(format!("{name}: {e}")),
        }
    }
    Loaded { problems, missing }
}

/// Fails a five-dataset criterion when any dataset is missing, after
/// reporting what the available datasets show.
fn require_all(loaded: &Loaded, partial: Verdict) -> Verdict {
    if loaded.missing.is_empty() {
        return partial;
    }
    let n = loaded.problems.len();
    let missing = loaded.missing.join("; ");
    match partial {
        Ok(d) => Err(format!("{BLOCKED} needs all five datasets; missing {missing}; on {n} available datasets: {d}")),
        Err(d) => Err(format!("needs all five datasets; missing {missing}; on {n} available datasets, also failing: {d}")),
    }
}

// Criterion 5 ---------------------------------------------------------------

fn eg2_equivalence(problems: &[Problem]) -> Verdict {
    let mut checked = 0;
    for p in problems {
        let inducer = Inducer::new(&p.dataset).map_err(|e| e.to_string())?;
        let matrix = p.simple_matrix(usd(100.0)).map_err(|e| e.to_string())?;
        let usable = p.schema.usable();
        let costs: Vec<f64> = p
            .schema
            .tests()
            .iter()
            .enumerate()
            .map(|(a, t)| if usable.contains(&a) { t.cost.dollars() } else { 1.0 })
            .collect();
        let excluded = (0..p.schema.len()).filter(|a| !usable.contains(a));
        let eg2 = InductionParams::new(Heuristic::icf(costs, 1.0).map_err(|e| e.to_string())?, 25.0)
            .with_excluded(excluded);
        for (s, (train, _)) in canonical_splits(p.dataset.len(), SEED, EQUIVALENCE_SPLITS)
            .into_iter()
            .enumerate()
        {
            let ctx = SearchContext {
                dataset: &p.dataset,
                inducer: &inducer,
                train: train.clone(),
                schema: &p.schema,
                matrix: &matrix,
                min_cases: 2,
            };
            let cfg = GaConfig {
                population_size: 1,
                total_trials: 1,
                seed_with_true_costs: true,
                ..GaConfig::default()
            };
            let run = icet(&ctx, &cfg).map_err(|e| e.to_string())?;
            let direct = build_tree(&p.dataset.subset(&train), &eg2).map_err(|e| e.to_string())?;
            ensure(run.tree == direct, || format!("{} split {s}: trees differ", p.name))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} (dataset, split) trees identical"))
}

// Criterion 6 ---------------------------------------------------------------

fn standard_costs(problems: &[Problem], missing: &[String]) -> Verdict {
    let mut report = Vec::new();
    for p in problems {
        let text = std::fs::read_to_string(default_data_dir().join(&p.name).join("costs.toml"))
            .map_err(|e| e.to_string())?;
        let doc: toml::Value = text.parse().map_err(|e: toml::de::Error| e.to_string())?;
        let mut t = 0.0;
        let mut groups = BTreeSet::new();
        for rec in doc["tests"].as_array().ok_or("no tests")? {
            if rec.get("usable").and_then(|v| v.as_bool()) == Some(false) {
                continue;
            }
            let num = |v: &toml::Value| v.as_float().or_else(|| v.as_integer().map(|i| i as f64));
            let cost = num(&rec["cost"]).ok_or("bad cost")?;
            let common = rec.get("group_common_cost").and_then(num).unwrap_or(0.0);
            t += cost - common;
            if let Some(g) = rec.get("group").and_then(|g| g.as_str()) {
                if groups.insert(g.to_string()) {
                    t += common;
                }
            }
        }
        let n = p.dataset.len() as f64;
        let mut counts = vec![0usize; p.dataset.classes().len()];
        for c in p.dataset.cases() {
            counts[c.class] += 1;
        }
        let min_miss = counts.iter().map(|&c| 1.0 - c as f64 / n).fold(f64::INFINITY, f64::min);
        for k in [10.0, 50.0, 100.0, 500.0, 1000.0, 5000.0, 10000.0] {
            let want = t + min_miss * k;
            let matrix = p.simple_matrix(usd(k)).map_err(|e| e.to_string())?;
            let got = standard_cost(&p.dataset, &p.schema, &matrix).map_err(|e| e.to_string())?;
            ensure((got.dollars() - want).abs() <= CENT, || {
                format!("{} at ${k}: {got} vs oracle {want:.4}", p.name)
            })?;
        }
        report.push(format!("{} T=${t:.2}", p.name));
    }
    let note = if missing.is_empty() {
        String::new()
    } else {
        format!("; not bundled: {}", missing.join("; "))
    };
    Ok(format!("{} at all seven costs{note}", report.join(", ")))
}

// Criterion 7 ---------------------------------------------------------------

fn baseline(rows: &[ResultRow]) -> Verdict {
    let full = summarize(rows, Window::FULL).map_err(|e| e.to_string())?;
    let low = summarize(rows, Window::LOW).map_err(|e| e.to_string())?;
    let get = |lines: &[icet_bench::SummaryLine], alg: &str| {
        lines
            .iter()
            .find(|l| l.algorithm == alg)
            .map(|l| l.mean)
            .ok_or_else(|| format!("no rows for {alg}"))
    };
    let mut parts = Vec::new();
    let mut problems = Vec::new();
    for (alg, want_full, want_low) in TABLE_BASELINE {
        let (f, l) = (get(&full, alg)?, get(&low, alg)?);
        parts.push(format!("{alg} {f:.1}/{l:.1}"));
        if (f - want_full).abs() > BASELINE_TOL || (l - want_low).abs() > BASELINE_TOL {
            problems.push(format!("{alg} {f:.1}/{l:.1} vs {want_full}/{want_low}"));
        }
    }
    let (icet_l, eg2, idx, csid3, c45) = (
        get(&low, "ICET")?,
        get(&low, "EG2")?,
        get(&low, "IDX")?,
        get(&low, "CS-ID3")?,
        get(&low, "C4.5")?,
    );
    if !(icet_l < eg2.min(idx)) {
        problems.push("ICET not below EG2 and IDX on $10-$100".into());
    }
    if (eg2 - idx).abs() > EG2_IDX_CLOSE {
        problems.push(format!("EG2 and IDX differ by more than {EG2_IDX_CLOSE}"));
    }
    if eg2.max(idx) > csid3 {
        problems.push("EG2/IDX above CS-ID3 on $10-$100".into());
    }
    if !(c45 > icet_l.max(eg2).max(idx).max(csid3)) {
        problems.push("C4.5 not worst on $10-$100".into());
    }
    let summary = format!("full/low window: {}", parts.join(", "));
    if problems.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", problems.join("; ")))
    }
}

// Criterion 8 ---------------------------------------------------------------

fn expenditure_and_error(rows: &[ResultRow]) -> Verdict {
    let icet: Vec<ResultRow> = rows.iter().filter(|r| r.algorithm == "ICET").cloned().collect();
    let at = |metric: Metric, x: f64| -> Result<f64, String> {
        let s = summarize_metric(&icet, metric, Window::at(x), None).map_err(|e| e.to_string())?;
        s.first().map(|l| l.mean).ok_or_else(|| format!("no ICET rows at ${x}"))
    };
    let (spend_lo, spend_hi) = (at(Metric::TestExpenditure, 10.0)?, at(Metric::TestExpenditure, 10000.0)?);
    let (err_lo, err_hi) = (at(Metric::ErrorRate, 10.0)?, at(Metric::ErrorRate, 10000.0)?);
    let d = format!(
        "test expenditure {spend_lo:.1}% -> {spend_hi:.1}%, error rate {err_lo:.1}% -> {err_hi:.1}% ($10 -> $10000)"
    );
    ensure(spend_hi > spend_lo && err_hi < err_lo, || d.clone())?;
    Ok(d)
}

// Criterion 9 ---------------------------------------------------------------

fn seeded_benefit(rows: &[ResultRow]) -> Verdict {
    let low = summarize(rows, Window::LOW).map_err(|e| e.to_string())?;
    let get = |alg: &str| {
        low.iter()
            .find(|l| l.algorithm == alg)
            .map(|l| l.mean)
            .ok_or_else(|| format!("no rows for {alg}"))
    };
    let (seeded, plain) = (get("ICET-seeded")?, get("ICET")?);
    let d = format!("$10-$100: seeded {seeded:.1} vs unseeded {plain:.1} (slack {SEEDED_SLACK})");
    ensure(seeded <= plain + SEEDED_SLACK, || d.clone())?;
    Ok(d)
}

// Criterion 10 --------------------------------------------------------------

fn constant_trees(rows: &[ResultRow]) -> Verdict {
    let mut cells = 0;
    for alg in [Algorithm::Eg2, Algorithm::Idx, Algorithm::CsId3, Algorithm::C45] {
        let label = alg.label();
        let mine: Vec<&ResultRow> = rows.iter().filter(|r| r.algorithm == label).collect();
        ensure(!mine.is_empty(), || format!("no rows for {label}"))?;
        let keys: BTreeSet<(String, usize)> = mine.iter().map(|r| (r.dataset.clone(), r.split)).collect();
        for (d, s) in keys {
            let cell: Vec<&&ResultRow> = mine.iter().filter(|r| r.dataset == d && r.split == s).collect();
            ensure(cell.len() == 7, || format!("{label} {d} split {s}: {} costs", cell.len()))?;
            let first = cell[0].test_expenditure_pct;
            ensure(cell.iter().all(|r| r.test_expenditure_pct == first), || {
                format!("{label} {d} split {s}: test expenditure varies with k")
            })?;
            cells += 1;
        }
    }
    Ok(format!("{cells} (learner, dataset, split) cells constant across seven costs"))
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut lines = vec![
        check(1, "golden cost trace", secs(1), traced_example),
        check(2, "selection scores", secs(5), selection_scores),
        check(3, "gray codes", secs(1), gray_codes),
        check(4, "delayed-test commitment", secs(10), delayed_commitment),
    ];

    let loaded = load_all(&default_data_dir());
    lines.push(check(5, "seeded search reduces to EG2", secs(120), || {
        require_all(&loaded, eg2_equivalence(&loaded.problems))
    }));
    lines.push(check(6, "standard cost", secs(1), || {
        standard_costs(&loaded.problems, &loaded.missing)
    }));

    let mut full_rows = Vec::new();
    lines.push(check(7, "baseline reproduction (full scale)", secs(6 * 3600), || {
        let cfg = ExperimentConfig::new(Variant::Baseline, Scale::Full);
        let run = run_on_problems(&cfg, loaded.problems.clone()).map_err(|e| e.to_string())?;
        full_rows = run.rows;
        require_all(&loaded, baseline(&full_rows))
    }));

    let mut desk_rows = Vec::new();
    lines.push(check(8, "ICET spends more and errs less as k grows (desk)", secs(1800), || {
        let mut cfg = ExperimentConfig::new(Variant::Seeded, Scale::Desk);
        cfg.algorithms = vec![Algorithm::Icet];
        let run = run_on_problems(&cfg, loaded.problems.clone()).map_err(|e| e.to_string())?;
        desk_rows = run.rows;
        expenditure_and_error(&desk_rows)
    }));
    lines.push(check(9, "seeded population benefit (desk)", secs(1), || {
        require_all(&loaded, seeded_benefit(&desk_rows))
    }));
    lines.push(check(10, "cost-blind learners keep one tree across k", secs(1), || {
        constant_trees(&full_rows)
    }));

    let failed: Vec<usize> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    let blocked: Vec<usize> = lines
        .iter()
        .filter(|l| !l.pass && l.detail.starts_with(BLOCKED))
        .map(|l| l.id)
        .collect();
    println!(
        "acceptance: {} passed, {} failed (criteria {failed:?}), of which blocked by missing data {blocked:?}",
        lines.len() - failed.len(),
        failed.len(),
    );
    if failed == blocked {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
