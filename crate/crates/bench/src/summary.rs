//! Split-level averaging and 95% confidence half-widths.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::Axis;
use crate::experiment::ResultRow;
use crate::BenchError;

const Z95: f64 = 1.96;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Metric {
    AverageCost,
    NormalizedCost,
    TestExpenditure,
    ErrorRate,
}

impl Metric {
    pub fn of(self, row: &ResultRow) -> f64 {
        match self {
            Metric::AverageCost => row.average_cost,
            Metric::NormalizedCost => row.normalized_cost_pct,
            Metric::TestExpenditure => row.test_expenditure_pct,
            Metric::ErrorRate => row.error_rate_pct,
        }
    }
}

/// Inclusive range of the x axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub const FULL: Window = Window {
        lo: 10.0,
        hi: 10_000.0,
    };
    pub const LOW: Window = Window { lo: 10.0, hi: 100.0 };
    pub const ALL: Window = Window {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn at(x: f64) -> Window {
        Window { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryLine {
    pub algorithm: String,
    pub mean: f64,
    pub half_width: f64,
    pub splits: usize,
}

/// Normalized cost per algorithm over `window`, all datasets weighted
/// equally.
pub fn summarize(rows: &[ResultRow], window: Window) -> Result<Vec<SummaryLine>, BenchError> {
    summarize_metric(rows, Metric::NormalizedCost, window, None)
}

/// For each algorithm and split: the metric averaged over the window within
/// each dataset, then over datasets. The mean and the half-width
/// `1.96 * sd / sqrt(splits)` are taken over those split values.
/// `dataset` restricts the rows to one dataset.
pub fn summarize_metric(
    rows: &[ResultRow],
    metric: Metric,
    window: Window,
    dataset: Option<&str>,
) -> Result<Vec<SummaryLine>, BenchError> {
    if rows.is_empty() {
        return Err(BenchError::NoRows);
    }
    // algorithm -> split -> dataset -> (sum, count)
    let mut acc: BTreeMap<&str, BTreeMap<usize, BTreeMap<&str, (f64, usize)>>> = BTreeMap::new();
    for r in rows {
        if !window.contains(r.x) || dataset.is_some_and(|d| d != r.dataset) {
            continue;
        }
        let cell = acc
            .entry(&r.algorithm)
            .or_default()
            .entry(r.split)
            .or_default()
            .entry(&r.dataset)
            .or_default();
        cell.0 += metric.of(r);
        cell.1 += 1;
    }
    let lines = acc
        .into_iter()
        .map(|(algorithm, by_split)| {
            let values: Vec<f64> = by_split
                .values()
                .map(|by_dataset| {
                    let means: Vec<f64> = by_dataset.values().map(|(s, n)| s / *n as f64).collect();
                    means.iter().sum::<f64>() / means.len() as f64
                })
                .collect();
            let (mean, half_width) = mean_and_half_width(&values);
            SummaryLine {
                algorithm: algorithm.to_string(),
                mean,
                half_width,
                splits: values.len(),
            }
        })
        .collect();
    Ok(lines)
}

/// Mean and 95% half-width from the sample standard deviation.
pub fn mean_and_half_width(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, Z95 * var.sqrt() / (n as f64).sqrt())
}

/// Distinct x values in ascending order.
pub fn x_values(rows: &[ResultRow]) -> Vec<f64> {
    let mut xs: Vec<f64> = rows.iter().map(|r| r.x).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

pub fn datasets(rows: &[ResultRow]) -> Vec<String> {
    rows.iter()
        .map(|r| r.dataset.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// Metric at each x for every algorithm: `(algorithm, [(x, mean, half)])`.
pub fn curves(
    rows: &[ResultRow],
    metric: Metric,
    dataset: Option<&str>,
) -> Result<Vec<(String, Vec<(f64, f64, f64)>)>, BenchError> {
    let mut out: BTreeMap<String, Vec<(f64, f64, f64)>> = BTreeMap::new();
    for x in x_values(rows) {
        for line in summarize_metric(rows, metric, Window::at(x), dataset)? {
            out.entry(line.algorithm)
                .or_default()
                .push((x, line.mean, line.half_width));
        }
    }
    Ok(out.into_iter().collect())
}

fn cell(mean: f64, half: f64) -> String {
    format!("{mean:.1} ± {half:.1}")
}

fn money_label(x: f64) -> String {
    format!("${x}")
}

fn axis_of(rows: &[ResultRow]) -> Axis {
    rows.first().map(|r| r.axis).unwrap_or(Axis::ErrorCost)
}

/// Markdown report: window averages for error-cost runs, one column per x
/// otherwise, followed by per-dataset tables.
pub fn render_summary(rows: &[ResultRow]) -> Result<String, BenchError> {
    if rows.is_empty() {
        return Err(BenchError::NoRows);
    }
    let axis = axis_of(rows);
    let xs = x_values(rows);
    let mut md = String::new();
    let sets = datasets(rows);
    let splits = rows.iter().map(|r| r.split).collect::<BTreeSet<_>>().len();
    writeln!(
        md,
        "# Average classification cost as percentage of standard cost\n\n\
         Datasets: {}. Splits: {splits}. Intervals are 95% half-widths across splits.\n",
        sets.join(", ")
    )
    .ok();

    if axis == Axis::ErrorCost {
        let lo = xs[0];
        let hi = *xs.last().expect("rows nonempty");
        let low_hi = xs.iter().copied().filter(|&x| x <= 100.0).fold(lo, f64::max);
        let full = summarize(rows, Window { lo, hi })?;
        let low = summarize(rows, Window { lo, hi: low_hi })?;
        writeln!(
            md,
            "| Algorithm | {} to {} | {} to {} |\n|---|---|---|",
            money_label(lo),
            money_label(hi),
            money_label(lo),
            money_label(low_hi)
        )
        .ok();
        for (f, l) in full.iter().zip(&low) {
            writeln!(md, "| {} | {} | {} |", f.algorithm, cell(f.mean, f.half_width), cell(l.mean, l.half_width)).ok();
        }
        md.push('\n');
    }

    let heading = |x: f64| match axis {
        Axis::Ratio => format!("{x}"),
        _ => money_label(x),
    };
    let mut table = |title: &str, dataset: Option<&str>, metric: Metric| -> Result<(), BenchError> {
        writeln!(md, "## {title}\n").ok();
        write!(md, "| Algorithm |").ok();
        for &x in &xs {
            write!(md, " {} |", heading(x)).ok();
        }
        md.push_str("\n|---|");
        md.push_str(&"---|".repeat(xs.len()));
        md.push('\n');
        for (algorithm, points) in curves(rows, metric, dataset)? {
            write!(md, "| {algorithm} |").ok();
            for &x in &xs {
                match points.iter().find(|p| p.0 == x) {
                    Some(p) => write!(md, " {} |", cell(p.1, p.2)).ok(),
                    None => write!(md, " - |").ok(),
                };
            }
            md.push('\n');
        }
        md.push('\n');
        Ok(())
    };
    table(
        &format!("Normalized cost by {}, all datasets", axis.title().to_lowercase()),
        None,
        Metric::NormalizedCost,
    )?;
    for d in &sets {
        table(&format!("Normalized cost, {d}"), Some(d), Metric::NormalizedCost)?;
    }
    table("Test expenditure (% of all tests), all datasets", None, Metric::TestExpenditure)?;
    table("Error rate (%), all datasets", None, Metric::ErrorRate)?;
    Ok(md)
}
