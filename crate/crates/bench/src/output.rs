//! Row files, summary tables and plots.

use std::fs;
use std::path::{Path, PathBuf};

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Axis;
use crate::experiment::{GaLogRow, ResultRow};
use crate::summary::{curves, datasets, render_summary, Metric};
use crate::BenchError;

pub const ROWS_FILE: &str = "rows.csv";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const SUMMARY_FILE: &str = "summary.md";
pub const GA_LOG_FILE: &str = "ga_log.csv";
pub const PLOT_DIR: &str = "plots";

/// A row without its wall time, so the file is byte-stable across runs.
#[derive(Serialize, Deserialize)]
struct RowRecord {
    dataset: String,
    algorithm: String,
    axis: Axis,
    x: f64,
    split: usize,
    average_cost: f64,
    normalized_cost_pct: f64,
    test_expenditure_pct: f64,
    error_rate_pct: f64,
}

#[derive(Serialize)]
struct TimingRecord<'a> {
    dataset: &'a str,
    algorithm: &'a str,
    x: f64,
    split: usize,
    wall_time: f64,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> BenchError + '_ {
    move |e| BenchError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn write_rows(rows: &[ResultRow], path: &Path) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for r in rows {
        w.serialize(RowRecord {
            dataset: r.dataset.clone(),
            algorithm: r.algorithm.clone(),
            axis: r.axis,
            x: r.x,
            split: r.split,
            average_cost: r.average_cost,
            normalized_cost_pct: r.normalized_cost_pct,
            test_expenditure_pct: r.test_expenditure_pct,
            error_rate_pct: r.error_rate_pct,
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>, BenchError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize::<RowRecord>()
        .map(|rec| {
            let rec = rec.map_err(csv_err(path))?;
            Ok(ResultRow {
                dataset: rec.dataset,
                algorithm: rec.algorithm,
                axis: rec.axis,
                x: rec.x,
                split: rec.split,
                average_cost: rec.average_cost,
                normalized_cost_pct: rec.normalized_cost_pct,
                test_expenditure_pct: rec.test_expenditure_pct,
                error_rate_pct: rec.error_rate_pct,
                wall_time: 0.0,
            })
        })
        .collect()
}

fn write_timings(rows: &[ResultRow], path: &Path) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for r in rows {
        w.serialize(TimingRecord {
            dataset: &r.dataset,
            algorithm: &r.algorithm,
            x: r.x,
            split: r.split,
            wall_time: r.wall_time,
        })
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_ga_log(log: &[GaLogRow], path: &Path) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for g in log {
        w.serialize(g).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes the row file, timings, summary and plots into `out_dir`. Nothing
/// is written when `rows` is empty.
pub fn emit_outputs(rows: &[ResultRow], out_dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    if rows.is_empty() {
        return Err(BenchError::NoRows);
    }
    let summary = render_summary(rows)?;
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let rows_path = out_dir.join(ROWS_FILE);
    write_rows(rows, &rows_path)?;
    let timings_path = out_dir.join(TIMINGS_FILE);
    write_timings(rows, &timings_path)?;
    let summary_path = out_dir.join(SUMMARY_FILE);
    fs::write(&summary_path, summary).map_err(io_err(&summary_path))?;
    let mut written = vec![rows_path, timings_path, summary_path];
    written.extend(plot_all(rows, &out_dir.join(PLOT_DIR))?);
    Ok(written)
}

fn plot_err(path: &Path) -> impl Fn(String) -> BenchError + '_ {
    move |message| BenchError::Plot {
        path: path.to_path_buf(),
        message,
    }
}

const PALETTE: [RGBColor; 8] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
    RGBColor(227, 119, 194),
    RGBColor(127, 127, 127),
];

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
}

fn line_chart(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[Series],
) -> Result<(), BenchError> {
    let err = plot_err(path);
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let (x_lo, x_hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    let y_hi = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .fold(0.0f64, f64::max);
    let y_hi = (y_hi * 1.1).max(1.0);
    let (x_lo, x_hi) = if x_lo < x_hi {
        (x_lo, x_hi)
    } else {
        (x_lo * 0.5, x_lo * 2.0)
    };
    let root = SVGBackend::new(path, (640, 420)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| err(e.to_string()))?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d((x_lo..x_hi).log_scale(), 0.0..y_hi)
        .map_err(|e| err(e.to_string()))?;
    chart
        .configure_mesh()
        .x_desc(x_label)
        .y_desc(y_label)
        .draw()
        .map_err(|e| err(e.to_string()))?;
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(s.points.iter().copied(), color.stroke_width(2)))
            .map_err(|e| err(e.to_string()))?
            .label(s.name.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color));
        chart
            .draw_series(s.points.iter().map(|&p| Circle::new(p, 3, color.filled())))
            .map_err(|e| err(e.to_string()))?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| err(e.to_string()))?;
    root.present().map_err(|e| err(e.to_string()))
}

fn file_stem(dataset: Option<&str>) -> String {
    dataset.unwrap_or("average").to_string()
}

/// Normalized cost per algorithm against x for each dataset and for the
/// dataset average; for every ICET-family label, test expenditure and error
/// rate against x the same way.
pub fn plot_all(rows: &[ResultRow], dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    if rows.is_empty() {
        return Err(BenchError::NoRows);
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let axis = rows[0].axis;
    let mut panels: Vec<Option<String>> = datasets(rows).into_iter().map(Some).collect();
    panels.push(None);
    let mut written = Vec::new();
    for panel in &panels {
        let d = panel.as_deref();
        let title = d.map_or("Average of all datasets".to_string(), str::to_string);
        let series: Vec<Series> = curves(rows, Metric::NormalizedCost, d)?
            .into_iter()
            .map(|(name, pts)| Series {
                name,
                points: pts.iter().map(|p| (p.0, p.1)).collect(),
            })
            .collect();
        let path = dir.join(format!("cost_{}.svg", file_stem(d)));
        line_chart(&path, &title, axis.title(), "% of standard cost", &series)?;
        written.push(path);

        let expenditure = curves(rows, Metric::TestExpenditure, d)?;
        let errors = curves(rows, Metric::ErrorRate, d)?;
        let mut series = Vec::new();
        for ((name, e), (_, r)) in expenditure.iter().zip(&errors) {
            if !name.starts_with("ICET") {
                continue;
            }
            series.push(Series {
                name: format!("{name} test expenditure %"),
                points: e.iter().map(|p| (p.0, p.1)).collect(),
            });
            series.push(Series {
                name: format!("{name} error rate %"),
                points: r.iter().map(|p| (p.0, p.1)).collect(),
            });
        }
        if !series.is_empty() {
            let path = dir.join(format!("icet_{}.svg", file_stem(d)));
            line_chart(&path, &title, axis.title(), "percent", &series)?;
            written.push(path);
        }
    }
    Ok(written)
}
