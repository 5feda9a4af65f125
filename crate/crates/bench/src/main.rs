use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use icet_bench::config::{Algorithm, ExperimentConfig, Scale, Variant};
use icet_bench::output::{plot_all, read_rows, write_ga_log, GA_LOG_FILE, PLOT_DIR, ROWS_FILE};
use icet_bench::summary::render_summary;
use icet_bench::{emit_outputs, run_experiment};
use icet_core::Money;

#[derive(Parser)]
#[command(name = "icet", version, about = "Cost-sensitive decision tree experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write rows, summary and plots.
    Run(RunArgs),
    /// Print the summary tables for an existing row file.
    Summarize {
        /// Row file, or a directory containing rows.csv.
        #[arg(long, default_value = "results")]
        rows: PathBuf,
    },
    /// Render plots from an existing row file.
    Plot {
        #[arg(long, default_value = "results")]
        rows: PathBuf,
        /// Output directory for SVG files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Comma-separated dataset names.
    #[arg(long, value_delimiter = ',')]
    datasets: Option<Vec<String>>,
    /// Comma-separated subset of ICET, EG2, CSID3, IDX, C45.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
    /// Comma-separated error costs in dollars (simple matrices only).
    #[arg(long, value_delimiter = ',')]
    error_costs: Option<Vec<f64>>,
    #[arg(long)]
    splits: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "baseline")]
    variant: Variant,
    #[arg(long, value_enum, default_value = "desk")]
    scale: Scale,
    #[arg(long, default_value = "results")]
    out: PathBuf,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn rows_path(p: PathBuf) -> PathBuf {
    if p.is_dir() {
        p.join(ROWS_FILE)
    } else {
        p
    }
}

fn config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(args.variant, args.scale);
    cfg.seed = args.seed;
    if let Some(d) = &args.datasets {
        cfg.datasets = d.clone();
    }
    if let Some(a) = &args.algorithms {
        cfg.algorithms = a
            .iter()
            .map(|s| s.parse::<Algorithm>())
            .collect::<Result<_, _>>()?;
    }
    if let Some(costs) = &args.error_costs {
        let costs = costs
            .iter()
            .map(|&c| Money::from_dollars(c).with_context(|| format!("bad error cost {c}")))
            .collect::<Result<Vec<_>>>()?;
        cfg = cfg.with_error_costs(costs);
    }
    if let Some(s) = args.splits {
        cfg.splits = s;
    }
    if let Some(d) = &args.data_dir {
        cfg.data_dir = d.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => {
            if let Some(n) = args.threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .context("configuring worker threads")?;
            }
            let cfg = config(&args)?;
            eprintln!(
                "running {:?} at {:?} scale: {} datasets, {} splits",
                args.variant,
                args.scale,
                cfg.datasets.len(),
                cfg.splits
            );
            let run = run_experiment(&cfg)?;
            let written = emit_outputs(&run.rows, &args.out)?;
            if !run.ga_log.is_empty() {
                write_ga_log(&run.ga_log, &args.out.join(GA_LOG_FILE))?;
            }
            print!("{}", render_summary(&run.rows)?);
            eprintln!("wrote {} files to {}", written.len() + 1, args.out.display());
        }
        Command::Summarize { rows } => {
            let rows = read_rows(&rows_path(rows))?;
            print!("{}", render_summary(&rows)?);
        }
        Command::Plot { rows, out } => {
            let path = rows_path(rows);
            let dir = out.unwrap_or_else(|| {
                path.parent()
                    .map(|p| p.join(PLOT_DIR))
                    .unwrap_or_else(|| PathBuf::from(PLOT_DIR))
            });
            let rows = read_rows(&path)?;
            for p in plot_all(&rows, &dir)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}
