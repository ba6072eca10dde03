//! `bandlab`: band products of hyperbolic metric spaces at the command
//! line. Reports are JSON with top-level keys `config`, `measurements`,
//! `criteria`, and `duration_ms`; the exit code is 0 exactly when every
//! asserted criterion passes.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use bandlab_cli::experiments;
use bandlab_cli::ExperimentConfig;
use bandlab_core::metric::{matrix_to_csv, MatrixFile};

#[derive(Parser)]
#[command(
    name = "bandlab",
    about = "Sample band products of hyperbolic spaces, measure hyperbolicity constants, and audit almost-geodesic witnesses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the criterion slack of config-driven experiments.
    #[arg(long, global = true, allow_negative_numbers = true)]
    tolerance: Option<f64>,
    /// Size of the worker pool for the enumeration kernels.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Report format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Hyperbolicity constants of a distance-matrix file (CSV or JSON).
    Delta {
        matrix: PathBuf,
        /// Basepoint index for the three-point constant.
        #[arg(long, default_value_t = 0)]
        base: usize,
    },
    /// Draw band points from a band spec and write them to a file.
    BandSample {
        band: PathBuf,
        #[arg(short)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10.0)]
        radius_cap: f64,
        #[arg(short, long)]
        out: PathBuf,
        /// Also write the materialized distance matrix (JSON).
        #[arg(long)]
        emit_matrix: Option<PathBuf>,
    },
    /// Product bound experiment on a sampled band.
    Theorem1 { config: PathBuf },
    /// Almost-geodesic witness audit.
    Theorem2 { config: PathBuf },
    /// Euclidean-metric divergence family.
    Counterexample { config: PathBuf },
    /// Busemann-anchored band: bound, audit, and boundary probes.
    Limitcase { config: PathBuf },
    /// Convergence/equivalence probe over explicit sequences.
    Probe { seqs: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("bandlab: could not size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(pass) => {
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("bandlab: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &PathBuf, cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(t) = cli.tolerance {
        config.tolerance = t;
    }
    Ok(config)
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let report = match &cli.command {
        Command::Delta { matrix, base } => {
            let text = fs::read_to_string(matrix)
                .with_context(|| format!("reading matrix {}", matrix.display()))?;
            let report = experiments::run_delta(&text, *base)?;
            if cli.format == Format::Csv {
                let space = experiments::parse_matrix(&text, *base)?;
                emit(cli, &experiments::quadruple_defect_csv(&space))?;
                eprint!("{}", report.summary_lines());
                return Ok(true);
            }
            report
        }
        Command::BandSample {
            band,
            n,
            seed,
            radius_cap,
            out,
            emit_matrix,
        } => {
            let text = fs::read_to_string(band)
                .with_context(|| format!("reading band spec {}", band.display()))?;
            let (band_space, pts) = experiments::run_band_sample(&text, *n, *radius_cap, *seed)?;
            let payload = json!({
                "band": serde_json::from_str::<serde_json::Value>(&text)?,
                "seed": seed,
                "radius_cap": radius_cap,
                "points": pts,
            });
            fs::write(out, serde_json::to_string_pretty(&payload)?)
                .with_context(|| format!("writing {}", out.display()))?;
            if let Some(path) = emit_matrix {
                let space = band_space.materialize(&pts)?;
                let text = if path.extension().is_some_and(|e| e == "csv") {
                    matrix_to_csv(&space)
                } else {
                    serde_json::to_string_pretty(&MatrixFile::from_space(&space))?
                };
                fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            eprintln!("wrote {} band points to {}", pts.len(), out.display());
            return Ok(true);
        }
        Command::Theorem1 { config } => {
            experiments::run_theorem1(&load_config(config, cli)?)?
        }
        Command::Theorem2 { config } => {
            experiments::run_theorem2_audit(&load_config(config, cli)?)?
        }
        Command::Counterexample { config } => {
            experiments::run_counterexample(&load_config(config, cli)?)?
        }
        Command::Limitcase { config } => {
            experiments::run_limitcase(&load_config(config, cli)?)?
        }
        Command::Probe { seqs } => {
            let text = fs::read_to_string(seqs)
                .with_context(|| format!("reading sequences {}", seqs.display()))?;
            experiments::run_probe(&text)?
        }
    };

    let rendered = match cli.format {
        Format::Json => report.to_json(),
        Format::Csv => report.criteria_csv(),
    };
    emit(cli, &rendered)?;
    eprint!("{}", report.summary_lines());
    Ok(report.all_pass())
}

fn emit(cli: &Cli, text: &str) -> anyhow::Result<()> {
    match &cli.output {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("writing report to {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}
