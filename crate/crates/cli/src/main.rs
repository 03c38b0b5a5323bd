//! `fairopt`: selection under a partially known utility weight.
//!
//! Every command reads an optional TOML config plus flag overrides, runs one
//! analysis, and writes a single report (JSON, sectioned CSV, or a plain
//! summary) to stdout or atomically to `--out`. Exit codes tell scripts what
//! went wrong: 2 bad configuration, 3 bad input data, 4 infeasible
//! constraint, 5 singular Hessian, 6 refused as too large.

mod commands;
mod config;
mod ingest;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use fairopt_core::Error;

use crate::config::{FileConfig, Format, Settings};

#[derive(Parser)]
#[command(
    name = "fairopt",
    version,
    about = "Fair selection over a family of utility-optimal choices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// CSV data file (overrides [data].path)
    #[arg(long)]
    data: Option<PathBuf>,
    /// TOML config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Column holding the group label (overrides [data].group_column)
    #[arg(long)]
    group_column: Option<String>,
    /// Selection size
    #[arg(long)]
    k: Option<usize>,
    /// Reference theta (exact: integers, fractions like 1/3, or decimals)
    #[arg(long)]
    theta: Option<String>,
    /// Lower end of the theta interval
    #[arg(long)]
    theta_lo: Option<String>,
    /// Upper end of the theta interval
    #[arg(long)]
    theta_hi: Option<String>,
    /// Two group labels for the mismatch score, e.g. --groups m,f
    #[arg(long, value_delimiter = ',')]
    groups: Option<Vec<String>>,
    /// Group label protected by the quota
    #[arg(long)]
    quota_label: Option<String>,
    /// Minimum share for the quota group, e.g. 3/10
    #[arg(long)]
    quota_share: Option<String>,
    /// Sample budget for box/hull theta domains
    #[arg(long)]
    samples: Option<usize>,
    /// Seed for every randomized step
    #[arg(long)]
    seed: Option<u64>,
    /// Report format
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here (atomically) instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Explicit theta grid, e.g. --grid 1/5,7/20,1/2
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<String>>,
    /// Number of evenly spaced grid points across the interval
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args)]
struct AscentArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Registered smooth problem to run
    #[arg(long)]
    problem: Option<String>,
    /// Inner (solution) step size
    #[arg(long)]
    alpha: Option<f64>,
    /// Outer (theta) step size
    #[arg(long)]
    beta: Option<f64>,
    /// Iteration cap
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Convergence tolerance on step norms
    #[arg(long)]
    tolerance: Option<f64>,
    /// Solve the inner problem exactly each outer step
    #[arg(long)]
    exact_inner: bool,
    /// Run a finite-difference gradient audit at this epsilon
    #[arg(long)]
    epsilon: Option<f64>,
    /// Initial theta, comma separated
    #[arg(long, value_delimiter = ',')]
    theta0: Option<Vec<f64>>,
    /// Initial solution, comma separated
    #[arg(long, value_delimiter = ',')]
    s0: Option<Vec<f64>>,
}

#[derive(Subcommand)]
enum Command {
    /// Optima at a reference theta, the optimal family, and its fairest member
    Solve(CommonArgs),
    /// Per-item scores and optima across a theta grid
    Sweep(SweepArgs),
    /// Frontier sections and the inclusion chain between them
    Pareto(CommonArgs),
    /// Quota baseline regret versus the no-regret fairest pick
    Compare(CommonArgs),
    /// Alternating fairness ascent on a registered smooth problem
    Ascent(AscentArgs),
    /// Endpoint completion search and imputation audit for interval data
    Audit(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Solve(c) | Command::Pareto(c) | Command::Compare(c) | Command::Audit(c) => c,
            Command::Sweep(s) => &s.common,
            Command::Ascent(a) => &a.common,
        }
    }
}

/// File config first, then flags override field by field.
fn resolve_settings(command: &Command) -> fairopt_core::Result<Settings> {
    let common = command.common();
    let file = match &common.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let mut settings = Settings::from_file(file)?;

    if let Some(data) = &common.data {
        settings.data = Some(data.clone());
    }
    if let Some(group_column) = &common.group_column {
        settings.group_column = Some(group_column.clone());
    }
    if let Some(k) = common.k {
        settings.k = Some(k);
    }
    if let Some(theta) = &common.theta {
        settings.theta_value = Some(theta.parse()?);
    }
    if let Some(lo) = &common.theta_lo {
        settings.theta_lo = Some(lo.parse()?);
    }
    if let Some(hi) = &common.theta_hi {
        settings.theta_hi = Some(hi.parse()?);
    }
    if let Some(groups) = &common.groups {
        if groups.len() != 2 {
            return Err(Error::Parameter(format!(
                "--groups takes exactly two labels, got {}",
                groups.len()
            )));
        }
        settings.groups = Some(groups.clone());
    }
    if let Some(label) = &common.quota_label {
        settings.quota_label = Some(label.clone());
    }
    if let Some(share) = &common.quota_share {
        settings.quota_share = Some(share.parse()?);
    }
    if let Some(samples) = common.samples {
        settings.samples = Some(samples);
    }
    if let Some(seed) = common.seed {
        settings.seed = Some(seed);
    }
    if let Some(format) = common.format {
        settings.format = format;
    }
    if let Some(out) = &common.out {
        settings.out = Some(out.clone());
    }

    match command {
        Command::Sweep(args) => {
            if let Some(grid) = &args.grid {
                settings.grid =
                    Some(grid.iter().map(|g| g.parse()).collect::<fairopt_core::Result<_>>()?);
            }
            if let Some(steps) = args.steps {
                settings.steps = Some(steps);
            }
        }
        Command::Ascent(args) => {
            let ascent = &mut settings.ascent;
            if let Some(problem) = &args.problem {
                ascent.problem = Some(problem.clone());
            }
            if let Some(alpha) = args.alpha {
                ascent.alpha = Some(alpha);
            }
            if let Some(beta) = args.beta {
                ascent.beta = Some(beta);
            }
            if let Some(max_iterations) = args.max_iterations {
                ascent.max_iterations = Some(max_iterations);
            }
            if let Some(tolerance) = args.tolerance {
                ascent.tolerance = Some(tolerance);
            }
            if args.exact_inner {
                ascent.exact_inner = true;
            }
            if let Some(epsilon) = args.epsilon {
                ascent.epsilon = Some(epsilon);
            }
            if let Some(theta0) = &args.theta0 {
                ascent.theta0 = Some(theta0.clone());
            }
            if let Some(s0) = &args.s0 {
                ascent.s0 = Some(s0.clone());
            }
        }
        _ => {}
    }
    Ok(settings)
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Ingestion { .. } => 3,
        Error::Infeasible(_) => 4,
        Error::SingularHessian { .. } => 5,
        Error::Complexity { .. } => 6,
        _ => 2,
    }
}

fn run() -> Result<u8, (String, u8)> {
    let cli = Cli::parse();
    let started = Instant::now();
    let settings =
        resolve_settings(&cli.command).map_err(|e| (e.to_string(), exit_code_for(&e)))?;
    let output = match &cli.command {
        Command::Solve(_) => commands::solve(&settings),
        Command::Sweep(_) => commands::sweep(&settings),
        Command::Pareto(_) => commands::pareto(&settings),
        Command::Compare(_) => commands::compare(&settings),
        Command::Ascent(_) => commands::ascent(&settings),
        Command::Audit(_) => commands::audit(&settings),
    }
    .map_err(|e| (e.to_string(), exit_code_for(&e)))?;

    match &settings.out {
        Some(path) => report::write_atomically(path, &output.bytes)
            .map_err(|e| (format!("cannot write report to {}: {e}", path.display()), 1))?,
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&output.bytes)
                .map_err(|e| (format!("cannot write report to stdout: {e}"), 1))?;
        }
    }
    // Timing stays out of the report so identical runs stay byte-identical.
    eprintln!("completed in {:.3}s", started.elapsed().as_secs_f64());
    Ok(output.exit_code as u8)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err((message, code)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
