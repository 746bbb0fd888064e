//! `proxsplit` command line.
//!
//! Exit codes: 0 success, 1 runtime or I/O failure, 2 invalid arguments,
//! 3 unsupported solver subproblem.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use super::lasso::{gen_lasso, LassoSpec};
use super::mpc::{self, MpcSpec};
use super::sweep::{log_grid, run_sweep};
use crate::error::Error;
use crate::linalg::DiagonalMetric;
use crate::metric::{dual_condition_number, gamma_from_metric, MetricReport};
use crate::rates::{competing_rates, DualRegularity, Regularity};
use crate::splitting::CSV_HEADER;
use crate::worstcase::{report_csv, verify_grid, ALPHAS, GAMMA_RATIOS, KAPPAS};

#[derive(Debug, Parser)]
#[command(name = "proxsplit", version, about = "Douglas-Rachford / ADMM rate experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Step-size sweep on a random weighted Lasso problem.
    Lasso(SweepArgs),
    /// Step-size sweep on the aircraft MPC problem.
    Mpc(SweepArgs),
    /// Check measured rates on the worst-case instances against the bound.
    WorstcaseVerify(WorstcaseArgs),
    /// Competing optimal rate bounds over a grid of dual condition numbers.
    RatesTable(RatesArgs),
    /// Selected metric and resulting dual condition number.
    MetricReport(MetricArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricChoice {
    Identity,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProblemChoice {
    Lasso,
    Mpc,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    /// Relaxation; defaults to 1 for lasso and 0.5 for mpc.
    #[arg(long)]
    alpha: Option<f64>,
    /// Smallest step size as a multiple of the recommended one.
    #[arg(long, default_value_t = 0.01)]
    gamma_min: f64,
    /// Largest step size as a multiple of the recommended one.
    #[arg(long, default_value_t = 100.0)]
    gamma_max: f64,
    #[arg(long, default_value_t = 41)]
    gamma_points: usize,
    #[arg(long, value_enum, default_value_t = MetricChoice::Auto)]
    metric: MetricChoice,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    /// Full-size instance (Lasso 300×200, MPC 120-sample closed loop).
    #[arg(long)]
    full: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct WorstcaseArgs {
    #[arg(long, requires = "sigma")]
    beta: Option<f64>,
    #[arg(long, requires = "beta")]
    sigma: Option<f64>,
    /// Run ADMM on the dual instances instead of Douglas-Rachford.
    #[arg(long)]
    dual: bool,
    #[arg(long, default_value_t = 30)]
    iters: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RatesArgs {
    /// Comma-separated dual condition numbers; default 50 log-spaced
    /// values in [1, 1e6].
    #[arg(long, value_delimiter = ',')]
    kappa_grid: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MetricArgs {
    #[arg(long, value_enum, default_value_t = ProblemChoice::Lasso)]
    problem: ProblemChoice,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = MetricChoice::Auto)]
    metric: MetricChoice,
    #[arg(long)]
    full: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Solver(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Solver(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.into())
    }
}

/// Runs the command line and returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(Failure::Solver(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Capability { .. } => 3,
                Error::InvalidParameter(_) | Error::DimensionMismatch { .. } => 2,
                _ => 1,
            }
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Lasso(a) => lasso(&a),
        Command::Mpc(a) => mpc_cmd(&a),
        Command::WorstcaseVerify(a) => worstcase(&a),
        Command::RatesTable(a) => rates_table(&a),
        Command::MetricReport(a) => metric_report(&a),
    }
}

fn lasso(a: &SweepArgs) -> Result<(), Failure> {
    let spec = if a.full {
        LassoSpec {
            seed: a.seed,
            ..LassoSpec::default()
        }
    } else {
        LassoSpec::desk(a.seed)
    };
    let inst = gen_lasso(&spec)?;
    let metric = match a.metric {
        MetricChoice::Identity => None,
        MetricChoice::Auto => Some(inst.select_metric()?),
    };
    let dual = inst.dual_regularity(metric.as_ref()).ok();
    let center = dual.map(|d| d.as_regularity().gamma_star()).unwrap_or(1.0);
    let grid = log_grid(center, a.gamma_min, a.gamma_max, a.gamma_points)?;
    let res = run_sweep(
        &inst.problem,
        dual.as_ref(),
        metric.as_ref(),
        a.alpha.unwrap_or(1.0),
        &grid,
        center,
        a.tol,
        a.max_iters,
    )?;
    std::fs::write(&a.out, res.to_csv())?;
    Ok(())
}

fn mpc_cmd(a: &SweepArgs) -> Result<(), Failure> {
    let spec = MpcSpec::default();
    let alpha = a.alpha.unwrap_or(0.5);
    let inst = mpc::single_sample(&spec)?;
    let h = inst.heuristic_metric()?;
    let (metric, center) = match a.metric {
        MetricChoice::Identity => (None, gamma_from_metric(&h.unscaled)),
        MetricChoice::Auto => (Some(h.metric.clone()), h.gamma),
    };
    if !a.full {
        let grid = log_grid(center, a.gamma_min, a.gamma_max, a.gamma_points)?;
        let res = run_sweep(&inst.problem, None, metric.as_ref(), alpha, &grid, center, a.tol, a.max_iters)?;
        std::fs::write(&a.out, res.to_csv())?;
        return Ok(());
    }
    let mults = log_grid(1.0, a.gamma_min, a.gamma_max, a.gamma_points)?;
    let auto = metric.is_some();
    let reports: Vec<_> = mults
        .par_iter()
        .map(|&m| mpc::closed_loop(&spec, 120, auto, m, alpha, a.tol, a.max_iters))
        .collect::<Result<_, _>>()?;
    let label = if auto { "auto" } else { "identity" };
    let mut out = String::new();
    writeln!(out, "{CSV_HEADER}").unwrap();
    writeln!(out, "metric,alpha,gamma,gamma_ratio,mean_iterations,median_iterations,all_converged").unwrap();
    for (m, r) in mults.iter().zip(&reports) {
        writeln!(
            out,
            "{label},{},{:.10e},{:.10e},{},{},{}",
            alpha,
            m * center,
            m,
            r.mean_iterations,
            r.median_iterations,
            r.converged.iter().all(|c| *c)
        )
        .unwrap();
    }
    std::fs::write(&a.out, out)?;
    Ok(())
}

fn worstcase(a: &WorstcaseArgs) -> Result<(), Failure> {
    let regs: Vec<Regularity> = match (a.beta, a.sigma) {
        (Some(b), Some(s)) => vec![Regularity::new(s, b)?],
        _ => KAPPAS
            .iter()
            .map(|&k| Regularity::new(1.0, k))
            .collect::<Result<_, _>>()?,
    };
    let mut rows = Vec::new();
    for r in &regs {
        rows.extend(verify_grid(r, a.dual, &GAMMA_RATIOS, &ALPHAS, a.iters)?);
    }
    std::fs::write(&a.out, report_csv(&rows))?;
    Ok(())
}

fn rates_table(a: &RatesArgs) -> Result<(), Failure> {
    let grid = match &a.kappa_grid {
        Some(g) if !g.is_empty() => g.clone(),
        _ => log_grid(1.0, 1.0, 1e6, 50)?,
    };
    let rows = grid
        .iter()
        .map(|&k| DualRegularity::new(1.0, k).map(|d| competing_rates(&d)))
        .collect::<Result<Vec<_>, _>>()?;
    std::fs::write(&a.out, serde_json::to_string_pretty(&rows)?)?;
    Ok(())
}

fn metric_report(a: &MetricArgs) -> Result<(), Failure> {
    let report = match a.problem {
        ProblemChoice::Lasso => {
            let spec = if a.full {
                LassoSpec {
                    seed: a.seed,
                    ..LassoSpec::default()
                }
            } else {
                LassoSpec::desk(a.seed)
            };
            let inst = gen_lasso(&spec)?;
            let gram = inst.gram();
            let e = match a.metric {
                MetricChoice::Identity => DiagonalMetric::identity(spec.n),
                MetricChoice::Auto => inst.select_metric()?,
            };
            let obj = dual_condition_number(&e, inst.problem.a(), &gram, &gram)?;
            MetricReport::new(&e, &obj)
        }
        ProblemChoice::Mpc => {
            let h = mpc::single_sample(&MpcSpec::default())?.heuristic_metric()?;
            match a.metric {
                MetricChoice::Identity => MetricReport::new(&DiagonalMetric::identity(h.metric.dim()), &h.unscaled),
                MetricChoice::Auto => MetricReport::new(&h.metric, &h.objective),
            }
        }
    };
    std::fs::write(&a.out, serde_json::to_string_pretty(&report)?)?;
    Ok(())
}
