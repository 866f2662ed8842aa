//! Subcommands of the `mdi` tool.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mdi_core::stationarity::MidpointStatus;
use mdi_core::{audit, sample_path, solve, SolverConfig, StationarityReport, Verdict};

use crate::csv::samples_to_csv;
use crate::error::CliError;
use crate::files::{read_problem, read_result, to_json, write_text, Diagnostics, ResultFile};
use crate::svg::render_svg;

/// Environment variable capping the number of solver threads.
pub const THREADS_ENV: &str = "MDI_THREADS";

#[derive(Debug, Parser)]
#[command(name = "mdi", version, about = "Shortest curvature-bounded curves through ordered waypoints")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a problem file by multi-start local optimization.
    Solve(SolveArgs),
    /// Re-verify a result file and audit it against the necessary conditions.
    Check(CheckArgs),
    /// Export a dense sampling of a result as CSV.
    Sample(SampleArgs),
    /// Render a result as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub problem: PathBuf,
    #[arg(long, default_value_t = 32)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub coarse_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub refine_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub prune_eps: f64,
    /// Result file for the best solution.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write every other solution found as `<stem>-<rank>.json` next to `--out`.
    #[arg(long, requires = "out")]
    pub all: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub result: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    pub result: PathBuf,
    /// Arc-length spacing of the samples.
    #[arg(long)]
    pub ds: f64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    pub result: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Image width in pixels.
    #[arg(long, default_value_t = 800)]
    pub width: u32,
}

/// Runs a parsed command line, writing human-readable output to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Solve(a) => run_solve(a, threads_from_env()?, out),
        Command::Check(a) => run_check(a, out),
        Command::Sample(a) => run_sample(a, out),
        Command::Render(a) => run_render(a, out),
    }
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Invalid(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Io { path: "<stdout>".into(), source: e })
}

fn ranked_path(out: &Path, rank: usize) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}-{rank}.json"))
}

pub fn run_solve(args: &SolveArgs, threads: Option<usize>, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = read_problem(&args.problem)?.to_spec()?;
    let config = SolverConfig {
        coarse_tol: args.coarse_tol,
        refine_tol: args.refine_tol,
        prune_eps: args.prune_eps,
        multistart_count: args.starts,
        random_seed: args.seed,
        threads,
        ..SolverConfig::default()
    };
    let outcome = solve(&spec, &config)?;
    let best = outcome.best();
    emit(out, &format!("word {}\nlength {:.12}\n", best.word, best.total_length()))?;
    emit(
        out,
        &format!(
            "solutions {} (converged {} of {} starts)\n",
            outcome.solutions.len(),
            outcome.converged,
            outcome.starts_attempted
        ),
    )?;
    let Some(path) = &args.out else { return Ok(()) };
    let count = if args.all { outcome.solutions.len() } else { 1 };
    for (i, (sol, record)) in outcome.solutions.iter().zip(&outcome.records).take(count).enumerate() {
        let rank = i + 1;
        let diag = Diagnostics::new(outcome.starts_attempted, outcome.converged, outcome.seed, rank, record);
        let file = ResultFile::new(sol, &audit(sol), Some(diag));
        let target = if rank == 1 { path.clone() } else { ranked_path(path, rank) };
        write_text(&target, &to_json(&file))?;
    }
    Ok(())
}

/// Human-readable summary of an audit.
pub fn format_report(word: &str, total: f64, r: &StationarityReport<f64>) -> String {
    let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.3e}"));
    let mut s = format!("word {word}\nlength {total:.12}\nverdict {}\n", r.verdict.name());
    s += &format!("feasibility residual {:.3e}\n", r.feasibility_residual);
    s += &format!("lambda0 {}\n", r.lambda0.map_or("n/a".to_string(), |v| format!("{v}")));
    s += &format!(
        "equality residual {}\nmin slack {}\nellipse residual {}\n",
        opt(r.equality_residual),
        opt(r.min_slack),
        opt(r.ellipse_residual)
    );
    for st in &r.stages {
        let m = st.multiplier.map_or(String::new(), |m| format!(" rho {:.12} phi {:.12}", m.rho, m.phi));
        s += &format!("stage {} {} {}{}\n", st.stage, st.class.word, st.class.kind.name(), m);
    }
    for n in &r.nodes {
        s += &format!("node {} sign_switch {} residual {}\n", n.node, n.sign_switch, opt(n.residual));
    }
    for m in &r.midpoint {
        let status = match m.status {
            MidpointStatus::Pass => "pass",
            MidpointStatus::Fail => "fail",
            MidpointStatus::NotApplicable => "not_applicable",
        };
        s += &format!("midpoint node {} {}\n", m.node, status);
    }
    let b = &r.subarc_bound;
    s += &format!("subarcs {} bound {} sign_switch {} ok {}\n", b.merged_count, b.bound, b.sign_switch, b.ok);
    s
}

pub fn run_check(args: &CheckArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let sol = read_result(&args.result)?.solution()?;
    let report = audit(&sol);
    emit(out, &format_report(&sol.word, sol.total_length(), &report))?;
    if report.verdict == Verdict::Stationary {
        Ok(())
    } else {
        Err(CliError::NotStationary(report.verdict.name().to_string()))
    }
}

fn write_or_emit(path: Option<&PathBuf>, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => write_text(p, text),
        None => emit(out, text),
    }
}

pub fn run_sample(args: &SampleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !(args.ds > 0.0 && args.ds.is_finite()) {
        return Err(CliError::Invalid(format!("--ds must be a positive number, got {}", args.ds)));
    }
    let sol = read_result(&args.result)?.solution()?;
    let path = sample_path(&sol.problem, &sol.xi, args.ds);
    write_or_emit(args.csv.as_ref(), &samples_to_csv(&path), out)
}

pub fn run_render(args: &RenderArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.width == 0 {
        return Err(CliError::Invalid("--width must be positive".into()));
    }
    let sol = read_result(&args.result)?.solution()?;
    write_or_emit(args.svg.as_ref(), &render_svg(&sol, args.width), out)
}
