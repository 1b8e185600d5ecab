//! Command-line front end: `classify`, `orbit`, `solve`, `sweep`, `validate`.
//!
//! Exit codes: 0 success, 1 numerical failure (or a failed validation),
//! 2 usage or configuration error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::Value;

use crate::config::RunConfig;
use crate::error::{Result, ShellError};
use crate::geodesics::{integrate_orbit_with, verify_class, OrbitOptions};
use crate::output::{fmt_f64, json_f64, object, write_json, write_mu_lambda, write_profiles};
use crate::potential::{ParameterPoint, Schwarzschild};
use crate::solver::{solve_fixed_point, ShellProblem, ShellSolution};
use crate::validation::{validate, validate_with_fault, Fault, Thresholds, ValidationReport};

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "VLASOV_SHELL_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "vlasov-shell",
    version,
    about = "Static Vlasov matter shells around a Schwarzschild black hole"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print l bounds, turning points and the orbit class of (E, l).
    Classify(ClassifyArgs),
    /// Integrate a radial geodesic and write `tau,r,w` rows.
    Orbit(OrbitArgs),
    /// Solve one shell and write mu_lambda.csv, profiles.csv, summary.json.
    Solve(SolveArgs),
    /// Solve for each delta and write sweep.csv.
    Sweep(SweepArgs),
    /// Solve, run the residual checks (optionally under a fault) and write
    /// validation.json.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[arg(long = "M", default_value_t = 1.0)]
    pub mass: f64,
    #[arg(long = "E")]
    pub e: f64,
    #[arg(long = "l")]
    pub ell: f64,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub point: PointArgs,
    /// Initial radius; without it only roots and bounds are printed.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub inward: bool,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long)]
    pub r: f64,
    #[arg(long)]
    pub inward: bool,
    #[arg(long, default_value_t = 2000.0)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Keep every n-th step in the CSV.
    #[arg(long, default_value_t = 100)]
    pub stride: usize,
    /// CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub config: PathBuf,
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub deltas: Vec<f64>,
    /// Run the solves concurrently.
    #[arg(long)]
    pub parallel: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub config: PathBuf,
    /// scale_mu, zero_pt, truncate_shell or amplitude_blowup; overrides
    /// `validate.fault` in the config.
    #[arg(long)]
    pub fault: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn exit_code(err: &ShellError) -> u8 {
    match err {
        ShellError::Config(_) => 2,
        _ => 1,
    }
}

/// Sizes the global rayon pool from [`THREADS_ENV`] when it is set.
pub fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| {
            ShellError::Config(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))
        })?;
        if n == 0 {
            return Err(ShellError::Config(format!("{THREADS_ENV} must be >= 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ShellError::Config(e.to_string()))?;
    }
    Ok(())
}

/// Runs one command, writing human-readable output to `out`. Returns the
/// process exit code on completion.
pub fn execute<W: Write>(cli: &Cli, out: &mut W) -> Result<u8> {
    match &cli.command {
        Command::Classify(a) => classify(a, out),
        Command::Orbit(a) => orbit(a, out),
        Command::Solve(a) => solve(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Validate(a) => validate_cmd(a, out),
    }
}

fn classify<W: Write>(a: &ClassifyArgs, out: &mut W) -> Result<u8> {
    let sch = Schwarzschild::new(a.point.mass)?;
    let point = ParameterPoint::new(a.point.e, a.point.ell)?;
    writeln!(out, "M = {}", a.point.mass)?;
    writeln!(out, "E = {}", point.e)?;
    writeln!(out, "l = {}", point.ell)?;
    match sch.l_bounds(point.e) {
        Ok(b) => {
            writeln!(out, "l_lb(E) = {}", fmt_f64(b.lower))?;
            match b.upper {
                Some(u) => writeln!(out, "l_ub(E) = {}", fmt_f64(u))?,
                None => writeln!(out, "l_ub(E) = none (E >= 1)")?,
            }
            if (point.ell - b.lower).abs() <= 1e-12 * b.lower {
                writeln!(
                    out,
                    "note: l = l_lb(E); E^2 equals the barrier maximum (boundary case)"
                )?;
            }
        }
        Err(_) => writeln!(out, "l bounds: undefined for E <= sqrt(8/9)")?,
    }
    writeln!(out, "region = {:?}", sch.region(point))?;
    let roots = sch.roots(point);
    let listed: Vec<String> = roots
        .roots()
        .iter()
        .map(|r| format!("{} (multiplicity {})", fmt_f64(r.r), r.multiplicity))
        .collect();
    writeln!(out, "roots = [{}]", listed.join(", "))?;
    if let Some(r) = a.r {
        let class = sch.classify_orbit(point, r, a.inward)?;
        writeln!(out, "r = {r}")?;
        writeln!(out, "class = {class}")?;
    }
    Ok(0)
}

fn orbit<W: Write>(a: &OrbitArgs, out: &mut W) -> Result<u8> {
    let sch = Schwarzschild::new(a.point.mass)?;
    let point = ParameterPoint::new(a.point.e, a.point.ell)?;
    let class = sch.classify_orbit(point, a.r, a.inward)?;
    let opts = OrbitOptions {
        tau_max: a.tau_max,
        step: a.step,
        stride: a.stride,
    };
    let sign = if a.inward { -1.0 } else { 1.0 };
    let traj = integrate_orbit_with(&sch, point, a.r, sign, opts)?;
    match &a.out {
        Some(path) => {
            let file = fs::File::create(path)?;
            traj.write_csv(std::io::BufWriter::new(file))?;
            let check = verify_class(&traj, class);
            writeln!(out, "class = {class}")?;
            writeln!(out, "termination = {}", traj.termination.as_str())?;
            writeln!(out, "turning_points = {}", traj.turning_points.len())?;
            writeln!(
                out,
                "max_conservation_error = {:e}",
                traj.max_conservation_error
            )?;
            writeln!(out, "signature_agrees = {}", check.agrees)?;
            writeln!(out, "wrote {}", path.display())?;
        }
        None => traj.write_csv(&mut *out)?,
    }
    Ok(0)
}

fn load(config: &Path) -> Result<(RunConfig, ShellProblem)> {
    let cfg = RunConfig::load(config)?;
    let problem = cfg.problem()?;
    Ok((cfg, problem))
}

fn output_dir(cli_out: &Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cli_out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// `summary.json` content for a solved and validated shell.
pub fn summary_json(cfg: &RunConfig, sol: &ShellSolution, report: &ValidationReport) -> Value {
    object([
        ("M", json_f64(sol.mass_parameter())),
        ("delta", json_f64(sol.delta())),
        ("Rmin", json_f64(sol.r_min)),
        ("Rmax", json_f64(sol.r_max)),
        ("Mdelta", json_f64(sol.m_delta)),
        ("iterations", Value::from(sol.iterations)),
        ("final_update_norm", json_f64(sol.final_update_norm)),
        ("lapse_constant", json_f64(sol.lapse_constant())),
        (
            "residuals",
            object([
                ("rev1", json_f64(report.rev1_residual)),
                ("rev2", json_f64(report.rev2_residual)),
                ("tov", json_f64(report.tov_residual)),
            ]),
        ),
        ("Mdelta_direct", json_f64(sol.m_delta_direct)),
        ("validation_passed", Value::Bool(report.passed())),
        (
            "domain",
            object([
                ("rho", json_f64(sol.bounds.rho)),
                ("R", json_f64(sol.bounds.r_outer)),
                ("delta_max", json_f64(sol.bounds.delta_max)),
            ]),
        ),
        (
            "update_norms",
            Value::Array(sol.update_norms.iter().map(|&n| json_f64(n)).collect()),
        ),
        ("config", cfg.to_json(&sol.problem)),
    ])
}

fn solve<W: Write>(a: &SolveArgs, out: &mut W) -> Result<u8> {
    let (cfg, problem) = load(&a.config)?;
    let dir = output_dir(&a.out, &cfg)?;
    let sol = solve_fixed_point(&problem)?;
    let report = validate(&sol, Thresholds::default())?;
    let mut buf = Vec::new();
    write_mu_lambda(&sol, &mut buf)?;
    fs::write(dir.join("mu_lambda.csv"), &buf)?;
    buf.clear();
    write_profiles(&sol, &mut buf)?;
    fs::write(dir.join("profiles.csv"), &buf)?;
    write_json(
        &dir.join("summary.json"),
        &summary_json(&cfg, &sol, &report),
    )?;
    writeln!(
        out,
        "converged in {} iterations: Mdelta = {}, Rmin = {}, Rmax = {}",
        sol.iterations,
        fmt_f64(sol.m_delta),
        fmt_f64(sol.r_min),
        fmt_f64(sol.r_max)
    )?;
    writeln!(out, "wrote {}", dir.display())?;
    Ok(0)
}

fn sweep<W: Write>(a: &SweepArgs, out: &mut W) -> Result<u8> {
    let (cfg, problem) = load(&a.config)?;
    let dir = output_dir(&a.out, &cfg)?;
    let run = |&delta: &f64| -> String {
        let result = problem
            .with_delta(delta)
            .and_then(|p| solve_fixed_point(&p));
        match result {
            Ok(s) => format!(
                "{},{},{},{},{},ok",
                fmt_f64(delta),
                fmt_f64(s.m_delta),
                fmt_f64(s.r_min),
                fmt_f64(s.r_max),
                s.iterations
            ),
            Err(e) => format!("{},NaN,NaN,NaN,0,{}", fmt_f64(delta), e.kind()),
        }
    };
    let rows: Vec<String> = if a.parallel {
        a.deltas.par_iter().map(run).collect()
    } else {
        a.deltas.iter().map(run).collect()
    };
    let mut text = String::from("delta,Mdelta,Rmin,Rmax,iterations,status\n");
    for row in &rows {
        text.push_str(row);
        text.push('\n');
    }
    let path = dir.join("sweep.csv");
    fs::write(&path, text)?;
    let failed = rows.iter().filter(|r| !r.ends_with(",ok")).count();
    writeln!(
        out,
        "{} solves, {} failed; wrote {}",
        rows.len(),
        failed,
        path.display()
    )?;
    Ok(0)
}

fn validate_cmd<W: Write>(a: &ValidateArgs, out: &mut W) -> Result<u8> {
    let (cfg, problem) = load(&a.config)?;
    let fault = match &a.fault {
        Some(name) => Some(Fault::parse(name)?),
        None => cfg.fault()?,
    };
    let dir = output_dir(&a.out, &cfg)?;
    let thresholds = Thresholds::default();
    let sol = solve_fixed_point(&problem)?;
    let report = match fault {
        Some(f) => validate_with_fault(&problem, &sol, f, thresholds)?,
        None => validate(&sol, thresholds)?,
    };
    let doc = object([
        ("report", report.to_json()),
        ("config", cfg.to_json(&problem)),
    ]);
    let path = dir.join("validation.json");
    write_json(&path, &doc)?;
    writeln!(
        out,
        "validation {}{}; wrote {}",
        if report.passed() { "passed" } else { "FAILED" },
        fault
            .map(|f| format!(" (fault {})", f.name()))
            .unwrap_or_default(),
        path.display()
    )?;
    Ok(if report.passed() { 0 } else { 1 })
}
