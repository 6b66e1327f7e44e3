//! `soco`: run algorithms, W-sweeps, lemma audits and bound tables for the
//! built-in experiments.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numeric failure (the
//! error is printed to stderr as JSON).

mod ranges;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ranges::{Seeds, Windows};
use soco_core::analysis::{audit_algorithm, default_family, regret_bound};
use soco_core::experiments::dispatch_data::{synthetic_profile, write_dispatch_csv};
use soco_core::experiments::{
    build_instance, run_sweep, write_metadata_json, write_results_csv, write_timing_csv,
    write_trajectory_csv, ExperimentId, ExperimentSpec, ProfileSource, SweepRequest,
};
use soco_core::{offline_optimum, Algorithm, BoundConstants, BoundFamily, SocoError};

#[derive(Parser)]
#[command(
    name = "soco",
    version,
    about = "Smoothed online convex optimization with predictions"
)]
struct Cli {
    /// Log one line per sweep cell.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run algorithms on one seeded instance and print a JSON summary.
    Run(RunArgs),
    /// Sweep algorithms over windows and seeds; write CSV and JSON results.
    Sweep(SweepArgs),
    /// Audit the per-layer lemmas of an offline run; prints an AuditReport.
    Audit(AuditArgs),
    /// Tabulate the regret bounds per window.
    Bounds(BoundsArgs),
    /// Write a seeded synthetic demand / supply profile.
    GenDispatchData(GenArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment id, E1..E7.
    #[arg(long = "exp", value_parser = parse_experiment)]
    experiment: ExperimentId,
    /// Override the switching weight gamma.
    #[arg(long)]
    gamma: Option<f64>,
    /// Demand / supply CSV for E7 (header `hour,demand_mw,supply_mw`).
    #[arg(long)]
    dispatch_csv: Option<PathBuf>,
}

impl ExperimentArgs {
    fn spec(&self) -> ExperimentSpec {
        let mut spec = ExperimentSpec::default_for(self.experiment);
        if let Some(g) = self.gamma {
            spec = spec.with_gamma(g);
        }
        if let Some(path) = &self.dispatch_csv {
            spec = spec.with_profile(ProfileSource::Csv { path: path.clone() });
        }
        spec
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Algorithms, comma separated (default: the experiment roster).
    #[arg(long = "algo", alias = "algos", value_delimiter = ',', value_parser = parse_algorithm)]
    algorithms: Vec<Algorithm>,
    /// Prediction window.
    #[arg(long = "w", value_parser = parse_window)]
    window: usize,
    #[arg(long)]
    seed: u64,
    /// Also write results, timing, trajectory and metadata files here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Algorithms, comma separated (default: the experiment roster).
    #[arg(long = "algos", alias = "algo", value_delimiter = ',', value_parser = parse_algorithm)]
    algorithms: Vec<Algorithm>,
    /// Windows as `a..b` (inclusive) and/or a comma list (default: 1..15).
    #[arg(long = "w", value_parser = ranges::windows)]
    windows: Option<Windows>,
    /// Seeds as `a..b` and/or a comma list.
    #[arg(long = "seed", alias = "seeds", value_parser = ranges::seeds)]
    seeds: Seeds,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Also write trajectory.csv.
    #[arg(long)]
    trajectories: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    General,
    Quadratic,
    Smooth,
}

impl From<FamilyArg> for BoundFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::General => BoundFamily::General,
            FamilyArg::Quadratic => BoundFamily::Quadratic,
            FamilyArg::Smooth => BoundFamily::Smooth,
        }
    }
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// rhapd or rhapd_s.
    #[arg(long, value_parser = parse_algorithm)]
    algo: Algorithm,
    /// Number of audited layers.
    #[arg(long = "w", value_parser = parse_window)]
    window: usize,
    #[arg(long)]
    seed: u64,
    /// Constants family (default: the one matching the algorithm).
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// Step size (default: the algorithm's default).
    #[arg(long)]
    tau: Option<f64>,
    /// Also write audit.json here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Windows as `a..b` and/or a comma list.
    #[arg(long = "w", value_parser = ranges::windows)]
    windows: Windows,
    /// Seed of the instance supplying G and the path length. Without it only
    /// the data-independent columns are filled.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write bounds.csv here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 168)]
    hours: usize,
    #[arg(long)]
    out: PathBuf,
}

fn parse_experiment(s: &str) -> Result<ExperimentId, String> {
    s.parse().map_err(|e: SocoError| e.to_string())
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: SocoError| e.to_string())
}

fn parse_window(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(w) if w >= 1 => Ok(w),
        _ => Err(format!("'{s}' is not a positive window")),
    }
}

fn create_dir(out: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))
}

fn writer(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn cmd_sweep(
    args: &SweepArgs,
    request_trajectories: bool,
) -> anyhow::Result<soco_core::experiments::SweepResult> {
    let spec = args.exp.spec();
    let request = SweepRequest {
        algorithms: if args.algorithms.is_empty() {
            spec.algorithms.clone()
        } else {
            args.algorithms.clone()
        },
        windows: args
            .windows
            .clone()
            .map(|w| w.0)
            .unwrap_or_else(|| spec.windows.clone()),
        seeds: args.seeds.0.clone(),
        jobs: args.jobs,
        keep_trajectories: request_trajectories,
    };
    if request.jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    if let Some(w) = request.windows.iter().find(|w| **w > spec.horizon) {
        bail!("window {w} exceeds the horizon {}", spec.horizon);
    }
    create_dir(&args.out)?;
    let result = run_sweep(&spec, &request)?;
    write_outputs(&result, &args.out, request_trajectories)?;
    Ok(result)
}

fn write_outputs(
    result: &soco_core::experiments::SweepResult,
    out: &Path,
    trajectories: bool,
) -> anyhow::Result<()> {
    write_results_csv(result, writer(out, "results.csv")?)?;
    write_timing_csv(result, writer(out, "timing.csv")?)?;
    write_metadata_json(result, writer(out, "metadata.json")?)?;
    if trajectories {
        write_trajectory_csv(result, writer(out, "trajectory.csv")?)?;
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> anyhow::Result<()> {
    let spec = args.exp.spec();
    if args.window > spec.horizon {
        bail!("window {} exceeds the horizon {}", args.window, spec.horizon);
    }
    let algorithms = if args.algorithms.is_empty() {
        spec.algorithms.clone()
    } else {
        args.algorithms.clone()
    };
    let request = SweepRequest {
        algorithms,
        windows: vec![args.window],
        seeds: vec![args.seed],
        jobs: 1,
        keep_trajectories: true,
    };
    let result = run_sweep(&spec, &request)?;
    if let Some(out) = &args.out {
        create_dir(out)?;
        write_outputs(&result, out, true)?;
    }
    let summary = json!({
        "experiment": spec.id,
        "window": args.window,
        "seed": args.seed,
        "jstar": result.seeds[0].jstar,
        "path_length": result.seeds[0].path_length,
        "runs": result.rows.iter().map(|r| json!({
            "algorithm": r.algorithm,
            "outcome": r.outcome,
        })).collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn cmd_audit(args: &AuditArgs) -> anyhow::Result<bool> {
    let spec = args.exp.spec();
    if args.window > spec.horizon {
        bail!("window {} exceeds the horizon {}", args.window, spec.horizon);
    }
    let inst = build_instance(&spec, args.seed)?.with_window(args.window)?;
    let family = match args.family {
        Some(f) => f.into(),
        None => default_family(args.algo, &inst)?,
    };
    let mut config = spec.config_for(args.algo, &inst);
    if let Some(tau) = args.tau {
        config = config.with_tau(tau);
    }
    let optimum = offline_optimum(&inst)?;
    let report = audit_algorithm(args.algo, &inst, &config, family, &optimum)?;
    let text = serde_json::to_string_pretty(&report)?;
    if let Some(out) = &args.out {
        create_dir(out)?;
        let mut w = writer(out, "audit.json")?;
        writeln!(w, "{text}")?;
        w.flush()?;
    }
    println!("{text}");
    Ok(report.pass)
}

/// Families with a regret bound for the experiment, each at its default step.
fn bound_families(inst: &soco_core::ProblemInstance) -> Vec<(BoundFamily, f64)> {
    let gamma = inst.switching().gamma();
    let c = inst.constants();
    let mut out = Vec::new();
    if inst.all_proximable() && gamma > 0.0 {
        if inst.switching().is_quadratic() {
            out.push((BoundFamily::Quadratic, 0.8 / gamma));
        }
        out.push((BoundFamily::General, 0.8 / gamma));
    }
    if let (Some(l), true) = (c.l, inst.switching().is_quadratic()) {
        out.push((BoundFamily::Smooth, 1.0 / l));
    }
    out
}

fn cmd_bounds(args: &BoundsArgs) -> anyhow::Result<()> {
    let spec = args.exp.spec();
    let windows = &args.windows.0;
    // Curvature and step constants do not depend on the random draws; G and
    // the path length do and are only reported for an explicit seed.
    let inst = build_instance(&spec, args.seed.unwrap_or(0))?;
    let mut lines = vec!["W,family,tau,rho,beta,rate,rate_pow_w,prefactor,path_length,bound".to_string()];
    for (family, tau) in bound_families(&inst) {
        let c = match BoundConstants::new(&inst, tau, family) {
            Ok(c) => c,
            Err(e) => {
                log::warn!("{family:?} constants unavailable: {e}");
                continue;
            }
        };
        let (rho, beta_sq) = c.decrease_pair();
        for w in windows {
            let rate_w = c.rate().powi(*w as i32);
            let (prefactor, path, bound) = match args.seed {
                Some(_) => {
                    let path = inst.path_length();
                    (
                        format!("{:.16e}", c.prefactor()),
                        format!("{path:.16e}"),
                        format!("{:.16e}", regret_bound(&c, *w, path)),
                    )
                }
                None => (String::new(), String::new(), String::new()),
            };
            lines.push(format!(
                "{w},{},{tau:.16e},{rho:.16e},{:.16e},{:.16e},{rate_w:.16e},{prefactor},{path},{bound}",
                serde_json::to_value(family)?.as_str().unwrap_or_default(),
                beta_sq.sqrt(),
                c.rate(),
            ));
        }
    }
    let text = lines.join("\n") + "\n";
    if let Some(out) = &args.out {
        create_dir(out)?;
        let mut w = writer(out, "bounds.csv")?;
        w.write_all(text.as_bytes())?;
        w.flush()?;
    }
    print!("{text}");
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> anyhow::Result<()> {
    if args.hours == 0 {
        bail!("--hours must be positive");
    }
    create_dir(&args.out)?;
    let profile = synthetic_profile(args.hours, args.seed);
    let mut w = writer(&args.out, "dispatch.csv")?;
    write_dispatch_csv(&profile, &mut w)?;
    w.flush()?;
    Ok(())
}

fn error_json(err: &anyhow::Error) -> serde_json::Value {
    match err.downcast_ref::<SocoError>() {
        Some(e) => {
            let mut v = json!({ "error": e.kind(), "message": e.to_string() });
            match e {
                SocoError::Convergence {
                    solver,
                    iterations,
                    residual,
                    secondary,
                } => {
                    v["solver"] = json!(solver);
                    v["iterations"] = json!(iterations);
                    v["residual"] = json!(residual);
                    v["secondary"] = json!(secondary);
                }
                SocoError::Parse { line, .. } => v["line"] = json!(line),
                SocoError::Length { expected, found } => {
                    v["expected"] = json!(expected);
                    v["found"] = json!(found);
                }
                _ => {}
            }
            v
        }
        None => json!({ "error": "usage", "message": format!("{err:#}") }),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .init();

    let outcome = match &cli.command {
        Command::Run(a) => cmd_run(a).map(|_| true),
        Command::Sweep(a) => cmd_sweep(a, a.trajectories).map(|_| true),
        Command::Audit(a) => cmd_audit(a),
        Command::Bounds(a) => cmd_bounds(a).map(|_| true),
        Command::GenDispatchData(a) => cmd_gen(a).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!(
                "{}",
                json!({ "error": "audit_failed", "message": "at least one audited inequality is violated" })
            );
            ExitCode::from(2)
        }
        Err(err) => {
            let numeric = err.downcast_ref::<SocoError>().is_some_and(SocoError::is_numeric);
            eprintln!("{}", error_json(&err));
            ExitCode::from(if numeric { 2 } else { 1 })
        }
    }
}
