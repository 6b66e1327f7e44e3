//! W-sweeps over an algorithm roster and seed ensemble, plus the CSV / JSON
//! writers for their results.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::rng::GENERATOR_ID;
use super::{build_instance, ExperimentSpec};
use crate::algorithms::{offline_optimum, run, Algorithm};
use crate::analysis::regret;
use crate::error::{Result, SocoError};
use crate::problem::{ProblemInstance, Trajectory};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRequest {
    pub algorithms: Vec<Algorithm>,
    pub windows: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Worker threads; 1 runs every cell on the calling thread.
    pub jobs: usize,
    /// Keep committed trajectories in the rows.
    pub keep_trajectories: bool,
}

impl SweepRequest {
    /// The spec's own roster and windows for the given seeds.
    pub fn from_spec(spec: &ExperimentSpec, seeds: Vec<u64>) -> Self {
        Self {
            algorithms: spec.algorithms.clone(),
            windows: spec.windows.clone(),
            seeds,
            jobs: 1,
            keep_trajectories: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub jstar: f64,
    pub path_length: f64,
    pub optimum_sweeps: usize,
    pub g_lipschitz: f64,
    pub mu: f64,
    pub l: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellOutcome {
    Completed {
        regret: f64,
        objective: f64,
        stage_total: f64,
        switch_total: f64,
        wall_us: f64,
    },
    Unsupported {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub algorithm: Algorithm,
    pub window: usize,
    pub seed: u64,
    pub path_length: f64,
    pub jstar: f64,
    pub outcome: CellOutcome,
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
}

impl SweepRow {
    pub fn regret(&self) -> Option<f64> {
        match self.outcome {
            CellOutcome::Completed { regret, .. } => Some(regret),
            CellOutcome::Unsupported { .. } => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub spec: ExperimentSpec,
    pub request: SweepRequest,
    pub seeds: Vec<SeedSummary>,
    /// Ordered by algorithm (roster order), then window, then seed.
    pub rows: Vec<SweepRow>,
    #[serde(skip)]
    pub instances: Vec<ProblemInstance>,
}

impl SweepResult {
    /// Regrets of `alg` at window `w`, one per seed, skipping unsupported cells.
    pub fn regrets(&self, alg: Algorithm, w: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.algorithm == alg && r.window == w)
            .filter_map(SweepRow::regret)
            .collect()
    }

    /// Median over seeds of the regret of `alg` at window `w`.
    pub fn median_regret(&self, alg: Algorithm, w: usize) -> Option<f64> {
        let mut v = self.regrets(alg, w);
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let m = v.len() / 2;
        Some(if v.len() % 2 == 1 {
            v[m]
        } else {
            0.5 * (v[m - 1] + v[m])
        })
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| SocoError::InvalidArgument(format!("cannot start worker pool: {e}")))
}

/// Runs every `(algorithm, W, seed)` cell. The offline optimum is computed
/// once per seed. Pairings the algorithm cannot handle become `Unsupported`
/// rows; numeric failures abort the sweep.
pub fn run_sweep(spec: &ExperimentSpec, request: &SweepRequest) -> Result<SweepResult> {
    if request.algorithms.is_empty() || request.windows.is_empty() || request.seeds.is_empty() {
        return Err(SocoError::InvalidArgument(
            "a sweep needs at least one algorithm, window and seed".into(),
        ));
    }
    let workers = pool(request.jobs)?;
    let (instances, optima) = workers.install(|| -> Result<_> {
        let instances: Vec<ProblemInstance> = request
            .seeds
            .par_iter()
            .map(|s| build_instance(spec, *s))
            .collect::<Result<_>>()?;
        let optima = instances
            .par_iter()
            .map(offline_optimum)
            .collect::<Result<Vec<_>>>()?;
        Ok((instances, optima))
    })?;
    let seeds: Vec<SeedSummary> = request
        .seeds
        .iter()
        .zip(&instances)
        .zip(&optima)
        .map(|((seed, inst), opt)| {
            let c = inst.constants();
            SeedSummary {
                seed: *seed,
                jstar: opt.objective,
                path_length: inst.path_length(),
                optimum_sweeps: opt.sweeps,
                g_lipschitz: c.g_lipschitz,
                mu: c.mu,
                l: c.l,
            }
        })
        .collect();

    let mut cells = Vec::new();
    for alg in &request.algorithms {
        for w in &request.windows {
            for i in 0..request.seeds.len() {
                cells.push((*alg, *w, i));
            }
        }
    }
    let rows = workers.install(|| {
        cells
            .par_iter()
            .map(|&(alg, w, i)| {
                let base = &instances[i];
                let summary = &seeds[i];
                let row = |outcome, trajectory| SweepRow {
                    algorithm: alg,
                    window: w,
                    seed: summary.seed,
                    path_length: summary.path_length,
                    jstar: summary.jstar,
                    outcome,
                    trajectory,
                };
                if let Err(reason) = alg.check_supported(base) {
                    return Ok(row(CellOutcome::Unsupported { reason }, None));
                }
                let inst = base.with_window(w)?;
                let config = spec.config_for(alg, &inst);
                let result = run(alg, &inst, &config)?;
                let r = regret(&inst, &result.trajectory.0, &optima[i])?;
                log::info!("{} {} W={} seed={} regret={r:e}", spec.id, alg, w, summary.seed);
                Ok(row(
                    CellOutcome::Completed {
                        regret: r,
                        objective: result.breakdown.objective,
                        stage_total: result.breakdown.stage_total,
                        switch_total: result.breakdown.switching_total,
                        wall_us: result.wall_time.as_secs_f64() * 1e6,
                    },
                    request.keep_trajectories.then_some(result.trajectory),
                ))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    Ok(SweepResult {
        spec: spec.clone(),
        request: request.clone(),
        seeds,
        rows,
        instances,
    })
}

fn csv_err(e: csv::Error) -> SocoError {
    SocoError::Io(std::io::Error::other(e))
}

/// 17 significant digits, enough to round-trip any `f64`.
fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_results_csv(result: &SweepResult, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "experiment",
        "algorithm",
        "W",
        "seed",
        "regret",
        "objective",
        "stage_total",
        "switch_total",
        "path_length",
        "jstar",
    ])
    .map_err(csv_err)?;
    for row in &result.rows {
        let (regret, objective, stage, switch) = match &row.outcome {
            CellOutcome::Completed {
                regret,
                objective,
                stage_total,
                switch_total,
                ..
            } => (
                real(*regret),
                real(*objective),
                real(*stage_total),
                real(*switch_total),
            ),
            CellOutcome::Unsupported { .. } => {
                ("unsupported".into(), String::new(), String::new(), String::new())
            }
        };
        w.write_record([
            result.spec.id.to_string(),
            row.algorithm.name().to_string(),
            row.window.to_string(),
            row.seed.to_string(),
            regret,
            objective,
            stage,
            switch,
            real(row.path_length),
            real(row.jstar),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timing_csv(result: &SweepResult, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["experiment", "algorithm", "W", "seed", "wall_us"])
        .map_err(csv_err)?;
    for row in &result.rows {
        if let CellOutcome::Completed { wall_us, .. } = row.outcome {
            w.write_record([
                result.spec.id.to_string(),
                row.algorithm.name().to_string(),
                row.window.to_string(),
                row.seed.to_string(),
                format!("{wall_us:.3}"),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Long-format trajectories: one line per `(row, t, coordinate)`, preceded
/// by the stage minimizers of every seed under the algorithm name `target`.
pub fn write_trajectory_csv(result: &SweepResult, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["experiment", "algorithm", "W", "seed", "t", "coord", "value"])
        .map_err(csv_err)?;
    let exp = result.spec.id.to_string();
    let mut emit = |alg: &str, window: usize, seed: u64, points: &[Vec<f64>]| -> Result<()> {
        for (t, x) in points.iter().enumerate() {
            for (i, v) in x.iter().enumerate() {
                w.write_record([
                    exp.clone(),
                    alg.to_string(),
                    window.to_string(),
                    seed.to_string(),
                    (t + 1).to_string(),
                    (i + 1).to_string(),
                    real(*v),
                ])
                .map_err(csv_err)?;
            }
        }
        Ok(())
    };
    for (summary, inst) in result.seeds.iter().zip(&result.instances) {
        emit("target", 0, summary.seed, inst.stage_minimizers())?;
    }
    for row in &result.rows {
        if let Some(traj) = &row.trajectory {
            emit(row.algorithm.name(), row.window, row.seed, &traj.0)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Metadata<'a> {
    library_version: &'static str,
    generator: &'static str,
    spec: &'a ExperimentSpec,
    algorithms: Vec<&'static str>,
    windows: &'a [usize],
    seeds: &'a [SeedSummary],
    unsupported: Vec<UnsupportedNote<'a>>,
}

#[derive(Serialize, PartialEq)]
struct UnsupportedNote<'a> {
    algorithm: &'static str,
    reason: &'a str,
}

pub fn write_metadata_json(result: &SweepResult, out: impl Write) -> Result<()> {
    let mut unsupported: Vec<UnsupportedNote> = Vec::new();
    for row in &result.rows {
        if let CellOutcome::Unsupported { reason } = &row.outcome {
            let note = UnsupportedNote {
                algorithm: row.algorithm.name(),
                reason,
            };
            if !unsupported.contains(&note) {
                unsupported.push(note);
            }
        }
    }
    let meta = Metadata {
        library_version: env!("CARGO_PKG_VERSION"),
        generator: GENERATOR_ID,
        spec: &result.spec,
        algorithms: result.request.algorithms.iter().map(|a| a.name()).collect(),
        windows: &result.request.windows,
        seeds: &result.seeds,
        unsupported,
    };
    serde_json::to_writer_pretty(out, &meta)?;
    Ok(())
}
