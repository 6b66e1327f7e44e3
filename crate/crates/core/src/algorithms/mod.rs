//! Online and offline solvers.
//!
//! Every first-order method here is a rule for one cell `x_t^(k)` of a
//! layered iterate grid. Online runs fill the grid in receding-horizon
//! order and commit `x_t^(W)`; the offline twins fill it layer by layer.

mod exact;
mod grid;
mod init;
mod rules;
mod schedule;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use exact::{offline_optimum, offline_optimum_with, ConvergenceSettings, OfflineOptimum};
pub use grid::IterateGrid;
pub use init::{initial_layer, Initialization};

use crate::error::{Result, SocoError};
use crate::problem::{CostBreakdown, ProblemInstance, Trajectory};
use rules::{ApgdRule, ApgdSRule, BlockMinRule, JacobiRule, JacobiStep, UpdateRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Rhapd,
    RhapdS,
    Rham,
    Pgd,
    Fista,
    Rhgd,
    Rhag,
    Mpc,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::Rhapd,
        Algorithm::RhapdS,
        Algorithm::Rham,
        Algorithm::Pgd,
        Algorithm::Fista,
        Algorithm::Rhgd,
        Algorithm::Rhag,
        Algorithm::Mpc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Rhapd => "rhapd",
            Algorithm::RhapdS => "rhapd_s",
            Algorithm::Rham => "rham",
            Algorithm::Pgd => "pgd",
            Algorithm::Fista => "fista",
            Algorithm::Rhgd => "rhgd",
            Algorithm::Rhag => "rhag",
            Algorithm::Mpc => "mpc",
        }
    }

    /// `Err(reason)` if the algorithm cannot run on this instance.
    pub fn check_supported(&self, inst: &ProblemInstance) -> std::result::Result<(), String> {
        let quadratic = inst.switching().is_quadratic();
        match self {
            Algorithm::Rhapd | Algorithm::Pgd | Algorithm::Fista if !inst.all_proximable() => {
                Err("requires proximable stage costs".into())
            }
            Algorithm::Rham if !inst.all_proximable() => Err("requires proximable stage costs".into()),
            Algorithm::Rham if !quadratic => Err("requires a quadratic switching cost".into()),
            Algorithm::RhapdS | Algorithm::Rhgd | Algorithm::Rhag if !inst.all_smooth() => {
                Err("requires smooth stage costs".into())
            }
            Algorithm::RhapdS | Algorithm::Rhgd | Algorithm::Rhag if !quadratic => {
                Err("requires a quadratic switching cost".into())
            }
            Algorithm::Mpc if !inst.all_proximable() && !(inst.all_smooth() && quadratic) => {
                Err("no block solver for these stage and switching costs".into())
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = SocoError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Algorithm::ALL
            .iter()
            .copied()
            .find(|a| a.name() == key)
            .ok_or_else(|| SocoError::InvalidArgument(format!("unknown algorithm '{s}'")))
    }
}

/// Step sizes and policies for one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlgorithmConfig {
    /// Prox / projected step `tau`.
    pub tau: f64,
    /// Per-stage steps; overrides `tau` for RHAPD when set.
    pub stage_tau: Option<Vec<f64>>,
    /// Gradient step on the full objective (RHGD, RHAG).
    pub eta_g: f64,
    /// Constant momentum (RHAG).
    pub momentum: f64,
    pub init: Initialization,
    /// Keep the iterate grid in the result.
    pub record_grid: bool,
    /// Inner solver stopping rule (MPC).
    pub convergence: ConvergenceSettings,
}

impl AlgorithmConfig {
    /// Default step sizes:
    /// RHAPD `0.8/gamma`, RHAPD-S `1/l`, PGD/FISTA `1/L_gradH`,
    /// RHGD/RHAG `eta_G = 1/L_gradJ` with RHAG momentum
    /// `(sqrt(L_gradJ) - sqrt(mu)) / (sqrt(L_gradJ) + sqrt(mu))`.
    /// Smooth instances start from OGD with `eta = 1/l`, others from policy I.
    /// When `gamma = 0` the switching-based steps fall back to 1.
    pub fn for_algorithm(alg: Algorithm, inst: &ProblemInstance) -> Self {
        let gamma = inst.switching().gamma();
        let c = inst.constants();
        let sc = inst.switching().smoothness_constants(c.l);
        let positive_or_one = |v: f64| if v.is_finite() && v > 0.0 { v } else { 1.0 };
        let l = c.l.unwrap_or(1.0);
        let l_grad_j = sc.l_grad_j.unwrap_or(1.0);
        let tau = match alg {
            Algorithm::RhapdS => 1.0 / l,
            Algorithm::Pgd | Algorithm::Fista => positive_or_one(1.0 / sc.l_grad_h),
            _ => positive_or_one(0.8 / gamma),
        };
        let momentum = {
            let (sl, sm) = (l_grad_j.sqrt(), c.mu.sqrt());
            (sl - sm) / (sl + sm)
        };
        let init = match c.l {
            Some(l) => Initialization::Ogd { eta: 1.0 / l },
            None => Initialization::PolicyI,
        };
        Self {
            tau,
            stage_tau: None,
            eta_g: 1.0 / l_grad_j,
            momentum,
            init,
            record_grid: false,
            convergence: ConvergenceSettings::mpc(),
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_stage_tau(mut self, taus: Vec<f64>) -> Self {
        self.stage_tau = Some(taus);
        self
    }

    pub fn with_init(mut self, init: Initialization) -> Self {
        self.init = init;
        self
    }

    pub fn with_grid(mut self) -> Self {
        self.record_grid = true;
        self
    }

    fn stage_taus(&self, n: usize) -> Result<Vec<f64>> {
        let taus = self.stage_tau.clone().unwrap_or_else(|| vec![self.tau; n]);
        if taus.len() != n {
            return Err(SocoError::Length {
                expected: n,
                found: taus.len(),
            });
        }
        for t in &taus {
            check_step("tau", *t)?;
        }
        Ok(taus)
    }
}

fn check_step(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SocoError::InvalidStepSize(format!(
            "{name} = {v} must be positive and finite"
        )))
    }
}

/// Outcome of a single online run.
#[derive(Clone, Debug, Serialize)]
pub struct RunResult {
    pub algorithm: Algorithm,
    pub window: usize,
    pub trajectory: Trajectory,
    pub breakdown: CostBreakdown,
    pub stage_costs: Vec<f64>,
    /// Filled in once the offline optimum is known.
    pub regret: Option<f64>,
    #[serde(skip)]
    pub wall_time: Duration,
    #[serde(skip)]
    pub grid: Option<IterateGrid>,
}

fn build_rule(
    alg: Algorithm,
    inst: &ProblemInstance,
    config: &AlgorithmConfig,
    layers: usize,
) -> Result<Box<dyn UpdateRule>> {
    Ok(match alg {
        Algorithm::Rhapd => Box::new(ApgdRule {
            taus: config.stage_taus(inst.horizon())?,
        }),
        Algorithm::Rham => Box::new(BlockMinRule),
        Algorithm::RhapdS => {
            check_step("tau", config.tau)?;
            Box::new(ApgdSRule { tau: config.tau })
        }
        Algorithm::Pgd | Algorithm::Fista => {
            check_step("tau", config.tau)?;
            let momentum = if alg == Algorithm::Fista {
                rules::fista_momentum(layers)
            } else {
                vec![0.0; layers + 1]
            };
            Box::new(JacobiRule {
                step: JacobiStep::Prox(config.tau),
                momentum,
            })
        }
        Algorithm::Rhgd | Algorithm::Rhag => {
            check_step("eta_g", config.eta_g)?;
            let mut momentum = vec![0.0; layers + 1];
            if alg == Algorithm::Rhag {
                momentum.iter_mut().skip(1).for_each(|m| *m = config.momentum);
            }
            Box::new(JacobiRule {
                step: JacobiStep::Gradient(config.eta_g),
                momentum,
            })
        }
        Algorithm::Mpc => return Err(SocoError::InvalidArgument("MPC is not a layered method".into())),
    })
}

fn ensure_supported(alg: Algorithm, inst: &ProblemInstance) -> Result<()> {
    alg.check_supported(inst)
        .map_err(|reason| SocoError::Unsupported {
            operation: alg.name(),
            family: reason,
        })
}

/// Runs `alg` online with window `inst.window()`.
pub fn run(alg: Algorithm, inst: &ProblemInstance, config: &AlgorithmConfig) -> Result<RunResult> {
    ensure_supported(alg, inst)?;
    let start = Instant::now();
    let (points, grid) = if alg == Algorithm::Mpc {
        (exact::mpc(inst, config.convergence)?, None)
    } else {
        let rule = build_rule(alg, inst, config, inst.window())?;
        let (points, grid) = schedule::receding_horizon(inst, rule.as_ref(), config.init)?;
        (points, Some(grid))
    };
    let wall_time = start.elapsed();
    let breakdown = inst.cost_of(&points)?;
    let stage_costs = inst.stage_costs(&points)?;
    Ok(RunResult {
        algorithm: alg,
        window: inst.window(),
        trajectory: Trajectory(points),
        breakdown,
        stage_costs,
        regret: None,
        wall_time,
        grid: if config.record_grid { grid } else { None },
    })
}

/// The same update rule applied offline for `layers` full sweeps starting
/// from the configured initialization.
pub fn run_offline(
    alg: Algorithm,
    inst: &ProblemInstance,
    config: &AlgorithmConfig,
    layers: usize,
) -> Result<IterateGrid> {
    ensure_supported(alg, inst)?;
    let rule = build_rule(alg, inst, config, layers)?;
    let layer0 = initial_layer(inst, config.init)?;
    schedule::layered(inst, rule.as_ref(), &layer0, layers)
}

/// Offline alternating proximal gradient descent with per-stage steps.
pub fn apgd_offline(
    inst: &ProblemInstance,
    taus: &[f64],
    layer0: &[Vec<f64>],
    layers: usize,
) -> Result<IterateGrid> {
    ensure_supported(Algorithm::Rhapd, inst)?;
    if taus.len() != inst.horizon() {
        return Err(SocoError::Length {
            expected: inst.horizon(),
            found: taus.len(),
        });
    }
    for t in taus {
        check_step("tau", *t)?;
    }
    let rule = ApgdRule { taus: taus.to_vec() };
    schedule::layered(inst, &rule, layer0, layers)
}

/// Offline alternating projected steps for smooth stages.
pub fn apgd_s_offline(
    inst: &ProblemInstance,
    tau: f64,
    layer0: &[Vec<f64>],
    layers: usize,
) -> Result<IterateGrid> {
    ensure_supported(Algorithm::RhapdS, inst)?;
    check_step("tau", tau)?;
    schedule::layered(inst, &ApgdSRule { tau }, layer0, layers)
}

/// One alternating update of block `t` from its inputs: the proximal step
/// or, with `smooth`, the projected step for smooth stages.
pub(crate) fn cell_update(
    inst: &ProblemInstance,
    smooth: bool,
    tau: f64,
    t: usize,
    prev: &[f64],
    cur: &[f64],
    next: Option<&[f64]>,
) -> Result<Vec<f64>> {
    if smooth {
        rules::apgd_s_step(inst, t, tau, prev, cur, next)
    } else {
        rules::apgd_step(inst, t, tau, prev, cur, next)
    }
}

pub fn rhapd(inst: &ProblemInstance, config: &AlgorithmConfig) -> Result<RunResult> {
    run(Algorithm::Rhapd, inst, config)
}

pub fn rhapd_s(inst: &ProblemInstance, config: &AlgorithmConfig) -> Result<RunResult> {
    run(Algorithm::RhapdS, inst, config)
}

pub fn rham(inst: &ProblemInstance, config: &AlgorithmConfig) -> Result<RunResult> {
    run(Algorithm::Rham, inst, config)
}

pub fn pgd_online(inst: &ProblemInstance, config: &AlgorithmConfig) -> Result<RunResult> {
    run(Algorithm::Pgd, inst, config)
}

pub fn fista_online(inst: &ProblemInstance, config: &AlgorithmConfig) -> Result<RunResult> {
    run(Algorithm::Fista, inst, config)
}

pub fn rhgd(inst: &ProblemInstance, config: &AlgorithmConfig) -> Result<RunResult> {
    run(Algorithm::Rhgd, inst, config)
}

pub fn rhag(inst: &ProblemInstance, config: &AlgorithmConfig) -> Result<RunResult> {
    run(Algorithm::Rhag, inst, config)
}

pub fn mpc(inst: &ProblemInstance, config: &AlgorithmConfig) -> Result<RunResult> {
    run(Algorithm::Mpc, inst, config)
}
