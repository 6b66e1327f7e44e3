//! Theory constants, regret bounds and lemma audits.

mod audit;
mod constants;

pub use audit::{audit_grid, witness, AuditReport, LayerAudit, AUDIT_TOLERANCE};
pub use constants::{BoundConstants, BoundFamily};

use serde::Serialize;

use crate::algorithms::{
    initial_layer, run_offline, Algorithm, AlgorithmConfig, Initialization, OfflineOptimum,
};
use crate::error::{Result, SocoError};
use crate::problem::ProblemInstance;

/// The constants family matching `alg` on `inst`: smooth for RHAPD-S,
/// quadratic for RHAPD with a quadratic switch, general otherwise.
pub fn default_family(alg: Algorithm, inst: &ProblemInstance) -> Result<BoundFamily> {
    match alg {
        Algorithm::RhapdS => Ok(BoundFamily::Smooth),
        Algorithm::Rhapd if inst.switching().is_quadratic() => Ok(BoundFamily::Quadratic),
        Algorithm::Rhapd => Ok(BoundFamily::General),
        other => Err(SocoError::Unsupported {
            operation: "lemma audit",
            family: format!("{other} (only rhapd and rhapd_s carry per-layer constants)"),
        }),
    }
}

/// Runs `alg` offline for `inst.window()` layers and audits every layer,
/// including the rate envelope against `optimum`.
pub fn audit_algorithm(
    alg: Algorithm,
    inst: &ProblemInstance,
    config: &AlgorithmConfig,
    family: BoundFamily,
    optimum: &OfflineOptimum,
) -> Result<AuditReport> {
    if config.stage_tau.is_some() {
        return Err(SocoError::InvalidArgument("audits need a constant step".into()));
    }
    default_family(alg, inst)?;
    let grid = run_offline(alg, inst, config, inst.window())?;
    let constants = BoundConstants::new(inst, config.tau, family)?;
    audit_grid(inst, &grid, &constants, Some(optimum))
}

/// `J(xs) - J*`. Negative values down to `-1e-9 (1 + |J*|)` are rounding
/// noise and are reported as 0.
pub fn regret(inst: &ProblemInstance, xs: &[Vec<f64>], optimum: &OfflineOptimum) -> Result<f64> {
    let r = inst.objective_difference(xs, &optimum.trajectory.0)?;
    Ok(clamp_regret(r, optimum.objective))
}

pub(crate) fn clamp_regret(r: f64, jstar: f64) -> f64 {
    if r >= 0.0 {
        r
    } else if r >= -1e-9 * (1.0 + jstar.abs()) {
        log::debug!("clamping regret {r:e} to 0");
        0.0
    } else {
        log::warn!("regret {r:e} is below the offline optimum; J* may be inexact");
        r
    }
}

/// Regret bound at window `w` for path length `path`.
pub fn regret_bound(constants: &BoundConstants, w: usize, path: f64) -> f64 {
    constants.prefactor() * constants.rate().powi(w as i32) * path
}

/// Bounds for `W = 1..=max_w` using the instance path length.
pub fn regret_bounds(constants: &BoundConstants, inst: &ProblemInstance, windows: &[usize]) -> Vec<f64> {
    let path = inst.path_length();
    windows
        .iter()
        .map(|w| regret_bound(constants, *w, path))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InitRegret {
    /// `G (1 + gamma/mu) * path length`
    pub bound: f64,
    /// `J(x^(0)) - J*` for the policy-I layer.
    pub measured: f64,
}

/// Regret of the policy-I initialization and its bound.
pub fn init_regret_bound(inst: &ProblemInstance, optimum: &OfflineOptimum) -> Result<InitRegret> {
    let c = inst.constants();
    let bound = c.g_lipschitz * (1.0 + inst.switching().gamma() / c.mu) * inst.path_length();
    let layer0 = initial_layer(inst, Initialization::PolicyI)?;
    let measured = regret(inst, &layer0, optimum)?;
    Ok(InitRegret { bound, measured })
}

/// Smallest `gamma` above which the RHAPD-S bound beats the RHGD bound at
/// `tau = 1/l`: `(mu + 3l + sqrt(mu^2 + 14 mu l + 65 l^2)) / 4`.
pub fn crossover_gamma(mu: f64, l: f64) -> f64 {
    0.25 * (mu + 3.0 * l + (mu * mu + 14.0 * mu * l + 65.0 * l * l).sqrt())
}

/// RHGD regret factor `Q_f (1 - 1/Q_f)^W` quoted for comparison.
pub fn rhgd_bound_factor(q_f: f64, w: usize) -> f64 {
    q_f * (1.0 - 1.0 / q_f).powi(w as i32)
}
