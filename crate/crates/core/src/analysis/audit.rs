//! After-the-fact checks of the per-layer lemmas on a recorded grid:
//! sufficient decrease, the subgradient witness bound, the linear rate
//! envelope, and a recomputation of every cell from its inputs.

use serde::Serialize;

use super::constants::{BoundConstants, BoundFamily};
use crate::algorithms::{IterateGrid, OfflineOptimum};
use crate::error::{Result, SocoError};
use crate::linalg;
use crate::problem::ProblemInstance;

/// Slack tolerance for every audited inequality.
pub const AUDIT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerAudit {
    pub k: usize,
    /// `||x^(k) - x^(k-1)||`
    pub step_norm: f64,
    /// `J(x^(k)) - J(x^(k-1))`
    pub objective_change: f64,
    /// `-rho ||step||^2 - (J(x^(k)) - J(x^(k-1)))`
    pub decrease_slack: f64,
    pub witness_norm: f64,
    /// `beta ||step|| (1 + 1e-9) - ||v^(k)||`
    pub witness_slack: f64,
    /// `r^k (J(x^(0)) - J*) (1 + 1e-9) - (J(x^(k)) - J*)`
    pub rate_slack: Option<f64>,
    /// Largest coordinate gap between a stored cell and its recomputation.
    pub update_residual: f64,
}

/// Per-layer slack arrays plus a pass flag.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub family: BoundFamily,
    pub tau: f64,
    pub rho: f64,
    pub beta: f64,
    pub rate: f64,
    pub tolerance: f64,
    pub decrease_slack: Vec<f64>,
    pub witness_slack: Vec<f64>,
    pub rate_slack: Vec<f64>,
    pub update_residual: Vec<f64>,
    pub layers: Vec<LayerAudit>,
    pub pass: bool,
}

impl AuditReport {
    pub fn violations(&self) -> usize {
        let slack_bad = self
            .decrease_slack
            .iter()
            .chain(&self.witness_slack)
            .chain(&self.rate_slack)
            .filter(|s| !(**s >= -self.tolerance))
            .count();
        let cells_bad = self
            .update_residual
            .iter()
            .filter(|r| !(**r <= self.tolerance))
            .count();
        slack_bad + cells_bad
    }
}

fn layer_of(grid: &IterateGrid, k: usize) -> Result<Vec<Vec<f64>>> {
    grid.layer(k)
        .ok_or_else(|| SocoError::InvalidArgument(format!("grid layer {k} is incomplete")))
}

fn stacked_norm(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| linalg::dist_sq(x, y))
        .sum::<f64>()
        .sqrt()
}

/// The subgradient witness `v^(k)` for the given bound family.
pub fn witness(
    inst: &ProblemInstance,
    grid: &IterateGrid,
    k: usize,
    constants: &BoundConstants,
) -> Result<Vec<Vec<f64>>> {
    let n = inst.horizon();
    let tau = constants.tau;
    let inv = 1.0 / tau;
    let gamma = inst.switching().gamma();
    let sw = inst.switching();
    let mut out = Vec::with_capacity(n);
    for t in 1..=n {
        let cur = grid.require(t, k)?;
        let old = grid.require(t, k - 1)?;
        let delta = linalg::sub(cur, old);
        let next = if t < n {
            Some((grid.require(t + 1, k)?, grid.require(t + 1, k - 1)?))
        } else {
            None
        };
        let v = match constants.family {
            BoundFamily::General => {
                let prev = grid.require(t - 1, k)?;
                let mut v = linalg::scale(&delta, -inv);
                linalg::axpy(-1.0, &sw.grad1(old, prev), &mut v);
                linalg::axpy(1.0, &sw.grad1(cur, prev), &mut v);
                if let Some((next_new, next_old)) = next {
                    linalg::axpy(-1.0, &sw.grad2(next_old, old), &mut v);
                    linalg::axpy(1.0, &sw.grad2(next_new, cur), &mut v);
                }
                v
            }
            BoundFamily::Quadratic => match next {
                Some((next_new, next_old)) => {
                    let mut v = linalg::scale(&delta, 2.0 * gamma - inv);
                    linalg::axpy(gamma, &linalg::sub(next_old, next_new), &mut v);
                    v
                }
                None => linalg::scale(&delta, gamma - inv),
            },
            BoundFamily::Smooth => {
                let f = inst.stage(t);
                let mut v = linalg::sub(&f.gradient(cur)?, &f.gradient(old)?);
                linalg::axpy(-inv, &delta, &mut v);
                if let Some((next_new, next_old)) = next {
                    linalg::axpy(gamma, &linalg::sub(next_old, next_new), &mut v);
                }
                v
            }
        };
        out.push(v);
    }
    Ok(out)
}

fn recompute(
    inst: &ProblemInstance,
    grid: &IterateGrid,
    t: usize,
    k: usize,
    constants: &BoundConstants,
) -> Result<Vec<f64>> {
    use crate::algorithms::cell_update;
    let prev = grid.require(t - 1, k)?;
    let cur = grid.require(t, k - 1)?;
    let next = if t < inst.horizon() {
        Some(grid.require(t + 1, k - 1)?)
    } else {
        None
    };
    cell_update(
        inst,
        constants.family == BoundFamily::Smooth,
        constants.tau,
        t,
        prev,
        cur,
        next,
    )
}

/// Audits layers `1..=K` of `grid`. The rate envelope is only checked when
/// the offline optimum is supplied.
pub fn audit_grid(
    inst: &ProblemInstance,
    grid: &IterateGrid,
    constants: &BoundConstants,
    optimum: Option<&OfflineOptimum>,
) -> Result<AuditReport> {
    if grid.horizon() != inst.horizon() {
        return Err(SocoError::InvalidArgument(format!(
            "grid has {} stages, instance has {}",
            grid.horizon(),
            inst.horizon()
        )));
    }
    let (rho, beta_sq) = constants.decrease_pair();
    let beta = beta_sq.sqrt();
    let rate = constants.rate();
    let layer0 = layer_of(grid, 0)?;
    let gap0 = optimum
        .map(|opt| inst.objective_difference(&layer0, &opt.trajectory.0))
        .transpose()?;

    let mut layers = Vec::with_capacity(grid.layers());
    let mut prev_layer = layer0;
    for k in 1..=grid.layers() {
        let layer = layer_of(grid, k)?;
        let step_norm = stacked_norm(&layer, &prev_layer);
        let objective_change = inst.objective_difference(&layer, &prev_layer)?;
        let decrease_slack = -rho * step_norm * step_norm - objective_change;

        let v = witness(inst, grid, k, constants)?;
        let witness_norm = v.iter().map(|x| linalg::norm_sq(x)).sum::<f64>().sqrt();
        let witness_slack = beta * step_norm * (1.0 + 1e-9) - witness_norm;

        let rate_slack = match (optimum, gap0) {
            (Some(opt), Some(g0)) => {
                let gap = inst.objective_difference(&layer, &opt.trajectory.0)?;
                Some(rate.powi(k as i32) * g0 * (1.0 + 1e-9) - gap)
            }
            _ => None,
        };

        let mut update_residual = 0.0f64;
        for t in 1..=inst.horizon() {
            let stored = grid.require(t, k)?;
            let fresh = recompute(inst, grid, t, k, constants)?;
            let scale = 1.0 + linalg::max_abs(stored);
            update_residual = update_residual.max(linalg::max_abs_diff(stored, &fresh) / scale);
        }

        layers.push(LayerAudit {
            k,
            step_norm,
            objective_change,
            decrease_slack,
            witness_norm,
            witness_slack,
            rate_slack,
            update_residual,
        });
        prev_layer = layer;
    }

    let mut report = AuditReport {
        family: constants.family,
        tau: constants.tau,
        rho,
        beta,
        rate,
        tolerance: AUDIT_TOLERANCE,
        decrease_slack: layers.iter().map(|l| l.decrease_slack).collect(),
        witness_slack: layers.iter().map(|l| l.witness_slack).collect(),
        rate_slack: layers.iter().filter_map(|l| l.rate_slack).collect(),
        update_residual: layers.iter().map(|l| l.update_residual).collect(),
        layers,
        pass: false,
    };
    report.pass = report.violations() == 0;
    Ok(report)
}
