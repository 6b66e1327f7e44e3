//! Solvers that run to convergence: the offline optimum and MPC. Both
//! apply block-coordinate sweeps to a contiguous segment of stages.

use serde::Serialize;

use super::init::{initial_layer, Initialization};
use super::rules::{apgd_s_step, apgd_step, block_min_step};
use crate::error::{Result, SocoError};
use crate::linalg;
use crate::problem::{ProblemInstance, Trajectory};

/// Stopping rule for the block-coordinate sweeps.
///
/// A run stops when the largest block move of a sweep drops below
/// `strict_step * (1 + ||x||_inf)`, or when the relative objective decrease
/// drops below `rel_decrease` while the move is below
/// `step * (1 + ||x||_inf)`. The second clause ends runs whose block solver
/// is itself inexact (the ADMM prox).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceSettings {
    pub rel_decrease: f64,
    pub step: f64,
    pub strict_step: f64,
    pub max_sweeps: usize,
}

impl ConvergenceSettings {
    pub fn offline() -> Self {
        Self {
            rel_decrease: 1e-12,
            step: 1e-9,
            strict_step: 1e-13,
            max_sweeps: 1_000_000,
        }
    }

    pub fn mpc() -> Self {
        Self {
            rel_decrease: 1e-10,
            step: 1e-8,
            strict_step: 1e-13,
            max_sweeps: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum BlockMethod {
    Minimize,
    Apgd(f64),
    ApgdS(f64),
}

fn block_method(inst: &ProblemInstance) -> Result<BlockMethod> {
    let sw = inst.switching();
    if sw.gamma() == 0.0 {
        // Stages decouple; block minimization returns the stage minimizers.
        return Ok(BlockMethod::Minimize);
    }
    if inst.all_proximable() {
        if sw.is_quadratic() {
            Ok(BlockMethod::Minimize)
        } else {
            Ok(BlockMethod::Apgd(0.8 / sw.gamma()))
        }
    } else if let (Some(l), true) = (inst.constants().l, sw.is_quadratic()) {
        Ok(BlockMethod::ApgdS(1.0 / l))
    } else {
        Err(SocoError::Unsupported {
            operation: "block-coordinate solve",
            family: "non-proximable stages with a non-quadratic switch".into(),
        })
    }
}

/// Minimizes the objective of stages `start..start + xs.len()` anchored at
/// `anchor`, starting from `xs`. Returns the number of sweeps.
fn minimize_segment(
    inst: &ProblemInstance,
    start: usize,
    anchor: &[f64],
    xs: &mut [Vec<f64>],
    settings: ConvergenceSettings,
    solver: &'static str,
) -> Result<usize> {
    let method = block_method(inst)?;
    let len = xs.len();
    let mut objective = inst.segment_objective(start, anchor, xs);
    let (mut step, mut rel) = (f64::INFINITY, f64::INFINITY);
    for sweep in 1..=settings.max_sweeps {
        let old = xs.to_vec();
        step = 0.0;
        for i in 0..len {
            let t = start + i;
            let new = {
                let prev = if i == 0 { anchor } else { &xs[i - 1] };
                let next = if i + 1 < len {
                    Some(xs[i + 1].as_slice())
                } else {
                    None
                };
                match method {
                    BlockMethod::Minimize => block_min_step(inst, t, prev, next)?,
                    BlockMethod::Apgd(tau) => apgd_step(inst, t, tau, prev, &xs[i], next)?,
                    BlockMethod::ApgdS(tau) => apgd_s_step(inst, t, tau, prev, &xs[i], next)?,
                }
            };
            step = step.max(linalg::max_abs_diff(&new, &xs[i]));
            xs[i] = new;
        }
        let decrease = inst.segment_difference(start, anchor, &old, anchor, xs);
        objective -= decrease;
        if !objective.is_finite() {
            return Err(SocoError::NonFinite(solver.to_string()));
        }
        let scale = 1.0 + xs.iter().map(|x| linalg::max_abs(x)).fold(0.0, f64::max);
        rel = decrease / objective.abs().max(f64::MIN_POSITIVE);
        if step <= settings.strict_step * scale
            || (rel < settings.rel_decrease && step <= settings.step * scale)
        {
            return Ok(sweep);
        }
    }
    Err(SocoError::Convergence {
        solver,
        iterations: settings.max_sweeps,
        residual: step,
        secondary: rel,
    })
}

/// Minimizer of the full-horizon objective.
#[derive(Clone, Debug, Serialize)]
pub struct OfflineOptimum {
    pub trajectory: Trajectory,
    pub objective: f64,
    pub sweeps: usize,
}

/// Block-coordinate descent from the policy-I initialization.
pub fn offline_optimum(inst: &ProblemInstance) -> Result<OfflineOptimum> {
    offline_optimum_with(inst, ConvergenceSettings::offline())
}

pub fn offline_optimum_with(inst: &ProblemInstance, settings: ConvergenceSettings) -> Result<OfflineOptimum> {
    let mut xs = initial_layer(inst, Initialization::PolicyI)?;
    let sweeps = minimize_segment(inst, 1, inst.x0(), &mut xs, settings, "offline block descent")?;
    let objective = inst.objective(&xs)?;
    Ok(OfflineOptimum {
        trajectory: Trajectory(xs),
        objective,
        sweeps,
    })
}

/// Model predictive control: at each `t` solve stages `t..t+W-1` anchored at
/// the committed `x_{t-1}` without terminal cost and commit the first point.
pub(crate) fn mpc(inst: &ProblemInstance, settings: ConvergenceSettings) -> Result<Vec<Vec<f64>>> {
    let n = inst.horizon();
    let w = inst.window();
    let theta = inst.stage_minimizers();
    let mut committed: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut plan: Vec<Vec<f64>> = Vec::new();
    for t in 1..=n {
        let end = (t + w - 1).min(n);
        // Warm start: previous plan shifted by one, new stages at their minimizers.
        let mut xs: Vec<Vec<f64>> = plan.iter().skip(1).cloned().collect();
        while xs.len() < end - t + 1 {
            xs.push(theta[t - 1 + xs.len()].clone());
        }
        let anchor = committed
            .last()
            .map(|v| v.as_slice())
            .unwrap_or(inst.x0())
            .to_vec();
        minimize_segment(inst, t, &anchor, &mut xs, settings, "MPC window solve")?;
        committed.push(xs[0].clone());
        plan = xs;
    }
    Ok(committed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::{StageCost, TrackingCost};
    use crate::problem::FeasibleBox;
    use crate::switching::SwitchingCost;

    fn tracking(us: &[f64], gamma: f64, w: usize) -> ProblemInstance {
        let stages = us
            .iter()
            .map(|u| StageCost::Tracking(TrackingCost::new(vec![*u])))
            .collect();
        ProblemInstance::new(
            vec![0.0],
            FeasibleBox::unbounded(1),
            stages,
            SwitchingCost::Quadratic { gamma },
            w,
        )
        .unwrap()
    }

    #[test]
    fn two_stage_optimum_solves_stationarity_system() {
        // J = (x1-1)^2/2 + (x2+1)^2/2 + x1^2/2 + (x2-x1)^2/2
        // grad: [3 x1 - x2 - 1, 2 x2 - x1 + 1] = 0  =>  x1 = 1/5, x2 = -2/5
        let inst = tracking(&[1.0, -1.0], 1.0, 1);
        let opt = offline_optimum(&inst).unwrap();
        // Positions stop at the 1e-9 step rule; the objective error is quadratic.
        assert!((opt.trajectory.0[0][0] - 0.2).abs() < 1e-9);
        assert!((opt.trajectory.0[1][0] + 0.4).abs() < 1e-9);
        let j = 0.5 * 0.8f64.powi(2) + 0.5 * 0.6f64.powi(2) + 0.5 * 0.04 + 0.5 * 0.36;
        assert!((opt.objective - j).abs() < 1e-12);
    }

    #[test]
    fn zero_switching_returns_minimizers() {
        let inst = tracking(&[1.0, -2.0, 5.0], 0.0, 1);
        let opt = offline_optimum(&inst).unwrap();
        assert_eq!(opt.trajectory.0, vec![vec![1.0], vec![-2.0], vec![5.0]]);
        assert_eq!(opt.objective, 0.0);
    }

    #[test]
    fn constant_targets_at_origin_are_optimal() {
        let inst = tracking(&[0.0; 5], 3.0, 2);
        let opt = offline_optimum(&inst).unwrap();
        assert_eq!(opt.objective, 0.0);
        assert_eq!(
            mpc(&inst, ConvergenceSettings::mpc()).unwrap(),
            vec![vec![0.0]; 5]
        );
    }

    #[test]
    fn full_window_mpc_is_offline_optimal() {
        let inst = tracking(&[1.0, -1.0, 2.0, 0.5], 2.0, 4);
        let opt = offline_optimum(&inst).unwrap();
        let xs = mpc(&inst, ConvergenceSettings::mpc()).unwrap();
        let gap = inst.objective_difference(&xs, &opt.trajectory.0).unwrap();
        assert!(gap.abs() <= 1e-6 * (1.0 + opt.objective));
    }

    #[test]
    fn sweep_cap_is_a_convergence_error() {
        let inst = tracking(&[1.0, -1.0, 3.0], 5.0, 1);
        let settings = ConvergenceSettings {
            max_sweeps: 1,
            ..ConvergenceSettings::offline()
        };
        assert!(matches!(
            offline_optimum_with(&inst, settings),
            Err(SocoError::Convergence { iterations: 1, .. })
        ));
    }
}
