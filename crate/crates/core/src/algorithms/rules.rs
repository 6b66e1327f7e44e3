//! Single-cell update rules. Each rule computes `x_t^(k)` from cells of the
//! grid that the receding-horizon schedule has already produced.

use super::grid::IterateGrid;
use crate::error::{Result, SocoError};
use crate::linalg;
use crate::problem::ProblemInstance;

/// Proximal step on block `t` with the switching terms linearized at `cur`:
/// `prox_{tau f_t}(cur - tau * (grad1 g(cur, prev) + grad2 g(next, cur)))`.
pub(crate) fn apgd_step(
    inst: &ProblemInstance,
    t: usize,
    tau: f64,
    prev: &[f64],
    cur: &[f64],
    next: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let sw = inst.switching();
    let mut v = cur.to_vec();
    linalg::axpy(-tau, &sw.grad1(cur, prev), &mut v);
    if let Some(next) = next {
        linalg::axpy(-tau, &sw.grad2(next, cur), &mut v);
    }
    inst.stage(t).prox(tau, &v, inst.bounds())
}

/// Smooth-stage step for the quadratic switch: the stage cost is
/// linearized and the switching terms are kept exact, which reduces the
/// prox to a projection of a weighted average.
pub(crate) fn apgd_s_step(
    inst: &ProblemInstance,
    t: usize,
    tau: f64,
    prev: &[f64],
    cur: &[f64],
    next: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let gamma = inst.switching().gamma();
    let grad = inst.stage(t).gradient(cur)?;
    let gt = gamma * tau;
    let mut z: Vec<f64> = match next {
        Some(next) => (0..cur.len())
            .map(|i| (gt * (prev[i] + next[i]) + cur[i] - tau * grad[i]) / (2.0 * gt + 1.0))
            .collect(),
        None => (0..cur.len())
            .map(|i| (gt * prev[i] + cur[i] - tau * grad[i]) / (gt + 1.0))
            .collect(),
    };
    inst.bounds().project_in_place(&mut z);
    Ok(z)
}

/// Exact minimization of the objective over block `t` for the quadratic
/// switch: `prox_{f_t/(2 gamma)}` of the neighbor midpoint, or
/// `prox_{f_t/gamma}(prev)` when `t` has no successor.
pub(crate) fn block_min_step(
    inst: &ProblemInstance,
    t: usize,
    prev: &[f64],
    next: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let gamma = inst.switching().gamma();
    match next {
        Some(next) => {
            let mid: Vec<f64> = prev.iter().zip(next).map(|(a, b)| 0.5 * (a + b)).collect();
            inst.stage(t).prox(1.0 / (2.0 * gamma), &mid, inst.bounds())
        }
        None => inst.stage(t).prox(1.0 / gamma, prev, inst.bounds()),
    }
}

/// Block `t` of `grad J(y)`.
pub(crate) fn objective_block_gradient(
    inst: &ProblemInstance,
    t: usize,
    prev: &[f64],
    cur: &[f64],
    next: Option<&[f64]>,
) -> Result<Vec<f64>> {
    let sw = inst.switching();
    let mut g = inst.stage(t).gradient(cur)?;
    linalg::axpy(1.0, &sw.grad1(cur, prev), &mut g);
    if let Some(next) = next {
        linalg::axpy(1.0, &sw.grad2(next, cur), &mut g);
    }
    Ok(g)
}

/// Rule for one cell of the layered iteration.
pub(crate) trait UpdateRule: Sync {
    fn update(&self, inst: &ProblemInstance, grid: &IterateGrid, t: usize, k: usize) -> Result<Vec<f64>>;
}

fn successor<'a>(
    inst: &ProblemInstance,
    grid: &'a IterateGrid,
    t: usize,
    k: usize,
) -> Result<Option<&'a [f64]>> {
    if t < inst.horizon() {
        grid.require(t + 1, k).map(Some)
    } else {
        Ok(None)
    }
}

/// Alternating proximal gradient with per-stage steps.
pub(crate) struct ApgdRule {
    pub taus: Vec<f64>,
}

impl UpdateRule for ApgdRule {
    fn update(&self, inst: &ProblemInstance, grid: &IterateGrid, t: usize, k: usize) -> Result<Vec<f64>> {
        let prev = grid.require(t - 1, k)?;
        let cur = grid.require(t, k - 1)?;
        let next = successor(inst, grid, t, k - 1)?;
        apgd_step(inst, t, self.taus[t - 1], prev, cur, next)
    }
}

/// Alternating projected step for smooth stages.
pub(crate) struct ApgdSRule {
    pub tau: f64,
}

impl UpdateRule for ApgdSRule {
    fn update(&self, inst: &ProblemInstance, grid: &IterateGrid, t: usize, k: usize) -> Result<Vec<f64>> {
        let prev = grid.require(t - 1, k)?;
        let cur = grid.require(t, k - 1)?;
        let next = successor(inst, grid, t, k - 1)?;
        apgd_s_step(inst, t, self.tau, prev, cur, next)
    }
}

/// Exact block minimization.
pub(crate) struct BlockMinRule;

impl UpdateRule for BlockMinRule {
    fn update(&self, inst: &ProblemInstance, grid: &IterateGrid, t: usize, k: usize) -> Result<Vec<f64>> {
        let prev = grid.require(t - 1, k)?;
        let next = successor(inst, grid, t, k - 1)?;
        block_min_step(inst, t, prev, next)
    }
}

/// Kind of step taken by a Jacobi (previous-layer) rule.
#[derive(Clone, Copy, Debug)]
pub(crate) enum JacobiStep {
    /// Proximal gradient on the switching part with step `tau`.
    Prox(f64),
    /// Projected gradient on the full objective with step `eta`.
    Gradient(f64),
}

/// Jacobi update evaluated at the extrapolated point
/// `y^(j) = x^(j) + m_j (x^(j) - x^(j-1))`, with `y^(0) = x^(0)`.
pub(crate) struct JacobiRule {
    pub step: JacobiStep,
    /// `momentum[j]` is `m_j`; entry 0 is unused.
    pub momentum: Vec<f64>,
}

impl JacobiRule {
    fn extrapolated(&self, grid: &IterateGrid, t: usize, j: usize) -> Result<Vec<f64>> {
        let x = grid.require(t, j)?;
        let m = if j == 0 { 0.0 } else { self.momentum[j] };
        if m == 0.0 {
            return Ok(x.to_vec());
        }
        let x_prev = grid.require(t, j - 1)?;
        Ok(x.iter().zip(x_prev).map(|(a, b)| a + m * (a - b)).collect())
    }
}

impl UpdateRule for JacobiRule {
    fn update(&self, inst: &ProblemInstance, grid: &IterateGrid, t: usize, k: usize) -> Result<Vec<f64>> {
        let j = k - 1;
        if j > 0 && self.momentum.len() <= j {
            return Err(SocoError::InvalidArgument(
                "momentum schedule shorter than grid".into(),
            ));
        }
        let prev = self.extrapolated(grid, t - 1, j)?;
        let cur = self.extrapolated(grid, t, j)?;
        let next = if t < inst.horizon() {
            Some(self.extrapolated(grid, t + 1, j)?)
        } else {
            None
        };
        match self.step {
            JacobiStep::Prox(tau) => apgd_step(inst, t, tau, &prev, &cur, next.as_deref()),
            JacobiStep::Gradient(eta) => {
                let g = objective_block_gradient(inst, t, &prev, &cur, next.as_deref())?;
                let mut z = cur;
                linalg::axpy(-eta, &g, &mut z);
                inst.bounds().project_in_place(&mut z);
                Ok(z)
            }
        }
    }
}

/// Beck-Teboulle momentum `m_j = (s_j - 1) / s_{j+1}` for `j = 0..=layers`.
pub(crate) fn fista_momentum(layers: usize) -> Vec<f64> {
    let mut out = vec![0.0; layers + 1];
    let mut s = 1.0f64;
    for m in out.iter_mut().skip(1) {
        let s_next = 0.5 * (1.0 + (1.0 + 4.0 * s * s).sqrt());
        *m = (s - 1.0) / s_next;
        s = s_next;
    }
    out
}
