//! Drivers that fill an [`IterateGrid`] with an update rule: the online
//! receding-horizon schedule and the offline layer-by-layer sweep.

use super::grid::IterateGrid;
use super::init::{initial_point, Initialization};
use super::rules::UpdateRule;
use crate::error::Result;
use crate::problem::ProblemInstance;

/// Online schedule with `W = inst.window()` layers.
///
/// At time `t = 2 - W, ..., N` the cost `f_{t+W-1}` becomes available; the
/// point `x_{t+W}^(0)` is initialized and then `x_i^(t+W-i)` is refined for
/// `i = t+W-1` down to `t`, skipping indices outside `[1, N]`. The action
/// `x_t^(W)` is committed at the end of step `t`.
pub(crate) fn receding_horizon(
    inst: &ProblemInstance,
    rule: &dyn UpdateRule,
    init: Initialization,
) -> Result<(Vec<Vec<f64>>, IterateGrid)> {
    let n = inst.horizon() as i64;
    let w = inst.window() as i64;
    let mut grid = IterateGrid::new(inst.x0().to_vec(), inst.horizon(), inst.window());
    grid.set(1, 0, inst.x0().to_vec())?;
    let mut committed = Vec::with_capacity(inst.horizon());

    for t in (2 - w)..=n {
        let fresh = t + w;
        if (2..=n).contains(&fresh) {
            let x = initial_point(inst, init, &grid, fresh as usize)?;
            grid.set(fresh as usize, 0, x)?;
        }
        for i in (t..t + w).rev() {
            if i < 1 || i > n {
                continue;
            }
            let k = (t + w - i) as usize;
            let x = rule.update(inst, &grid, i as usize, k)?;
            grid.set(i as usize, k, x)?;
        }
        if t >= 1 {
            committed.push(grid.require(t as usize, inst.window())?.to_vec());
        }
    }
    Ok((committed, grid))
}

/// Offline sweep: for `k = 1..=layers`, update `t = 1..=N` in order.
pub(crate) fn layered(
    inst: &ProblemInstance,
    rule: &dyn UpdateRule,
    layer0: &[Vec<f64>],
    layers: usize,
) -> Result<IterateGrid> {
    let mut grid = IterateGrid::new(inst.x0().to_vec(), inst.horizon(), layers);
    for (t, x) in layer0.iter().enumerate() {
        grid.set(t + 1, 0, x.clone())?;
    }
    for k in 1..=layers {
        for t in 1..=inst.horizon() {
            let x = rule.update(inst, &grid, t, k)?;
            grid.set(t, k, x)?;
        }
    }
    Ok(grid)
}
