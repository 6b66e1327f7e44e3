//! Layer-0 initialization policies.

use serde::Serialize;

use super::grid::IterateGrid;
use crate::error::{Result, SocoError};
use crate::linalg;
use crate::problem::ProblemInstance;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "policy")]
pub enum Initialization {
    /// `x_t^(0) = theta_{t-1}`, the minimizer of the latest revealed cost.
    PolicyI,
    /// `x_t^(0) = P(x_{t-1}^(0) - eta * grad f_{t-1}(x_{t-1}^(0)))`.
    Ogd { eta: f64 },
}

/// `x_t^(0)` for `t >= 2`, given `x_{t-1}^(0)` in the grid.
pub(crate) fn initial_point(
    inst: &ProblemInstance,
    init: Initialization,
    grid: &IterateGrid,
    t: usize,
) -> Result<Vec<f64>> {
    match init {
        Initialization::PolicyI => Ok(inst.stage_minimizers()[t - 2].clone()),
        Initialization::Ogd { eta } => {
            let prev = grid.require(t - 1, 0)?;
            ogd_step(inst, eta, t - 1, prev)
        }
    }
}

fn ogd_step(inst: &ProblemInstance, eta: f64, stage: usize, x: &[f64]) -> Result<Vec<f64>> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(SocoError::InvalidStepSize(format!(
            "OGD step {eta} must be positive"
        )));
    }
    let g = inst.stage(stage).gradient(x)?;
    let mut z = x.to_vec();
    linalg::axpy(-eta, &g, &mut z);
    inst.bounds().project_in_place(&mut z);
    Ok(z)
}

/// The full layer `x_1^(0)..x_N^(0)` with `x_1^(0) = x0`.
pub fn initial_layer(inst: &ProblemInstance, init: Initialization) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::with_capacity(inst.horizon());
    out.push(inst.x0().to_vec());
    for t in 2..=inst.horizon() {
        let x = match init {
            Initialization::PolicyI => inst.stage_minimizers()[t - 2].clone(),
            Initialization::Ogd { eta } => ogd_step(inst, eta, t - 1, &out[t - 2])?,
        };
        out.push(x);
    }
    Ok(out)
}
