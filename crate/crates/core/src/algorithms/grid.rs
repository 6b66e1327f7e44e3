use serde::Serialize;

use crate::error::{Result, SocoError};

/// Layered iterate history `x_t^(k)` for `0 <= t <= N`, `0 <= k <= K`.
///
/// Row `t = 0` is the fixed initial point. Cells are written once; reading
/// a cell that has not been computed yet is an error, which is how schedule
/// ordering mistakes surface.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterateGrid {
    x0: Vec<f64>,
    horizon: usize,
    layers: usize,
    cells: Vec<Option<Vec<f64>>>,
}

impl IterateGrid {
    /// Empty grid with layers `0..=layers`.
    pub fn new(x0: Vec<f64>, horizon: usize, layers: usize) -> Self {
        Self {
            x0,
            horizon,
            layers,
            cells: vec![None; horizon * (layers + 1)],
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Index of the last layer.
    pub fn layers(&self) -> usize {
        self.layers
    }

    fn index(&self, t: usize, k: usize) -> usize {
        (t - 1) * (self.layers + 1) + k
    }

    pub fn get(&self, t: usize, k: usize) -> Option<&[f64]> {
        if t == 0 {
            return Some(&self.x0);
        }
        if t > self.horizon || k > self.layers {
            return None;
        }
        self.cells[self.index(t, k)].as_deref()
    }

    pub(crate) fn require(&self, t: usize, k: usize) -> Result<&[f64]> {
        self.get(t, k).ok_or_else(|| {
            SocoError::InvalidArgument(format!("iterate x_{t}^({k}) read before it was computed"))
        })
    }

    pub fn set(&mut self, t: usize, k: usize, value: Vec<f64>) -> Result<()> {
        if t == 0 || t > self.horizon || k > self.layers {
            return Err(SocoError::InvalidArgument(format!(
                "cell ({t}, {k}) outside grid of {} stages and {} layers",
                self.horizon, self.layers
            )));
        }
        let i = self.index(t, k);
        if self.cells[i].is_some() {
            return Err(SocoError::InvalidArgument(format!(
                "cell ({t}, {k}) is already set"
            )));
        }
        self.cells[i] = Some(value);
        Ok(())
    }

    /// All of layer `k` as `x_1^(k)..x_N^(k)`, if complete.
    pub fn layer(&self, k: usize) -> Option<Vec<Vec<f64>>> {
        (1..=self.horizon)
            .map(|t| self.get(t, k).map(<[f64]>::to_vec))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(Option::is_some)
    }

    /// Overwrite a cell unconditionally; used to build negative controls.
    pub fn perturb(&mut self, t: usize, k: usize, coord: usize, delta: f64) -> Result<()> {
        let i = self.index(t, k);
        match self.cells.get_mut(i).and_then(Option::as_mut) {
            Some(v) if coord < v.len() => {
                v[coord] += delta;
                Ok(())
            }
            _ => Err(SocoError::InvalidArgument(format!(
                "cannot perturb cell ({t}, {k})"
            ))),
        }
    }
}
