//! Switching costs `g(x_t, x_{t-1})`.

use serde::Serialize;

use crate::error::{Result, SocoError};
use crate::linalg;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SwitchingCost {
    /// `(gamma/2) ||x - y||^2`
    Quadratic { gamma: f64 },
    /// `gamma / (2 sqrt(2) d) * <x - y, 1>^2`
    SumSquared { gamma: f64 },
}

/// Smoothness data of the switching part of the objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SmoothnessConstants {
    /// Smoothness of `g` itself.
    pub l_g: f64,
    /// Smoothness of `H(x) = sum_t g(x_t, x_{t-1})`.
    pub l_grad_h: f64,
    /// Smoothness of the whole objective when the stage costs are smooth.
    pub l_grad_j: Option<f64>,
}

impl SwitchingCost {
    pub fn gamma(&self) -> f64 {
        match *self {
            SwitchingCost::Quadratic { gamma } | SwitchingCost::SumSquared { gamma } => gamma,
        }
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self, SwitchingCost::Quadratic { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SwitchingCost::Quadratic { .. } => "quadratic",
            SwitchingCost::SumSquared { .. } => "sum-squared",
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let g = self.gamma();
        if !(g >= 0.0) || !g.is_finite() {
            return Err(SocoError::InvalidArgument(format!(
                "switching weight {g} must be >= 0"
            )));
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            SwitchingCost::Quadratic { gamma } => 0.5 * gamma * linalg::dist_sq(x, y),
            SwitchingCost::SumSquared { gamma } => {
                let s: f64 = x.iter().zip(y).map(|(a, b)| a - b).sum();
                gamma / (2.0 * std::f64::consts::SQRT_2 * x.len() as f64) * s * s
            }
        }
    }

    /// `g(a.0, a.1) - g(b.0, b.1)` without forming either value.
    pub fn value_difference(&self, a: (&[f64], &[f64]), b: (&[f64], &[f64])) -> f64 {
        match *self {
            SwitchingCost::Quadratic { gamma } => {
                let s: f64 = (0..a.0.len())
                    .map(|i| {
                        let p = a.0[i] - a.1[i];
                        let q = b.0[i] - b.1[i];
                        (p - q) * (p + q)
                    })
                    .sum();
                0.5 * gamma * s
            }
            SwitchingCost::SumSquared { gamma } => {
                let p: f64 = a.0.iter().zip(a.1).map(|(x, y)| x - y).sum();
                let q: f64 = b.0.iter().zip(b.1).map(|(x, y)| x - y).sum();
                gamma / (2.0 * std::f64::consts::SQRT_2 * a.0.len() as f64) * (p - q) * (p + q)
            }
        }
    }

    /// Gradient in the first argument.
    pub fn grad1(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        match *self {
            SwitchingCost::Quadratic { gamma } => x.iter().zip(y).map(|(a, b)| gamma * (a - b)).collect(),
            SwitchingCost::SumSquared { gamma } => {
                let d = x.len() as f64;
                let s: f64 = x.iter().zip(y).map(|(a, b)| a - b).sum();
                vec![gamma / (std::f64::consts::SQRT_2 * d) * s; x.len()]
            }
        }
    }

    /// Gradient in the second argument; both families depend on `x - y`
    /// only, so this is `-grad1`.
    pub fn grad2(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut g = self.grad1(x, y);
        g.iter_mut().for_each(|v| *v = -*v);
        g
    }

    /// Smoothness constant of `g` used by the analysis.
    pub fn l_g(&self) -> f64 {
        self.gamma()
    }

    /// `L_gradH` is `4 gamma` for the quadratic family and `2 sqrt(2) gamma`
    /// for the sum-squared one; `L_gradJ = l + L_gradH` when `l` is known.
    pub fn smoothness_constants(&self, stage_smoothness: Option<f64>) -> SmoothnessConstants {
        let gamma = self.gamma();
        let l_grad_h = match self {
            SwitchingCost::Quadratic { .. } => 4.0 * gamma,
            SwitchingCost::SumSquared { .. } => 2.0 * std::f64::consts::SQRT_2 * gamma,
        };
        SmoothnessConstants {
            l_g: self.l_g(),
            l_grad_h,
            l_grad_j: stage_smoothness.map(|l| l + l_grad_h),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_arguments_cost_nothing() {
        for s in [
            SwitchingCost::Quadratic { gamma: 3.0 },
            SwitchingCost::SumSquared { gamma: 3.0 },
        ] {
            let x = [1.0, -2.0];
            assert_eq!(s.value(&x, &x), 0.0);
            assert_eq!(s.grad1(&x, &x), vec![0.0, 0.0]);
            assert_eq!(s.grad2(&x, &x), vec![0.0, 0.0]);
        }
    }

    #[test]
    fn quadratic_hand_example() {
        let s = SwitchingCost::Quadratic { gamma: 2.0 };
        assert_eq!(s.value(&[1.0, 1.0], &[0.0, 0.0]), 2.0);
        assert_eq!(s.grad1(&[1.0, 1.0], &[0.0, 0.0]), vec![2.0, 2.0]);
    }

    #[test]
    fn table_constants() {
        let q = SwitchingCost::Quadratic { gamma: 10.0 }.smoothness_constants(Some(1.0));
        assert_eq!(q.l_grad_h, 40.0);
        assert_eq!(q.l_grad_j, Some(41.0));
        let gamma = 2.0 * std::f64::consts::SQRT_2;
        let s = SwitchingCost::SumSquared { gamma }.smoothness_constants(None);
        assert!((s.l_grad_h - 8.0).abs() < 1e-14);
        assert_eq!(s.l_grad_j, None);
        let z = SwitchingCost::Quadratic { gamma: 0.0 }.smoothness_constants(Some(1.0));
        assert_eq!((z.l_g, z.l_grad_h), (0.0, 0.0));
    }

    #[test]
    fn sum_squared_is_dominated_by_quadratic() {
        let s = SwitchingCost::SumSquared { gamma: 1.7 };
        let q = SwitchingCost::Quadratic { gamma: 1.7 };
        let (x, y) = ([3.0, 3.0, 3.0], [0.0, 0.0, 0.0]);
        assert!(s.value(&x, &y) <= q.value(&x, &y));
    }
}
