//! Economic dispatch stage cost
//! `sum_i (a_i x_i^2 + b_i x_i + c_i) + xi * (sum_i x_i + s - d)^2`.

use super::{corner_max, SmoothStageFunction};
use crate::error::{Result, SocoError};
use crate::linalg;
use crate::problem::FeasibleBox;

#[derive(Clone, Debug, PartialEq)]
pub struct DispatchCost {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    xi: f64,
    demand: f64,
    supply: f64,
    mu: f64,
    l: f64,
}

impl DispatchCost {
    /// `coefficients[i] = (a_i, b_i, c_i)` for generator `i`.
    pub fn new(coefficients: &[(f64, f64, f64)], xi: f64, demand: f64, supply: f64) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(SocoError::InvalidArgument(
                "dispatch needs at least one generator".into(),
            ));
        }
        if coefficients.iter().any(|(a, _, _)| !(*a > 0.0)) {
            return Err(SocoError::InvalidArgument(
                "generator curvature a_i must be positive".into(),
            ));
        }
        if !(xi >= 0.0) {
            return Err(SocoError::InvalidArgument(format!(
                "imbalance weight {xi} must be >= 0"
            )));
        }
        let k = coefficients.len();
        let a: Vec<f64> = coefficients.iter().map(|c| c.0).collect();
        // Hessian 2 diag(a) + 2 xi 11^T
        let mut h = vec![2.0 * xi; k * k];
        for i in 0..k {
            h[i * k + i] += 2.0 * a[i];
        }
        let eig = linalg::symmetric_eigenvalues(&h, k, 1e-14);
        Ok(Self {
            b: coefficients.iter().map(|c| c.1).collect(),
            c: coefficients.iter().map(|c| c.2).collect(),
            a,
            xi,
            demand,
            supply,
            mu: eig[0],
            l: eig[k - 1],
        })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn demand(&self) -> f64 {
        self.demand
    }

    pub fn supply(&self) -> f64 {
        self.supply
    }

    /// `s - d`
    fn offset(&self) -> f64 {
        self.supply - self.demand
    }

    pub(crate) fn value(&self, x: &[f64]) -> f64 {
        let gen: f64 = (0..self.dim())
            .map(|i| self.a[i] * x[i] * x[i] + self.b[i] * x[i] + self.c[i])
            .sum();
        let imbalance = linalg::sum(x) + self.offset();
        gen + self.xi * imbalance * imbalance
    }

    pub(crate) fn value_difference(&self, x: &[f64], y: &[f64]) -> f64 {
        let gen: f64 = (0..self.dim())
            .map(|i| (x[i] - y[i]) * (self.a[i] * (x[i] + y[i]) + self.b[i]))
            .sum();
        let (sx, sy) = (linalg::sum(x), linalg::sum(y));
        gen + self.xi * (sx - sy) * (sx + sy + 2.0 * self.offset())
    }

    pub(crate) fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let common = 2.0 * self.xi * (linalg::sum(x) + self.offset());
        (0..self.dim())
            .map(|i| 2.0 * self.a[i] * x[i] + self.b[i] + common)
            .collect()
    }

    pub fn strong_convexity(&self) -> f64 {
        self.mu
    }

    pub fn smoothness(&self) -> f64 {
        self.l
    }

    pub(crate) fn prox(&self, tau: f64, v: &[f64], bounds: &FeasibleBox) -> Vec<f64> {
        self.solve(1.0 / tau, v, bounds)
    }

    pub(crate) fn minimizer(&self, bounds: &FeasibleBox) -> Vec<f64> {
        self.solve(0.0, &vec![0.0; self.dim()], bounds)
    }

    pub(crate) fn lipschitz_bound(&self, region: &FeasibleBox) -> f64 {
        corner_max(region, |x| linalg::norm(&self.gradient(x)))
    }

    /// Minimizes `f(x) + (inv_tau/2) ||x - v||^2` over the box.
    ///
    /// For a fixed aggregate `S = sum x` the problem separates, giving
    /// `x_i(S) = clamp((inv_tau v_i - b_i - 2 xi (S + s - d)) / (2 a_i + inv_tau))`.
    /// The consistent `S` is the root of the decreasing map `sum x_i(S) - S`.
    fn solve(&self, inv_tau: f64, v: &[f64], bounds: &FeasibleBox) -> Vec<f64> {
        let k = self.dim();
        let (lo, hi) = (bounds.lower(), bounds.upper());
        let denom: Vec<f64> = self.a.iter().map(|a| 2.0 * a + inv_tau).collect();
        let base: Vec<f64> = (0..k)
            .map(|i| (inv_tau * v[i] - self.b[i] - 2.0 * self.xi * self.offset()) / denom[i])
            .collect();
        let point = |s: f64| -> Vec<f64> {
            (0..k)
                .map(|i| (base[i] - 2.0 * self.xi * s / denom[i]).max(lo[i]).min(hi[i]))
                .collect()
        };
        let excess = |s: f64| linalg::sum(&point(s)) - s;

        // The slope of `excess` is at most -1, so one step of length
        // |excess(s0)| from s0 crosses the root.
        let s0 = linalg::sum(&point(0.0));
        let h0 = excess(s0);
        let (mut a, mut b) = if h0 >= 0.0 { (s0, s0 + h0) } else { (s0 + h0, s0) };
        for _ in 0..300 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if excess(m) >= 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let s_mid = 0.5 * (a + b);

        // Polish: with the active set fixed, S solves a scalar linear equation.
        let x_mid = point(s_mid);
        let mut fixed = 0.0;
        let (mut num, mut den) = (0.0, 1.0);
        for i in 0..k {
            let free = base[i] - 2.0 * self.xi * s_mid / denom[i];
            if free <= lo[i] || free >= hi[i] {
                fixed += x_mid[i];
            } else {
                num += base[i];
                den += 2.0 * self.xi / denom[i];
            }
        }
        let s_exact = (fixed + num) / den;
        let tol = 1e-12 * (1.0 + s_exact.abs());
        if s_exact.is_finite() && excess(s_exact).abs() <= excess(s_mid).abs().max(tol) {
            point(s_exact)
        } else {
            x_mid
        }
    }
}

impl SmoothStageFunction for DispatchCost {
    fn name(&self) -> &str {
        "dispatch"
    }

    fn dim(&self) -> usize {
        self.a.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        DispatchCost::value(self, x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        DispatchCost::gradient(self, x)
    }

    fn strong_convexity(&self) -> f64 {
        self.mu
    }

    fn smoothness(&self) -> f64 {
        self.l
    }
}
