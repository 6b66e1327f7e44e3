//! Overlapping group lasso `0.5 * ||x - u||^2 + sum_i ||x_{G_i}||` and its
//! ADMM-based prox.

use crate::error::{Result, SocoError};
use crate::linalg;
use crate::problem::FeasibleBox;

/// Inner ADMM settings. Only the stopping tolerance has a prescribed value;
/// the penalty is fixed and there is no over-relaxation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmmSettings {
    pub penalty: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        Self {
            penalty: 1.0,
            tolerance: 1e-10,
            max_iterations: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupLassoCost {
    target: Vec<f64>,
    groups: Vec<Vec<usize>>,
    /// Number of groups covering each coordinate.
    coverage: Vec<usize>,
    admm: AdmmSettings,
}

/// Groups of `width` consecutive (0-based) indices starting every `stride`.
pub fn contiguous_groups(count: usize, stride: usize, width: usize) -> Vec<Vec<usize>> {
    (0..count)
        .map(|i| (i * stride..i * stride + width).collect())
        .collect()
}

impl GroupLassoCost {
    pub fn new(target: Vec<f64>, groups: Vec<Vec<usize>>) -> Result<Self> {
        let d = target.len();
        let mut coverage = vec![0; d];
        for g in &groups {
            if g.is_empty() {
                return Err(SocoError::InvalidArgument("empty group".into()));
            }
            for &j in g {
                if j >= d {
                    return Err(SocoError::InvalidArgument(format!(
                        "group index {j} out of range for dimension {d}"
                    )));
                }
                coverage[j] += 1;
            }
        }
        Ok(Self {
            target,
            groups,
            coverage,
            admm: AdmmSettings::default(),
        })
    }

    pub fn with_admm(mut self, admm: AdmmSettings) -> Self {
        self.admm = admm;
        self
    }

    pub fn dim(&self) -> usize {
        self.target.len()
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    fn group_norm(&self, x: &[f64], g: &[usize]) -> f64 {
        g.iter().map(|&j| x[j] * x[j]).sum::<f64>().sqrt()
    }

    fn penalty(&self, x: &[f64]) -> f64 {
        self.groups.iter().map(|g| self.group_norm(x, g)).sum()
    }

    pub(crate) fn value(&self, x: &[f64]) -> f64 {
        0.5 * linalg::dist_sq(x, &self.target) + self.penalty(x)
    }

    pub(crate) fn value_difference(&self, a: &[f64], b: &[f64]) -> f64 {
        0.5 * super::centered_quadratic_difference(a, b, &self.target) + self.penalty(a) - self.penalty(b)
    }

    pub(crate) fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        let mut out = linalg::sub(x, &self.target);
        for g in &self.groups {
            let n = self.group_norm(x, g);
            if n > 0.0 {
                for &j in g {
                    out[j] += x[j] / n;
                }
            }
        }
        out
    }

    pub(crate) fn minimizer(&self, bounds: &FeasibleBox) -> Result<Vec<f64>> {
        solve_admm(self, 1.0, &self.target, 1.0, bounds)
    }

    pub(crate) fn lipschitz_bound(&self, region: &FeasibleBox) -> f64 {
        let quad: f64 = region
            .lower()
            .iter()
            .zip(region.upper())
            .zip(&self.target)
            .map(|((lo, hi), u)| {
                let m = (lo - u).abs().max((hi - u).abs());
                m * m
            })
            .sum::<f64>()
            .sqrt();
        let max_cover = self.coverage.iter().copied().max().unwrap_or(0) as f64;
        quad + (max_cover * self.groups.len() as f64).sqrt()
    }
}

/// `argmin_{x in box} tau * f(x) + 0.5 * ||x - v||^2` by ADMM over one copy
/// per group plus one copy for the box.
pub fn admm_group_prox(cost: &GroupLassoCost, tau: f64, v: &[f64], bounds: &FeasibleBox) -> Result<Vec<f64>> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(SocoError::InvalidStepSize(format!(
            "prox step {tau} must be positive"
        )));
    }
    if v.len() != cost.dim() {
        return Err(SocoError::dims(cost.dim(), v.len()));
    }
    // tau*f + 0.5||x-v||^2 = (a/2)||x - w||^2 + tau*sum||x_G|| + const
    let a = 1.0 + tau;
    let w: Vec<f64> = v
        .iter()
        .zip(&cost.target)
        .map(|(vi, ui)| (vi + tau * ui) / a)
        .collect();
    solve_admm(cost, a, &w, tau, bounds)
}

/// Minimizes `(a/2)||x - w||^2 + c * sum_i ||x_{G_i}||` over the box.
fn solve_admm(cost: &GroupLassoCost, a: f64, w: &[f64], c: f64, bounds: &FeasibleBox) -> Result<Vec<f64>> {
    let d = w.len();
    let rho = cost.admm.penalty;
    let tol = cost.admm.tolerance;
    let groups = &cost.groups;

    let mut x = bounds.project_unchecked(w);
    let mut z: Vec<Vec<f64>> = groups.iter().map(|g| g.iter().map(|&j| x[j]).collect()).collect();
    let mut y: Vec<Vec<f64>> = groups.iter().map(|g| vec![0.0; g.len()]).collect();
    let mut z_box = x.clone();
    let mut y_box = vec![0.0; d];
    let denom: Vec<f64> = cost
        .coverage
        .iter()
        .map(|&n| a + rho * (n as f64 + 1.0))
        .collect();
    let mut acc = vec![0.0; d];
    let mut dual_acc = vec![0.0; d];
    let (mut primal, mut dual) = (f64::INFINITY, f64::INFINITY);

    for _ in 0..cost.admm.max_iterations {
        // x-update: diagonal system
        for j in 0..d {
            acc[j] = a * w[j] + rho * (z_box[j] - y_box[j]);
        }
        for (gi, g) in groups.iter().enumerate() {
            for (k, &j) in g.iter().enumerate() {
                acc[j] += rho * (z[gi][k] - y[gi][k]);
            }
        }
        for j in 0..d {
            x[j] = acc[j] / denom[j];
        }

        // z-updates: block soft-threshold per group, clamp for the box copy
        dual_acc.iter_mut().for_each(|v| *v = 0.0);
        let threshold = c / rho;
        let mut primal_sq = 0.0;
        for (gi, g) in groups.iter().enumerate() {
            let target: Vec<f64> = g.iter().enumerate().map(|(k, &j)| x[j] + y[gi][k]).collect();
            let n = linalg::norm(&target);
            let shrink = if n > threshold { 1.0 - threshold / n } else { 0.0 };
            for (k, &j) in g.iter().enumerate() {
                let new = shrink * target[k];
                dual_acc[j] += new - z[gi][k];
                z[gi][k] = new;
                let r = x[j] - new;
                y[gi][k] += r;
                primal_sq += r * r;
            }
        }
        for j in 0..d {
            let new = (x[j] + y_box[j]).max(bounds.lower()[j]).min(bounds.upper()[j]);
            dual_acc[j] += new - z_box[j];
            z_box[j] = new;
            let r = x[j] - new;
            y_box[j] += r;
            primal_sq += r * r;
        }

        primal = primal_sq.sqrt();
        dual = rho * linalg::norm(&dual_acc);
        if !primal.is_finite() || !dual.is_finite() {
            return Err(SocoError::NonFinite("group-lasso ADMM".into()));
        }
        if primal < tol && dual < tol {
            return Ok(z_box);
        }
    }
    Err(SocoError::Convergence {
        solver: "group-lasso ADMM",
        iterations: cost.admm.max_iterations,
        residual: primal,
        secondary: dual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_fixed_when_target_is_zero() {
        let cost = GroupLassoCost::new(vec![0.0; 50], contiguous_groups(9, 5, 10)).unwrap();
        let b = FeasibleBox::uniform(50, -1e7, 1e7).unwrap();
        let z = admm_group_prox(&cost, 0.5, &[0.0; 50], &b).unwrap();
        assert!(linalg::max_abs(&z) < 1e-12);
    }

    #[test]
    fn contiguous_groups_overlap_by_five() {
        let g = contiguous_groups(9, 5, 10);
        assert_eq!(g[0], (0..10).collect::<Vec<_>>());
        assert_eq!(g[8], (40..50).collect::<Vec<_>>());
        assert_eq!(g[0][5..], g[1][..5]);
    }

    #[test]
    fn rejects_out_of_range_groups() {
        assert!(GroupLassoCost::new(vec![0.0; 3], vec![vec![0, 3]]).is_err());
    }

    #[test]
    fn iteration_cap_reports_residuals() {
        let cost = GroupLassoCost::new(vec![1.0, -2.0, 0.5], vec![vec![0, 1], vec![1, 2]])
            .unwrap()
            .with_admm(AdmmSettings {
                max_iterations: 2,
                ..AdmmSettings::default()
            });
        let b = FeasibleBox::unbounded(3);
        match admm_group_prox(&cost, 1.0, &[3.0, 1.0, -1.0], &b) {
            Err(SocoError::Convergence {
                iterations, residual, ..
            }) => {
                assert_eq!(iterations, 2);
                assert!(residual.is_finite());
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn subgradient_ignores_zero_groups() {
        let cost = GroupLassoCost::new(vec![1.0, 1.0], vec![vec![0], vec![1]]).unwrap();
        assert_eq!(cost.subgradient(&[0.0, 2.0]), vec![-1.0, 2.0]);
    }
}
