//! Stage-cost families: value, (sub)gradient, prox, minimizer and curvature.

mod dispatch;
mod group_lasso;

use std::fmt::Debug;
use std::sync::Arc;

pub use dispatch::DispatchCost;
pub use group_lasso::{admm_group_prox, contiguous_groups, AdmmSettings, GroupLassoCost};

use crate::error::{Result, SocoError};
use crate::linalg;
use crate::problem::FeasibleBox;

/// `f(x) = 0.5 * ||x - u||^2`
#[derive(Clone, Debug, PartialEq)]
pub struct TrackingCost {
    target: Vec<f64>,
}

impl TrackingCost {
    pub fn new(target: Vec<f64>) -> Self {
        Self { target }
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }
}

/// `f(x) = (1/M) sum_j ||x - u_j||^2 + (lambda/2) ||x||_1`
///
/// Stored through the sample mean: the quadratic part equals
/// `||x - mean||^2 + spread` with `spread = (1/M) sum_j ||u_j - mean||^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct LassoCost {
    mean: Vec<f64>,
    spread: f64,
    lambda: f64,
    samples: usize,
}

impl LassoCost {
    pub fn new(samples: &[Vec<f64>], lambda: f64) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| SocoError::InvalidArgument("lasso cost needs at least one sample".into()))?;
        if lambda < 0.0 || !lambda.is_finite() {
            return Err(SocoError::InvalidArgument(format!(
                "lasso weight {lambda} must be >= 0"
            )));
        }
        let d = first.len();
        let m = samples.len() as f64;
        let mut mean = vec![0.0; d];
        for s in samples {
            if s.len() != d {
                return Err(SocoError::dims(d, s.len()));
            }
            linalg::axpy(1.0 / m, s, &mut mean);
        }
        let spread = samples.iter().map(|s| linalg::dist_sq(s, &mean)).sum::<f64>() / m;
        Ok(Self {
            mean,
            spread,
            lambda,
            samples: samples.len(),
        })
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn samples(&self) -> usize {
        self.samples
    }
}

/// Smooth stage function supplied by the caller. Such stages have no prox,
/// so only the gradient-based solvers accept them.
pub trait SmoothStageFunction: Send + Sync + Debug {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    fn strong_convexity(&self) -> f64;
    fn smoothness(&self) -> f64;

    /// Bound on the gradient norm over `region`. The default takes the
    /// largest gradient norm over the box corners, which is exact when the
    /// gradient is affine.
    fn lipschitz_bound(&self, region: &FeasibleBox) -> f64 {
        corner_max(region, |x| linalg::norm(&self.gradient(x)))
    }
}

/// Tagged stage cost.
#[derive(Clone, Debug)]
pub enum StageCost {
    Tracking(TrackingCost),
    Lasso(LassoCost),
    GroupLasso(GroupLassoCost),
    Dispatch(DispatchCost),
    Custom(Arc<dyn SmoothStageFunction>),
}

impl StageCost {
    pub fn family(&self) -> &str {
        match self {
            StageCost::Tracking(_) => "tracking",
            StageCost::Lasso(_) => "lasso",
            StageCost::GroupLasso(_) => "group-lasso",
            StageCost::Dispatch(_) => "dispatch",
            StageCost::Custom(f) => f.name(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            StageCost::Tracking(c) => c.target.len(),
            StageCost::Lasso(c) => c.mean.len(),
            StageCost::GroupLasso(c) => c.dim(),
            StageCost::Dispatch(c) => c.dim(),
            StageCost::Custom(f) => f.dim(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            StageCost::Tracking(c) => 0.5 * linalg::dist_sq(x, &c.target),
            StageCost::Lasso(c) => linalg::dist_sq(x, &c.mean) + c.spread + 0.5 * c.lambda * l1(x),
            StageCost::GroupLasso(c) => c.value(x),
            StageCost::Dispatch(c) => c.value(x),
            StageCost::Custom(f) => f.value(x),
        }
    }

    /// `f(a) - f(b)` evaluated without forming either value.
    pub fn value_difference(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            StageCost::Tracking(c) => 0.5 * centered_quadratic_difference(a, b, &c.target),
            StageCost::Lasso(c) => {
                centered_quadratic_difference(a, b, &c.mean) + 0.5 * c.lambda * (l1(a) - l1(b))
            }
            StageCost::GroupLasso(c) => c.value_difference(a, b),
            StageCost::Dispatch(c) => c.value_difference(a, b),
            StageCost::Custom(f) => f.value(a) - f.value(b),
        }
    }

    /// An element of the subdifferential. At l1 kinks the zero element of the
    /// kink coordinate's interval is used; for group norms at zero, the zero
    /// vector.
    pub fn subgradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            StageCost::Tracking(c) => linalg::sub(x, &c.target),
            StageCost::Lasso(c) => x
                .iter()
                .zip(&c.mean)
                .map(|(xi, mi)| 2.0 * (xi - mi) + 0.5 * c.lambda * sign0(*xi))
                .collect(),
            StageCost::GroupLasso(c) => c.subgradient(x),
            StageCost::Dispatch(c) => c.gradient(x),
            StageCost::Custom(f) => f.gradient(x),
        }
    }

    /// Gradient for smooth families.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            StageCost::Tracking(_) | StageCost::Dispatch(_) | StageCost::Custom(_) => Ok(self.subgradient(x)),
            _ => Err(self.unsupported("gradient")),
        }
    }

    pub fn is_smooth(&self) -> bool {
        self.smoothness().is_some()
    }

    pub fn is_proximable(&self) -> bool {
        !matches!(self, StageCost::Custom(_))
    }

    /// `argmin_{x in box} f(x) + ||x - v||^2 / (2 tau)`
    pub fn prox(&self, tau: f64, v: &[f64], bounds: &FeasibleBox) -> Result<Vec<f64>> {
        if !(tau > 0.0) || tau.is_nan() {
            return Err(SocoError::InvalidStepSize(format!(
                "prox step {tau} must be positive"
            )));
        }
        if v.len() != self.dim() {
            return Err(SocoError::dims(self.dim(), v.len()));
        }
        if tau.is_infinite() {
            return self.minimizer(bounds);
        }
        let out = match self {
            StageCost::Tracking(c) => {
                let mut z: Vec<f64> = v
                    .iter()
                    .zip(&c.target)
                    .map(|(vi, ui)| (vi + tau * ui) / (1.0 + tau))
                    .collect();
                bounds.project_in_place(&mut z);
                z
            }
            StageCost::Lasso(c) => {
                let shrink = 0.5 * c.lambda * tau / (1.0 + 2.0 * tau);
                let mut z: Vec<f64> = v
                    .iter()
                    .zip(&c.mean)
                    .map(|(vi, mi)| linalg::soft_threshold((vi + 2.0 * tau * mi) / (1.0 + 2.0 * tau), shrink))
                    .collect();
                bounds.project_in_place(&mut z);
                z
            }
            StageCost::GroupLasso(c) => admm_group_prox(c, tau, v, bounds)?,
            StageCost::Dispatch(c) => c.prox(tau, v, bounds),
            StageCost::Custom(_) => return Err(self.unsupported("prox")),
        };
        if !linalg::all_finite(&out) {
            return Err(SocoError::NonFinite(format!("{} prox", self.family())));
        }
        Ok(out)
    }

    /// `argmin_{x in box} f(x)`
    pub fn minimizer(&self, bounds: &FeasibleBox) -> Result<Vec<f64>> {
        if bounds.dim() != self.dim() {
            return Err(SocoError::dims(self.dim(), bounds.dim()));
        }
        match self {
            StageCost::Tracking(c) => Ok(bounds.project_unchecked(&c.target)),
            StageCost::Lasso(c) => {
                let mut z: Vec<f64> = c
                    .mean
                    .iter()
                    .map(|m| linalg::soft_threshold(*m, 0.25 * c.lambda))
                    .collect();
                bounds.project_in_place(&mut z);
                Ok(z)
            }
            StageCost::GroupLasso(c) => c.minimizer(bounds),
            StageCost::Dispatch(c) => Ok(c.minimizer(bounds)),
            StageCost::Custom(f) => {
                let start = bounds.project_unchecked(&vec![0.0; f.dim()]);
                projected_gradient_minimize(f.as_ref(), bounds, &start, 1e-15, 1_000_000)
            }
        }
    }

    pub fn strong_convexity(&self) -> f64 {
        match self {
            StageCost::Tracking(_) => 1.0,
            StageCost::Lasso(_) => 2.0,
            StageCost::GroupLasso(_) => 1.0,
            StageCost::Dispatch(c) => c.strong_convexity(),
            StageCost::Custom(f) => f.strong_convexity(),
        }
    }

    /// Gradient Lipschitz constant; `None` for non-smooth families.
    pub fn smoothness(&self) -> Option<f64> {
        match self {
            StageCost::Tracking(_) => Some(1.0),
            StageCost::Lasso(_) | StageCost::GroupLasso(_) => None,
            StageCost::Dispatch(c) => Some(c.smoothness()),
            StageCost::Custom(f) => Some(f.smoothness()),
        }
    }

    /// Upper bound on `||subgradient||` over `region`.
    pub fn lipschitz_bound(&self, region: &FeasibleBox) -> f64 {
        match self {
            StageCost::Tracking(c) => farthest_corner_norm(region, &c.target, 1.0),
            StageCost::Lasso(c) => {
                let quad = farthest_corner_norm(region, &c.mean, 2.0);
                quad + 0.5 * c.lambda * (c.mean.len() as f64).sqrt()
            }
            StageCost::GroupLasso(c) => c.lipschitz_bound(region),
            StageCost::Dispatch(c) => c.lipschitz_bound(region),
            StageCost::Custom(f) => f.lipschitz_bound(region),
        }
    }

    fn unsupported(&self, operation: &'static str) -> SocoError {
        SocoError::Unsupported {
            operation,
            family: self.family().to_string(),
        }
    }
}

fn l1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

fn sign0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `||a - c||^2 - ||b - c||^2 = <a - b, a + b - 2c>`
pub(crate) fn centered_quadratic_difference(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(c)
        .map(|((ai, bi), ci)| (ai - bi) * ((ai - ci) + (bi - ci)))
        .sum()
}

/// `scale * max_{x in region} ||x - center||`
fn farthest_corner_norm(region: &FeasibleBox, center: &[f64], scale: f64) -> f64 {
    let sq: f64 = region
        .lower()
        .iter()
        .zip(region.upper())
        .zip(center)
        .map(|((lo, hi), c)| {
            let m = (lo - c).abs().max((hi - c).abs());
            m * m
        })
        .sum();
    scale * sq.sqrt()
}

/// Max of `f` over the corners of `region` (at most 2^16 of them; beyond
/// that, the corners along each axis from the lower corner).
pub(crate) fn corner_max(region: &FeasibleBox, f: impl Fn(&[f64]) -> f64) -> f64 {
    let d = region.dim();
    let (lo, hi) = (region.lower(), region.upper());
    if lo.iter().chain(hi).any(|b| !b.is_finite()) {
        return f64::INFINITY;
    }
    let mut best = 0.0f64;
    if d <= 16 {
        let mut x = lo.to_vec();
        for mask in 0u32..(1 << d) {
            for i in 0..d {
                x[i] = if mask & (1 << i) != 0 { hi[i] } else { lo[i] };
            }
            best = best.max(f(&x));
        }
    } else {
        let mut x = lo.to_vec();
        best = best.max(f(&x));
        for i in 0..d {
            x[i] = hi[i];
            best = best.max(f(&x));
            x[i] = lo[i];
        }
    }
    best
}

/// Projected gradient descent with step `1/l`, run until the step length
/// falls below `tol * (1 + ||x||_inf)`.
pub fn projected_gradient_minimize(
    f: &dyn SmoothStageFunction,
    bounds: &FeasibleBox,
    start: &[f64],
    tol: f64,
    max_iterations: usize,
) -> Result<Vec<f64>> {
    let step = 1.0 / f.smoothness();
    let mut x = bounds.project(start)?;
    let mut last = f64::INFINITY;
    for _ in 0..max_iterations {
        let g = f.gradient(&x);
        let mut next = x.clone();
        linalg::axpy(-step, &g, &mut next);
        bounds.project_in_place(&mut next);
        last = linalg::max_abs_diff(&next, &x);
        x = next;
        if !linalg::all_finite(&x) {
            return Err(SocoError::NonFinite("projected gradient".into()));
        }
        if last <= tol * (1.0 + linalg::max_abs(&x)) {
            return Ok(x);
        }
    }
    Err(SocoError::Convergence {
        solver: "projected gradient",
        iterations: max_iterations,
        residual: last,
        secondary: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lasso_1d(us: &[f64], lambda: f64) -> StageCost {
        let samples: Vec<Vec<f64>> = us.iter().map(|u| vec![*u]).collect();
        StageCost::Lasso(LassoCost::new(&samples, lambda).unwrap())
    }

    #[test]
    fn tracking_value_and_gradient() {
        let c = StageCost::Tracking(TrackingCost::new(vec![0.0]));
        assert_eq!(c.value(&[0.0]), 0.0);
        let c = StageCost::Tracking(TrackingCost::new(vec![1.0, -2.0]));
        assert_eq!(c.subgradient(&[3.0, 0.0]), vec![2.0, 2.0]);
    }

    #[test]
    fn lasso_value_hand_example() {
        let c = lasso_1d(&[2.0], 2.0);
        assert_eq!(c.value(&[1.0]), 2.0);
    }

    #[test]
    fn lasso_value_matches_sample_sum() {
        let us = [1.5, -0.25, 3.0, 0.75];
        let c = lasso_1d(&us, 3.0);
        let x = 0.6;
        let direct = us.iter().map(|u| (x - u) * (x - u)).sum::<f64>() / us.len() as f64 + 1.5 * x;
        assert!((c.value(&[x]) - direct).abs() < 1e-13);
    }

    #[test]
    fn lasso_kink_subgradient_is_quadratic_part() {
        let c = lasso_1d(&[2.0, 4.0], 10.0);
        assert_eq!(c.subgradient(&[0.0]), vec![-6.0]);
    }

    #[test]
    fn lasso_minimizer_soft_thresholds_mean() {
        let c = lasso_1d(&[3.0, 5.0], 8.0);
        let b = FeasibleBox::unbounded(1);
        assert_eq!(c.minimizer(&b).unwrap(), vec![2.0]);
        let c = lasso_1d(&[0.5], 8.0);
        assert_eq!(c.minimizer(&b).unwrap(), vec![0.0]);
    }

    #[test]
    fn prox_fixed_point_at_interior_minimizer() {
        let b = FeasibleBox::uniform(2, -10.0, 10.0).unwrap();
        let c = StageCost::Tracking(TrackingCost::new(vec![1.0, 2.0]));
        for tau in [0.01, 1.0, 100.0] {
            let z = c.prox(tau, &[1.0, 2.0], &b).unwrap();
            assert!(linalg::max_abs_diff(&z, &[1.0, 2.0]) < 1e-15);
        }
    }

    #[test]
    fn prox_rejects_bad_step() {
        let b = FeasibleBox::unbounded(1);
        let c = StageCost::Tracking(TrackingCost::new(vec![1.0]));
        assert!(matches!(
            c.prox(0.0, &[0.0], &b),
            Err(SocoError::InvalidStepSize(_))
        ));
        assert!(matches!(
            c.prox(-1.0, &[0.0], &b),
            Err(SocoError::InvalidStepSize(_))
        ));
    }

    #[test]
    fn nonsmooth_gradient_is_unsupported() {
        let c = lasso_1d(&[1.0], 1.0);
        assert!(matches!(c.gradient(&[0.0]), Err(SocoError::Unsupported { .. })));
        assert!(c.smoothness().is_none());
    }

    #[test]
    fn value_difference_is_consistent() {
        let c = lasso_1d(&[1.0e3, -2.0e3], 50.0);
        let (a, b) = ([12.5], [-3.0]);
        let direct = c.value(&a) - c.value(&b);
        assert!((c.value_difference(&a, &b) - direct).abs() < 1e-9 * direct.abs().max(1.0));
    }

    #[test]
    fn tracking_lipschitz_bound_uses_farthest_corner() {
        let c = StageCost::Tracking(TrackingCost::new(vec![1.0]));
        let region = FeasibleBox::uniform(1, -2.0, 2.0).unwrap();
        assert_eq!(c.lipschitz_bound(&region), 3.0);
    }
}
