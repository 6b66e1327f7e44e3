//! Problem data model: feasible box, stage/switching cost sequence, objective
//! evaluation and the path-length / regret primitives.

use std::sync::Arc;

use serde::Serialize;

use crate::costs::StageCost;
use crate::error::{Result, SocoError};
use crate::linalg;
use crate::switching::SwitchingCost;

/// Axis-aligned box `{x : lower <= x <= upper}`. Bounds may be infinite.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibleBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl FeasibleBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(SocoError::dims(lower.len(), upper.len()));
        }
        if lower.is_empty() {
            return Err(SocoError::InvalidArgument(
                "box dimension must be positive".into(),
            ));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(SocoError::InvalidArgument(format!(
                    "box coordinate {i}: lower {lo} exceeds upper {hi}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn uniform(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn unbounded(dim: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn nonnegative(dim: usize) -> Self {
        Self {
            lower: vec![0.0; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(|b| b.is_finite())
    }

    /// Euclidean projection, i.e. a coordinate-wise clamp.
    pub fn project(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(SocoError::dims(self.dim(), v.len()));
        }
        Ok(self.project_unchecked(v))
    }

    pub(crate) fn project_unchecked(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(x, (lo, hi))| x.max(*lo).min(*hi))
            .collect()
    }

    pub(crate) fn project_in_place(&self, v: &mut [f64]) {
        for (x, (lo, hi)) in v.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *x = x.max(*lo).min(*hi);
        }
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        v.len() == self.dim()
            && v.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| *x >= lo - tol && *x <= hi + tol)
    }

    /// Intersection with another box of the same dimension.
    pub fn intersect(&self, other: &FeasibleBox) -> Result<FeasibleBox> {
        if other.dim() != self.dim() {
            return Err(SocoError::dims(self.dim(), other.dim()));
        }
        let lower = self
            .lower
            .iter()
            .zip(&other.lower)
            .map(|(a, b)| a.max(*b))
            .collect();
        let upper = self
            .upper
            .iter()
            .zip(&other.upper)
            .map(|(a, b)| a.min(*b))
            .collect();
        FeasibleBox::new(lower, upper)
    }

    /// Smallest box containing all `points`.
    pub fn bounding(points: &[&[f64]]) -> Result<FeasibleBox> {
        let first = points
            .first()
            .ok_or_else(|| SocoError::InvalidArgument("no points to bound".into()))?;
        let mut lower = first.to_vec();
        let mut upper = first.to_vec();
        for p in &points[1..] {
            if p.len() != lower.len() {
                return Err(SocoError::dims(lower.len(), p.len()));
            }
            for i in 0..p.len() {
                lower[i] = lower[i].min(p[i]);
                upper[i] = upper[i].max(p[i]);
            }
        }
        FeasibleBox::new(lower, upper)
    }
}

/// Committed actions `x_1..x_N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory(pub Vec<Vec<f64>>);

impl Trajectory {
    pub fn points(&self) -> &[Vec<f64>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub stage_total: f64,
    pub switching_total: f64,
    pub objective: f64,
}

/// Curvature and Lipschitz data attached to an instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InstanceConstants {
    /// Bound on stage-cost subgradient norms over the region of interest.
    pub g_lipschitz: f64,
    /// Smallest stage strong-convexity modulus.
    pub mu: f64,
    /// Largest stage smoothness constant; `None` if some stage is non-smooth.
    pub l: Option<f64>,
}

/// A finite-horizon SOCO instance with its prediction window.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    x0: Vec<f64>,
    bounds: FeasibleBox,
    stages: Arc<Vec<StageCost>>,
    switching: SwitchingCost,
    window: usize,
    minimizers: Arc<Vec<Vec<f64>>>,
    constants: InstanceConstants,
}

impl ProblemInstance {
    /// Validates the data and precomputes the stage minimizers and constants.
    ///
    /// For unbounded boxes the Lipschitz bound `G` is taken over the box
    /// spanned by `x0` and the stage minimizers.
    pub fn new(
        x0: Vec<f64>,
        bounds: FeasibleBox,
        stages: Vec<StageCost>,
        switching: SwitchingCost,
        window: usize,
    ) -> Result<Self> {
        let d = bounds.dim();
        if x0.len() != d {
            return Err(SocoError::dims(d, x0.len()));
        }
        if !bounds.contains(&x0, 1e-12) {
            return Err(SocoError::InvalidArgument(
                "x0 lies outside the feasible box".into(),
            ));
        }
        if stages.is_empty() {
            return Err(SocoError::InvalidArgument("horizon must be at least 1".into()));
        }
        if window == 0 || window > stages.len() {
            return Err(SocoError::InvalidArgument(format!(
                "window W = {window} must satisfy 1 <= W <= N = {}",
                stages.len()
            )));
        }
        for (t, s) in stages.iter().enumerate() {
            if s.dim() != d {
                return Err(SocoError::InvalidArgument(format!(
                    "stage {} has dimension {}, expected {d}",
                    t + 1,
                    s.dim()
                )));
            }
        }
        switching.validate()?;

        let minimizers = stages
            .iter()
            .map(|s| s.minimizer(&bounds))
            .collect::<Result<Vec<_>>>()?;

        let mu = stages
            .iter()
            .map(|s| s.strong_convexity())
            .fold(f64::INFINITY, f64::min);
        let l = stages
            .iter()
            .map(|s| s.smoothness())
            .try_fold(0.0f64, |acc, l| l.map(|l| acc.max(l)));

        let region = if bounds.is_bounded() {
            bounds.clone()
        } else {
            let mut pts: Vec<&[f64]> = vec![&x0];
            pts.extend(minimizers.iter().map(|m| m.as_slice()));
            FeasibleBox::bounding(&pts)?.intersect(&bounds)?
        };
        let g_lipschitz = stages
            .iter()
            .map(|s| s.lipschitz_bound(&region))
            .fold(0.0f64, f64::max);

        Ok(Self {
            x0,
            bounds,
            stages: Arc::new(stages),
            switching,
            window,
            minimizers: Arc::new(minimizers),
            constants: InstanceConstants { g_lipschitz, mu, l },
        })
    }

    /// Same data with a different prediction window.
    pub fn with_window(&self, window: usize) -> Result<Self> {
        if window == 0 || window > self.horizon() {
            return Err(SocoError::InvalidArgument(format!(
                "window W = {window} must satisfy 1 <= W <= N = {}",
                self.horizon()
            )));
        }
        let mut out = self.clone();
        out.window = window;
        Ok(out)
    }

    /// Replace the estimated Lipschitz bound `G`.
    pub fn with_lipschitz(mut self, g: f64) -> Self {
        self.constants.g_lipschitz = g;
        self
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub fn horizon(&self) -> usize {
        self.stages.len()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn bounds(&self) -> &FeasibleBox {
        &self.bounds
    }

    /// Stage `t` in 1-based indexing.
    pub fn stage(&self, t: usize) -> &StageCost {
        &self.stages[t - 1]
    }

    pub fn stages(&self) -> &[StageCost] {
        &self.stages
    }

    pub fn switching(&self) -> &SwitchingCost {
        &self.switching
    }

    pub fn constants(&self) -> InstanceConstants {
        self.constants
    }

    /// `theta_1..theta_N`, each the minimizer of `f_t` over the box.
    pub fn stage_minimizers(&self) -> &[Vec<f64>] {
        &self.minimizers
    }

    pub fn all_smooth(&self) -> bool {
        self.constants.l.is_some()
    }

    pub fn all_proximable(&self) -> bool {
        self.stages.iter().all(|s| s.is_proximable())
    }

    fn check_points(&self, xs: &[Vec<f64>]) -> Result<()> {
        if xs.len() != self.horizon() {
            return Err(SocoError::Length {
                expected: self.horizon(),
                found: xs.len(),
            });
        }
        for x in xs {
            if x.len() != self.dim() {
                return Err(SocoError::dims(self.dim(), x.len()));
            }
        }
        Ok(())
    }

    /// Objective breakdown of a full trajectory, anchored at `x0`.
    pub fn total_cost(&self, traj: &Trajectory) -> Result<CostBreakdown> {
        self.cost_of(&traj.0)
    }

    pub fn cost_of(&self, xs: &[Vec<f64>]) -> Result<CostBreakdown> {
        self.check_points(xs)?;
        let mut stage_total = 0.0;
        let mut switching_total = 0.0;
        let mut prev = self.x0.as_slice();
        for (s, x) in self.stages.iter().zip(xs) {
            stage_total += s.value(x);
            switching_total += self.switching.value(x, prev);
            prev = x;
        }
        if !stage_total.is_finite() || !switching_total.is_finite() {
            return Err(SocoError::NonFinite("objective evaluation".into()));
        }
        Ok(CostBreakdown {
            stage_total,
            switching_total,
            objective: stage_total + switching_total,
        })
    }

    pub fn objective(&self, xs: &[Vec<f64>]) -> Result<f64> {
        Ok(self.cost_of(xs)?.objective)
    }

    /// `J(a) - J(b)` accumulated term by term, which avoids the cancellation
    /// of subtracting two large objective values.
    pub fn objective_difference(&self, a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
        self.check_points(a)?;
        self.check_points(b)?;
        Ok(self.segment_difference(1, &self.x0, a, &self.x0, b))
    }

    /// Objective of stages `start..start + xs.len()` anchored at `anchor`.
    pub(crate) fn segment_objective(&self, start: usize, anchor: &[f64], xs: &[Vec<f64>]) -> f64 {
        let mut total = 0.0;
        let mut prev = anchor;
        for (i, x) in xs.iter().enumerate() {
            total += self.stage(start + i).value(x) + self.switching.value(x, prev);
            prev = x;
        }
        total
    }

    pub(crate) fn segment_difference(
        &self,
        start: usize,
        anchor_a: &[f64],
        a: &[Vec<f64>],
        anchor_b: &[f64],
        b: &[Vec<f64>],
    ) -> f64 {
        let mut total = 0.0;
        let (mut pa, mut pb) = (anchor_a, anchor_b);
        for (i, (xa, xb)) in a.iter().zip(b).enumerate() {
            total += self.stage(start + i).value_difference(xa, xb);
            total += self.switching.value_difference((xa, pa), (xb, pb));
            pa = xa;
            pb = xb;
        }
        total
    }

    /// Per-stage costs `f_t(x_t) + g(x_t, x_{t-1})`.
    pub fn stage_costs(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check_points(xs)?;
        let mut prev = self.x0.as_slice();
        Ok(xs
            .iter()
            .zip(self.stages.iter())
            .map(|(x, s)| {
                let c = s.value(x) + self.switching.value(x, prev);
                prev = x;
                c
            })
            .collect())
    }

    /// Path length of the stage minimizers with `theta_0 = x0`.
    pub fn path_length(&self) -> f64 {
        self.path_length_with(PathConvention::FromX0)
    }

    pub fn path_length_with(&self, convention: PathConvention) -> f64 {
        let theta = self.stage_minimizers();
        let tail: f64 = theta.windows(2).map(|w| linalg::dist(&w[1], &w[0])).sum();
        match convention {
            PathConvention::FromX0 => linalg::dist(&theta[0], &self.x0) + tail,
            PathConvention::FromSecondStage => tail,
        }
    }
}

/// Which terms enter the path length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PathConvention {
    /// Sum from `t = 1` with `theta_0 = x0`, as used in the regret bounds.
    #[default]
    FromX0,
    /// Sum from `t = 2`.
    FromSecondStage,
}
