//! Experiment definitions, seeded instance construction and W-sweeps.

pub mod dispatch_data;
pub mod rng;
mod sweep;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use sweep::{
    run_sweep, write_metadata_json, write_results_csv, write_timing_csv, write_trajectory_csv, CellOutcome,
    SeedSummary, SweepRequest, SweepResult, SweepRow,
};

use crate::algorithms::{Algorithm, AlgorithmConfig, Initialization};
use crate::costs::{contiguous_groups, DispatchCost, GroupLassoCost, LassoCost, StageCost, TrackingCost};
use crate::error::{Result, SocoError};
use crate::problem::{FeasibleBox, ProblemInstance};
use crate::switching::SwitchingCost;
use dispatch_data::{ingest_dispatch_csv, parse_dispatch_csv, synthetic_profile, DispatchProfile};
use rng::DataRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExperimentId {
    E1,
    E2,
    E3,
    E4,
    E5,
    E6,
    E7,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 7] = [
        ExperimentId::E1,
        ExperimentId::E2,
        ExperimentId::E3,
        ExperimentId::E4,
        ExperimentId::E5,
        ExperimentId::E6,
        ExperimentId::E7,
    ];
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for ExperimentId {
    type Err = SocoError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|id| id.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| SocoError::InvalidArgument(format!("unknown experiment '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchKind {
    Quadratic,
    SumSquared,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartSpec {
    Zero,
    /// `x0 ~ N(0, I)`, drawn before any cost data.
    Gaussian,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ProfileSource {
    /// The synthetic week shipped with the crate.
    Bundled,
    /// A freshly generated synthetic profile.
    Synthetic {
        seed: u64,
    },
    Csv {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostSpec {
    /// `samples` points `u_j ~ N(0, sigma^2 I)`, drawn once and shared by
    /// every stage unless `per_stage` is set.
    Lasso {
        sigma: f64,
        samples: usize,
        lambda: f64,
        per_stage: bool,
    },
    /// Target `u ~ N(0, I)` with contiguous overlapping groups, shared by
    /// every stage unless `per_stage` is set.
    GroupLasso {
        count: usize,
        stride: usize,
        width: usize,
        per_stage: bool,
    },
    /// Targets `u_t ~ N(0, I)`.
    GaussianTracking,
    /// Fixed targets, one per stage.
    FixedTracking { targets: Vec<Vec<f64>> },
    /// `u = (12 cos s - 4 cos 6s, 12 sin s - 4 cos 6s)` at `s = 2 pi (k-1)/(N-1)`.
    FlowerTracking,
    /// Generators `(a, b, c)` with imbalance weight `xi`.
    Dispatch {
        generators: Vec<(f64, f64, f64)>,
        xi: f64,
        profile: ProfileSource,
    },
}

/// Full parameter set of one experiment. Infinite box sides are `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub dim: usize,
    pub horizon: usize,
    pub gamma: f64,
    pub lower: Vec<Option<f64>>,
    pub upper: Vec<Option<f64>>,
    pub switching: SwitchKind,
    pub x0: StartSpec,
    pub cost: CostSpec,
    /// Overrides the OGD initialization step of smooth instances.
    pub ogd_eta: Option<f64>,
    pub windows: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub notes: Vec<String>,
}

pub const E5_TARGETS: [f64; 20] = [
    6.0, 0.0, 6.0, 0.0, 6.0, 6.0, 0.0, 6.0, 6.0, 0.0, 6.0, 6.0, 0.0, 6.0, 6.0, 6.0, 6.0, 6.0, 6.0, 6.0,
];

pub const E7_GENERATORS: [(f64, f64, f64); 3] = [(1.0, 15.0, 10.0), (1.2, 10.0, 27.0), (1.4, 6.0, 21.0)];

fn uniform_side(dim: usize, v: f64) -> Vec<Option<f64>> {
    vec![Some(v); dim]
}

impl ExperimentSpec {
    pub fn default_for(id: ExperimentId) -> Self {
        use Algorithm::*;
        let sweep: Vec<usize> = (1..=15).collect();
        let base = |dim: usize, horizon: usize, gamma: f64, half_width: f64, cost: CostSpec| Self {
            id,
            dim,
            horizon,
            gamma,
            lower: uniform_side(dim, -half_width),
            upper: uniform_side(dim, half_width),
            switching: SwitchKind::Quadratic,
            x0: StartSpec::Zero,
            cost,
            ogd_eta: None,
            windows: sweep.clone(),
            algorithms: vec![Rhapd, Fista, Pgd, Rham, Mpc],
            notes: Vec::new(),
        };
        match id {
            ExperimentId::E1 => base(
                1,
                100,
                10.0,
                1e5,
                CostSpec::Lasso {
                    sigma: 1000.0,
                    samples: 60,
                    lambda: 50.0,
                    per_stage: false,
                },
            ),
            ExperimentId::E2 => Self {
                lower: vec![Some(-100.0), Some(-10.0)],
                upper: vec![Some(100.0), Some(10.0)],
                switching: SwitchKind::SumSquared,
                algorithms: vec![Rhapd, Fista, Pgd, Mpc],
                notes: vec!["gamma = 2*sqrt(2); pass --gamma 2 for the alternative reading".into()],
                ..base(
                    2,
                    100,
                    2.0 * std::f64::consts::SQRT_2,
                    0.0,
                    CostSpec::Lasso {
                        sigma: 100.0,
                        samples: 1,
                        lambda: 1.0,
                        per_stage: false,
                    },
                )
            },
            ExperimentId::E3 => base(
                50,
                30,
                10.0,
                1e7,
                CostSpec::GroupLasso {
                    count: 9,
                    stride: 5,
                    width: 10,
                    per_stage: false,
                },
            ),
            ExperimentId::E4 => Self {
                x0: StartSpec::Gaussian,
                algorithms: vec![Rhapd, RhapdS, Rham, Rhgd, Rhag, Fista, Pgd, Mpc],
                notes: vec!["gamma in {0.1, 25, 300}; default 25".into()],
                ..base(1, 100, 25.0, 1e6, CostSpec::GaussianTracking)
            },
            ExperimentId::E5 => Self {
                lower: vec![Some(0.0)],
                upper: vec![Some(6.0)],
                ogd_eta: Some(0.4),
                algorithms: vec![RhapdS, Rhgd, Rhag, Rhapd, Mpc],
                ..base(
                    1,
                    20,
                    20.0,
                    0.0,
                    CostSpec::FixedTracking {
                        targets: E5_TARGETS.iter().map(|u| vec![*u]).collect(),
                    },
                )
            },
            ExperimentId::E6 => Self {
                x0: StartSpec::Gaussian,
                windows: vec![10],
                algorithms: vec![RhapdS, Rhapd, Rhgd, Rhag, Mpc],
                notes: vec![
                    "targets sampled at s_k = 2 pi (k-1)/(N-1); second coordinate uses cos(6s)".into(),
                ],
                ..base(2, 300, 1.0, 1e6, CostSpec::FlowerTracking)
            },
            ExperimentId::E7 => Self {
                lower: vec![Some(0.0); 3],
                upper: vec![None; 3],
                algorithms: vec![RhapdS, Rhgd, Rhag, Rhapd, Mpc],
                ..base(
                    3,
                    168,
                    1.0,
                    0.0,
                    CostSpec::Dispatch {
                        generators: E7_GENERATORS.to_vec(),
                        xi: 1.2,
                        profile: ProfileSource::Bundled,
                    },
                )
            },
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_windows(mut self, windows: Vec<usize>) -> Self {
        self.windows = windows;
        self
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        if let CostSpec::FixedTracking { targets } = &mut self.cost {
            targets.truncate(horizon);
        }
        self
    }

    pub fn with_profile(mut self, source: ProfileSource) -> Self {
        if let CostSpec::Dispatch { profile, .. } = &mut self.cost {
            *profile = source;
        }
        self
    }

    pub fn feasible_box(&self) -> Result<FeasibleBox> {
        if self.lower.len() != self.dim || self.upper.len() != self.dim {
            return Err(SocoError::dims(self.dim, self.lower.len().min(self.upper.len())));
        }
        FeasibleBox::new(
            self.lower
                .iter()
                .map(|v| v.unwrap_or(f64::NEG_INFINITY))
                .collect(),
            self.upper.iter().map(|v| v.unwrap_or(f64::INFINITY)).collect(),
        )
    }

    fn switching_cost(&self) -> SwitchingCost {
        match self.switching {
            SwitchKind::Quadratic => SwitchingCost::Quadratic { gamma: self.gamma },
            SwitchKind::SumSquared => SwitchingCost::SumSquared { gamma: self.gamma },
        }
    }

    /// Default configuration for `alg` on an instance of this experiment.
    pub fn config_for(&self, alg: Algorithm, inst: &ProblemInstance) -> AlgorithmConfig {
        let config = AlgorithmConfig::for_algorithm(alg, inst);
        match (self.ogd_eta, config.init) {
            (Some(eta), Initialization::Ogd { .. }) => config.with_init(Initialization::Ogd { eta }),
            _ => config,
        }
    }

    /// The dispatch profile this spec refers to, if any.
    pub fn dispatch_profile(&self) -> Result<Option<DispatchProfile>> {
        let CostSpec::Dispatch { profile, .. } = &self.cost else {
            return Ok(None);
        };
        let p = match profile {
            ProfileSource::Bundled => {
                let p = parse_dispatch_csv(
                    dispatch_data::BUNDLED_PROFILE_CSV.as_bytes(),
                    dispatch_data::BUNDLED_HOURS,
                )?;
                if self.horizon > p.len() {
                    return Err(SocoError::Length {
                        expected: self.horizon,
                        found: p.len(),
                    });
                }
                DispatchProfile {
                    demand: p.demand[..self.horizon].to_vec(),
                    supply: p.supply[..self.horizon].to_vec(),
                }
            }
            ProfileSource::Synthetic { seed } => synthetic_profile(self.horizon, *seed),
            ProfileSource::Csv { path } => ingest_dispatch_csv(path, self.horizon)?,
        };
        Ok(Some(p))
    }
}

/// One cost per stage, repeating a single shared cost when needed.
fn spread(costs: Vec<StageCost>, n: usize) -> Vec<StageCost> {
    if costs.len() == 1 {
        vec![costs[0].clone(); n]
    } else {
        costs
    }
}

/// Builds the instance for `(spec, seed)` with window `spec.windows[0]`
/// (or 1). Random draws happen in a fixed order: `x0` first when random,
/// then stage data for `t = 1..N`.
pub fn build_instance(spec: &ExperimentSpec, seed: u64) -> Result<ProblemInstance> {
    let d = spec.dim;
    let n = spec.horizon;
    if d == 0 || n == 0 {
        return Err(SocoError::InvalidArgument(
            "dimension and horizon must be positive".into(),
        ));
    }
    let bounds = spec.feasible_box()?;
    let mut rng = DataRng::new(seed);
    let x0 = match spec.x0 {
        StartSpec::Zero => vec![0.0; d],
        StartSpec::Gaussian => rng.normal_vec(d, 1.0),
    };
    let stages: Vec<StageCost> = match &spec.cost {
        CostSpec::Lasso {
            sigma,
            samples,
            lambda,
            per_stage,
        } => {
            let draws = if *per_stage { n } else { 1 };
            let costs = (0..draws)
                .map(|_| {
                    let us: Vec<Vec<f64>> = (0..*samples).map(|_| rng.normal_vec(d, *sigma)).collect();
                    LassoCost::new(&us, *lambda).map(StageCost::Lasso)
                })
                .collect::<Result<Vec<_>>>()?;
            spread(costs, n)
        }
        CostSpec::GroupLasso {
            count,
            stride,
            width,
            per_stage,
        } => {
            let groups = contiguous_groups(*count, *stride, *width);
            let draws = if *per_stage { n } else { 1 };
            let costs = (0..draws)
                .map(|_| {
                    GroupLassoCost::new(rng.normal_vec(d, 1.0), groups.clone()).map(StageCost::GroupLasso)
                })
                .collect::<Result<Vec<_>>>()?;
            spread(costs, n)
        }
        CostSpec::GaussianTracking => (0..n)
            .map(|_| StageCost::Tracking(TrackingCost::new(rng.normal_vec(d, 1.0))))
            .collect(),
        CostSpec::FixedTracking { targets } => {
            if targets.len() != n {
                return Err(SocoError::Length {
                    expected: n,
                    found: targets.len(),
                });
            }
            targets
                .iter()
                .map(|u| StageCost::Tracking(TrackingCost::new(u.clone())))
                .collect()
        }
        CostSpec::FlowerTracking => {
            if d != 2 {
                return Err(SocoError::dims(2, d));
            }
            (0..n)
                .map(|k| {
                    let s = if n > 1 {
                        2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64
                    } else {
                        0.0
                    };
                    let wobble = 4.0 * (6.0 * s).cos();
                    StageCost::Tracking(TrackingCost::new(vec![
                        12.0 * s.cos() - wobble,
                        12.0 * s.sin() - wobble,
                    ]))
                })
                .collect()
        }
        CostSpec::Dispatch { generators, xi, .. } => {
            if generators.len() != d {
                return Err(SocoError::dims(d, generators.len()));
            }
            let profile = spec.dispatch_profile()?.expect("dispatch spec has a profile");
            profile
                .demand
                .iter()
                .zip(&profile.supply)
                .map(|(dem, sup)| DispatchCost::new(generators, *xi, *dem, *sup).map(StageCost::Dispatch))
                .collect::<Result<_>>()?
        }
    };
    let window = spec.windows.first().copied().unwrap_or(1);
    ProblemInstance::new(x0, bounds, stages, spec.switching_cost(), window)
}
