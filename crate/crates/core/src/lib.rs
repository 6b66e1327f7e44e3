//! Receding-horizon solvers for smoothed online convex optimization with a
//! finite prediction window.
//!
//! An instance pays `f_t(x_t) + g(x_t, x_{t-1})` at every stage over a box.
//! The crate provides the alternating proximal methods (RHAPD, RHAPD-S,
//! RHAM), the usual baselines (online PGD, FISTA, RHGD, RHAG, MPC), the
//! offline optimum, the regret bounds and audits of the lemmas behind them,
//! and the experiment harness used by the `soco` binary.

// `!(x > 0.0)` style guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod analysis;
pub mod costs;
mod error;
pub mod experiments;
pub mod linalg;
pub mod problem;
pub mod switching;

pub use algorithms::{
    offline_optimum, run, Algorithm, AlgorithmConfig, Initialization, IterateGrid, OfflineOptimum, RunResult,
};
pub use analysis::{audit_grid, regret, AuditReport, BoundConstants, BoundFamily};
pub use costs::StageCost;
pub use error::{Result, SocoError};
pub use problem::{CostBreakdown, FeasibleBox, ProblemInstance, Trajectory};
pub use switching::SwitchingCost;
