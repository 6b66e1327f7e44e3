use serde::Serialize;

use crate::error::{Result, SocoError};
use crate::problem::ProblemInstance;

/// Which pair of sufficient-decrease / subgradient constants applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFamily {
    /// Proximal stages, any smooth switching cost: `(rho, beta)`.
    General,
    /// Proximal stages, quadratic switch: `(rho_q, beta_q)`.
    Quadratic,
    /// Smooth stages, quadratic switch: `(rho_s, beta_s)`.
    Smooth,
}

/// Analysis constants for a given instance and step `tau`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundConstants {
    pub family: BoundFamily,
    pub tau: f64,
    pub mu: f64,
    pub l: Option<f64>,
    pub gamma: f64,
    pub l_g: f64,
    pub g_lipschitz: f64,
    /// `mu/2 + 1/tau - l_g`
    pub rho: f64,
    /// `2 (sqrt(5) l_g + 1/tau)^2`
    pub beta_sq: f64,
    /// `mu/2 + 1/tau - gamma`
    pub rho_q: f64,
    /// `2 (gamma^2 + max((2 gamma - 1/tau)^2, (gamma - 1/tau)^2))`
    pub beta_q_sq: f64,
    /// `min(min_{t<N} (1/tau - l_t/2 + gamma), 1/tau - l_N/2 + gamma/2)`
    pub rho_s: Option<f64>,
    /// `2 (l + gamma + 1/tau)^2`
    pub beta_s_sq: Option<f64>,
    /// `sqrt(1 - mu/l)`
    pub kappa: Option<f64>,
    /// `(beta_s/l + 1) G / (1 - kappa)`
    pub delta: Option<f64>,
    /// `(l + 4 gamma) / mu`
    pub q_f: Option<f64>,
}

impl BoundConstants {
    /// Errors if the decrease constant of `family` is not positive at `tau`
    /// or the instance lacks the curvature data the family needs.
    pub fn new(inst: &ProblemInstance, tau: f64, family: BoundFamily) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(SocoError::InvalidStepSize(format!(
                "tau = {tau} must be positive"
            )));
        }
        let c = inst.constants();
        let sw = inst.switching();
        let (mu, gamma, l_g) = (c.mu, sw.gamma(), sw.l_g());
        let inv = 1.0 / tau;

        let rho = 0.5 * mu + inv - l_g;
        let beta_sq = 2.0 * (5f64.sqrt() * l_g + inv).powi(2);
        let rho_q = 0.5 * mu + inv - gamma;
        let beta_q_sq = 2.0 * (gamma * gamma + (2.0 * gamma - inv).powi(2).max((gamma - inv).powi(2)));

        let stage_l: Option<Vec<f64>> = inst.stages().iter().map(|s| s.smoothness()).collect();
        let rho_s = stage_l.as_ref().map(|ls| {
            let n = ls.len();
            let interior = ls[..n - 1]
                .iter()
                .map(|l| inv - 0.5 * l + gamma)
                .fold(f64::INFINITY, f64::min);
            interior.min(inv - 0.5 * ls[n - 1] + 0.5 * gamma)
        });
        let beta_s_sq = c.l.map(|l| 2.0 * (l + gamma + inv).powi(2));
        let kappa = c.l.map(|l| (1.0 - mu / l).max(0.0).sqrt());
        let delta = match (c.l, beta_s_sq, kappa) {
            (Some(l), Some(bs), Some(k)) => Some((bs.sqrt() / l + 1.0) * c.g_lipschitz / (1.0 - k)),
            _ => None,
        };
        let q_f = c.l.map(|l| (l + 4.0 * gamma) / mu);

        let out = Self {
            family,
            tau,
            mu,
            l: c.l,
            gamma,
            l_g,
            g_lipschitz: c.g_lipschitz,
            rho,
            beta_sq,
            rho_q,
            beta_q_sq,
            rho_s,
            beta_s_sq,
            kappa,
            delta,
            q_f,
        };
        match family {
            BoundFamily::General if !(rho > 0.0) => Err(SocoError::InvalidStepSize(format!(
                "rho = mu/2 + 1/tau - l_g = {rho} must be positive"
            ))),
            BoundFamily::Quadratic if !sw.is_quadratic() => Err(SocoError::InvalidArgument(
                "quadratic constants need a quadratic switching cost".into(),
            )),
            BoundFamily::Quadratic if !(rho_q > 0.0) => Err(SocoError::InvalidStepSize(format!(
                "rho_q = mu/2 + 1/tau - gamma = {rho_q} must be positive"
            ))),
            BoundFamily::Smooth if !sw.is_quadratic() || rho_s.is_none() => Err(SocoError::InvalidArgument(
                "smooth constants need smooth stages and a quadratic switch".into(),
            )),
            BoundFamily::Smooth if !(rho_s.unwrap_or(0.0) > 0.0) => Err(SocoError::InvalidStepSize(format!(
                "rho_s = {} must be positive",
                rho_s.unwrap_or(f64::NAN)
            ))),
            _ => Ok(out),
        }
    }

    /// `(rho, beta^2)` of the configured family.
    pub fn decrease_pair(&self) -> (f64, f64) {
        match self.family {
            BoundFamily::General => (self.rho, self.beta_sq),
            BoundFamily::Quadratic => (self.rho_q, self.beta_q_sq),
            BoundFamily::Smooth => (
                self.rho_s.expect("validated in constructor"),
                self.beta_s_sq.expect("validated in constructor"),
            ),
        }
    }

    /// Per-layer contraction `r = 1 / (1 + 2 mu rho / beta^2)`.
    pub fn rate(&self) -> f64 {
        let (rho, beta_sq) = self.decrease_pair();
        1.0 / (1.0 + 2.0 * self.mu * rho / beta_sq)
    }

    /// Regret bound of the initialization per unit path length:
    /// `G (1 + gamma/mu)` for the proximal families, `delta` for the smooth one.
    pub fn prefactor(&self) -> f64 {
        match self.family {
            BoundFamily::General | BoundFamily::Quadratic => self.g_lipschitz * (1.0 + self.gamma / self.mu),
            BoundFamily::Smooth => self.delta.expect("validated in constructor"),
        }
    }
}
