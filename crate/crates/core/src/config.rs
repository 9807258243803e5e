//! Run configuration and tolerances.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values of `a` tried in order when none is given.
pub const A_CANDIDATES: [f64; 6] = [0.5, 0.4, 0.3, 0.2, 0.1, 0.05];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// `|<c(K), e_n>|` accepted at the root.
    pub root: f64,
    /// Relative error of the section centroid identity.
    pub identity: f64,
    /// `|g^(0)| / max |g^|`.
    pub equator: f64,
    pub parseval: f64,
    pub convexity_margin: f64,
    /// Section centroid at the poles.
    pub pole: f64,
    /// Switch point between the two closed-form branches of `phi`.
    pub u_switch: f64,
    pub phi_branch: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            root: 1e-12,
            identity: 1e-6,
            equator: 1e-8,
            parseval: 1e-8,
            convexity_margin: 1e-6,
            pole: 1e-12,
            u_switch: 0.05,
            phi_branch: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub n: usize,
    /// `None` picks the first convex candidate from [`A_CANDIDATES`].
    pub a: Option<f64>,
    /// Starting `eps`; halved on guard failures.
    pub eps: f64,
    /// Cap boundary `u* + cap_margin (1 - u*)`.
    pub cap_margin: f64,
    pub quad_order: usize,
    /// Degree for analytic expansions.
    pub max_degree: usize,
    /// Degree ceiling for the bump series.
    pub bump_degree_cap: usize,
    pub max_eps_halvings: usize,
    /// Number of `u_xi` section points.
    pub alpha_grid: usize,
    pub tolerances: Tolerances,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 5,
            a: None,
            eps: 1e-3,
            cap_margin: 0.5,
            quad_order: 256,
            max_degree: 120,
            bump_degree_cap: 8192,
            max_eps_halvings: 20,
            alpha_grid: 721,
            tolerances: Tolerances::default(),
            seed: 0x5EED,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if let Some(a) = self.a {
            if !(a > 0.0 && a < 1.0) {
                return bad(format!("a must lie in (0, 1), got {a}"));
            }
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.cap_margin > 0.0 && self.cap_margin < 1.0) {
            return bad(format!("cap_margin must lie in (0, 1), got {}", self.cap_margin));
        }
        if self.quad_order < 8 || self.max_degree < 2 || self.alpha_grid < 3 {
            return bad("quad_order >= 8, max_degree >= 2 and alpha_grid >= 3 are required".into());
        }
        Ok(())
    }
}
