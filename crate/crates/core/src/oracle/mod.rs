//! Approximate commitment oracles: given type weights `w` and an optional
//! linear tilt `s`, find an `epsilon`-maximizer over the simplex of
//! `sum_k w_k x^T U y^k(x) + <s, x>`.

pub mod br;
pub mod lp;
pub mod qr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameInstance, ResponseMode, TypeWeights};
use crate::simplex::{dot, SimplexPoint};

pub use br::{br_oracle, precompute_feasible_profiles, FeasibleProfiles, ProfileRegion, DEFAULT_PROFILE_CAP};
pub use lp::{lp_solve, Halfspace, LpOutcome};
pub use qr::{qr_oracle, QrOracleConfig};

#[derive(Debug, Clone)]
pub struct OracleRequest<'a> {
    pub game: &'a GameInstance,
    pub weights: TypeWeights,
    pub linear_tilt: Option<Vec<f64>>,
    pub mode: ResponseMode,
    pub epsilon: f64,
}

impl OracleRequest<'_> {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.weights.len() != self.game.k() {
            return Err(Error::Dimension {
                expected: self.game.k(),
                got: self.weights.len(),
            });
        }
        if let Some(t) = &self.linear_tilt {
            if t.len() != self.game.n() {
                return Err(Error::Dimension {
                    expected: self.game.n(),
                    got: t.len(),
                });
            }
            if t.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("tilt must be finite".into()));
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::Config(format!("oracle epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }

    pub(crate) fn tilt_or_zero(&self) -> Vec<f64> {
        self.linear_tilt.clone().unwrap_or_else(|| vec![0.0; self.game.n()])
    }

    /// The objective this request asks to maximize, evaluated at `x`.
    pub fn objective(&self, x: &SimplexPoint) -> Result<f64> {
        let base = self.game.weighted_objective(x, &self.weights, self.mode)?;
        Ok(base + self.linear_tilt.as_ref().map_or(0.0, |t| dot(t, x)))
    }
}

/// How the result was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certificate {
    /// Every feasible best-response profile was solved exactly.
    EnumerationComplete,
    /// Heuristic search over a fixed budget.
    SearchBudgetExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub x_star: SimplexPoint,
    /// Objective re-evaluated at `x_star`.
    pub value: f64,
    /// Follower action per type at `x_star` (best-response mode only).
    pub profile: Option<Vec<usize>>,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    pub profile_cap: usize,
    pub qr: QrOracleConfig,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            profile_cap: DEFAULT_PROFILE_CAP,
            qr: QrOracleConfig::default(),
        }
    }
}

/// Both oracles for one game. The best-response profile cache is built on
/// construction when `mode` is [`ResponseMode::Br`] and is read-only
/// afterwards, so one `Oracle` can serve many threads.
#[derive(Debug, Clone)]
pub struct Oracle {
    profiles: Option<FeasibleProfiles>,
    qr: QrOracleConfig,
}

impl Oracle {
    pub fn new(game: &GameInstance, mode: ResponseMode, config: &OracleConfig) -> Result<Self> {
        let profiles = match mode {
            ResponseMode::Br => Some(precompute_feasible_profiles(game, config.profile_cap)?),
            ResponseMode::Qr => None,
        };
        Ok(Oracle {
            profiles,
            qr: config.qr.clone(),
        })
    }

    pub fn profiles(&self) -> Option<&FeasibleProfiles> {
        self.profiles.as_ref()
    }

    pub fn solve(&self, req: &OracleRequest<'_>) -> Result<OracleResult> {
        match req.mode {
            ResponseMode::Qr => qr_oracle(req, &self.qr),
            ResponseMode::Br => match &self.profiles {
                Some(p) => br_oracle(req, p),
                None => Err(Error::Config(
                    "oracle was built for quantal responses; best-response profiles are missing".into(),
                )),
            },
        }
    }
}
