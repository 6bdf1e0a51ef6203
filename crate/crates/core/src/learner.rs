//! Follow-The-Perturbed-Leader commitment learners.
//!
//! Both learners draw one perturbation `sigma` before the first round and
//! keep it for the whole horizon.
//!
//! * `ftpl-memoryless` perturbs the type counts: each round it asks the
//!   oracle for a maximizer of the weighted objective with weights
//!   `G^{t-1} + sigma`, `sigma_k ~ U[0, 2/nu]`.
//! * `ftpl-memory` perturbs the leader strategy linearly: weights `G^{t-1}`
//!   plus the tilt `<sigma, x>`, `sigma_n ~ Exp(nu)`.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameInstance, ResponseMode, TypeWeights};
use crate::oracle::{Oracle, OracleRequest, OracleResult};

/// RNG stream used for perturbation draws (adversaries use another one).
pub(crate) const PERTURBATION_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "ftpl-memoryless")]
    FtplMemoryless,
    #[serde(rename = "ftpl-memory")]
    FtplMemory,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ftpl-memoryless" => Ok(Algorithm::FtplMemoryless),
            "ftpl-memory" => Ok(Algorithm::FtplMemory),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::FtplMemoryless => "ftpl-memoryless",
            Algorithm::FtplMemory => "ftpl-memory",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PerturbationKind {
    /// `K` entries i.i.d. uniform on `[0, 2/nu]`.
    UniformBox { nu: f64 },
    /// `N` entries i.i.d. exponential with rate `nu`.
    ExponentialVec { nu: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    pub seed: u64,
}

impl PerturbationSpec {
    /// Draws `dim` entries from a fresh generator seeded with `seed`.
    pub fn draw(&self, dim: usize) -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(PERTURBATION_STREAM);
        match self.kind {
            PerturbationKind::UniformBox { nu } => {
                check_nu(nu)?;
                let dist = Uniform::new_inclusive(0.0, 2.0 / nu)
                    .map_err(|e| Error::Config(format!("uniform perturbation: {e}")))?;
                Ok((0..dim).map(|_| dist.sample(&mut rng)).collect())
            }
            PerturbationKind::ExponentialVec { nu } => {
                check_nu(nu)?;
                let dist = Exp::new(nu).map_err(|e| Error::Config(format!("exponential perturbation: {e}")))?;
                Ok((0..dim).map(|_| dist.sample(&mut rng)).collect())
            }
        }
    }
}

fn check_nu(nu: f64) -> Result<()> {
    if nu.is_finite() && nu > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("nu must be positive, got {nu}")))
    }
}

/// `sqrt(K / H)`.
pub fn nu_memoryless(types: usize, horizon: usize) -> f64 {
    (types as f64 / horizon as f64).sqrt()
}

/// `(||U||_1 (1 + L) sqrt(50 N (theta + H)))^{-1}` with `L` the game's
/// quantal Lipschitz constant. `theta` may be `Theta_H` or any upper bound.
pub fn nu_memory(game: &GameInstance, n: usize, horizon: usize, theta: f64) -> f64 {
    nu_memory_from(game.u_norm1(), game.qr_lipschitz(), n, horizon, theta)
}

pub fn nu_memory_from(u_norm1: f64, lipschitz: f64, n: usize, horizon: usize, theta: f64) -> f64 {
    1.0 / (u_norm1 * (1.0 + lipschitz) * (50.0 * n as f64 * (theta + horizon as f64)).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    pub algorithm: Algorithm,
    pub mode: ResponseMode,
    pub epsilon: f64,
    pub nu: f64,
    pub seed: u64,
}

impl LearnerConfig {
    pub fn perturbation(&self) -> PerturbationSpec {
        let kind = match self.algorithm {
            Algorithm::FtplMemoryless => PerturbationKind::UniformBox { nu: self.nu },
            Algorithm::FtplMemory => PerturbationKind::ExponentialVec { nu: self.nu },
        };
        PerturbationSpec { kind, seed: self.seed }
    }
}

/// State of one learner over one horizon.
#[derive(Debug, Clone)]
pub struct Learner {
    algorithm: Algorithm,
    mode: ResponseMode,
    epsilon: f64,
    sigma: Vec<f64>,
    counts: TypeWeights,
    t: usize,
}

impl Learner {
    pub fn new(game: &GameInstance, cfg: &LearnerConfig) -> Result<Self> {
        if !(cfg.epsilon.is_finite() && cfg.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", cfg.epsilon)));
        }
        let dim = match cfg.algorithm {
            Algorithm::FtplMemoryless => game.k(),
            Algorithm::FtplMemory => game.n(),
        };
        Ok(Learner {
            algorithm: cfg.algorithm,
            mode: cfg.mode,
            epsilon: cfg.epsilon,
            sigma: cfg.perturbation().draw(dim)?,
            counts: TypeWeights::zeros(game.k()),
            t: 1,
        })
    }

    /// The perturbation drawn at construction.
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// `G^{t-1}`.
    pub fn counts(&self) -> &TypeWeights {
        &self.counts
    }

    /// Index of the round about to be played (starts at 1).
    pub fn round(&self) -> usize {
        self.t
    }

    /// The oracle request for the current round.
    pub fn request<'a>(&self, game: &'a GameInstance) -> Result<OracleRequest<'a>> {
        let (weights, tilt) = match self.algorithm {
            Algorithm::FtplMemoryless => (self.counts.plus(&self.sigma)?, None),
            Algorithm::FtplMemory => (self.counts.clone(), Some(self.sigma.clone())),
        };
        Ok(OracleRequest {
            game,
            weights,
            linear_tilt: tilt,
            mode: self.mode,
            epsilon: self.epsilon,
        })
    }

    /// One oracle call producing `x^t`.
    pub fn next_commitment(&self, game: &GameInstance, oracle: &Oracle) -> Result<OracleResult> {
        oracle.solve(&self.request(game)?)
    }

    /// Records the revealed follower type `k` and advances the round.
    pub fn observe(&mut self, k: usize) -> Result<()> {
        if k >= self.counts.len() {
            return Err(Error::TypeIndex {
                index: k,
                types: self.counts.len(),
            });
        }
        self.counts.add_count(k);
        self.t += 1;
        Ok(())
    }
}
