use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::game::{GameInstance, ResponseMode, TypeWeights};
use crate::learner::{Algorithm, Learner, LearnerConfig};
use crate::memory::{MemoryModel, ReputationState};
use crate::oracle::{Oracle, OracleRequest};
use crate::simplex::SimplexPoint;

use super::adversary::AdversarySpec;

/// Everything one episode needs besides the game, the adversary and seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSpec {
    pub algorithm: Algorithm,
    pub mode: ResponseMode,
    pub epsilon: f64,
    pub nu: f64,
    pub memory: MemoryModel,
    pub horizon: usize,
}

impl EpisodeSpec {
    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        self.memory.validate()?;
        if !self.memory.is_memoryless() && (self.algorithm != Algorithm::FtplMemory || self.mode != ResponseMode::Qr) {
            return Err(Error::Config(
                "followers with memory require algorithm ftpl-memory and response qr".into(),
            ));
        }
        Ok(())
    }

    pub fn learner_config(&self, seed: u64) -> LearnerConfig {
        LearnerConfig {
            algorithm: self.algorithm,
            mode: self.mode,
            epsilon: self.epsilon,
            nu: self.nu,
            seed,
        }
    }

    /// The regret bound of the configured learner for horizons `1..=H`.
    pub fn bound_trajectory(&self, game: &GameInstance) -> Vec<f64> {
        let thetas = match self.algorithm {
            Algorithm::FtplMemory => self.memory.theta_prefix(self.horizon),
            Algorithm::FtplMemoryless => vec![0.0; self.horizon],
        };
        (1..=self.horizon)
            .map(|t| self.bound_at(game, t, thetas[t - 1]))
            .collect()
    }

    /// Bound at horizon `t` given `Theta_t` (ignored without memory).
    pub fn bound_at(&self, game: &GameInstance, t: usize, theta: f64) -> f64 {
        match self.algorithm {
            Algorithm::FtplMemoryless => memoryless_regret_bound(game.u_bar(), game.k(), t, self.epsilon),
            Algorithm::FtplMemory => {
                memory_regret_bound(game.n(), game.u_norm1(), game.qr_lipschitz(), t, theta, self.epsilon)
            }
        }
    }
}

/// `2 Ubar sqrt(K H) + eps (H + 1)`, or 0 at `H = 0`, `eps = 0`.
pub fn memoryless_regret_bound(u_bar: f64, types: usize, horizon: usize, epsilon: f64) -> f64 {
    if horizon == 0 && epsilon == 0.0 {
        return 0.0;
    }
    let h = horizon as f64;
    2.0 * u_bar * (types as f64 * h).sqrt() + epsilon * (h + 1.0)
}

/// `10 N ||U||_1 (1 + L) sqrt(2 N (H + Theta)) + eps (13 H + 1)`.
pub fn memory_regret_bound(n: usize, u_norm1: f64, lipschitz: f64, horizon: usize, theta: f64, epsilon: f64) -> f64 {
    if horizon == 0 && epsilon == 0.0 {
        return 0.0;
    }
    let n = n as f64;
    let h = horizon as f64;
    10.0 * n * u_norm1 * (1.0 + lipschitz) * (2.0 * n * (h + theta)).sqrt() + epsilon * (13.0 * h + 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    pub x: SimplexPoint,
    /// Reputation the followers respond to; equals `x` without memory.
    pub z: SimplexPoint,
    pub g: usize,
    pub payoff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunLedger {
    pub learner_seed: u64,
    pub adversary_seed: u64,
    pub records: Vec<RoundRecord>,
    /// `G^H`.
    pub counts: TypeWeights,
    pub cumulative_payoff: f64,
    /// Prefix benchmark `max_x <Y(x)^T U^T x, G^t>` for `t = 1..=H`.
    pub benchmarks: Vec<f64>,
    /// Maximizer of the full-horizon benchmark.
    pub benchmark_point: SimplexPoint,
    /// Prefix regret: `benchmarks[t] - sum_{tau <= t} payoff`.
    pub regret: Vec<f64>,
    pub bound: Vec<f64>,
}

impl RunLedger {
    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    pub fn benchmark(&self) -> f64 {
        self.benchmarks.last().copied().unwrap_or(0.0)
    }

    pub fn final_regret(&self) -> f64 {
        self.regret.last().copied().unwrap_or(0.0)
    }

    pub fn payoffs(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.payoff).collect()
    }
}

/// Prefix regret from the stored payoffs and prefix benchmarks.
pub fn regret_curve(ledger: &RunLedger) -> Vec<f64> {
    prefix_regret(&ledger.payoffs(), &ledger.benchmarks)
}

fn prefix_regret(payoffs: &[f64], benchmarks: &[f64]) -> Vec<f64> {
    let mut cum = 0.0;
    payoffs
        .iter()
        .zip(benchmarks)
        .map(|(p, b)| {
            cum += p;
            b - cum
        })
        .collect()
}

/// Prefix regret with every payoff recomputed from the stored `(x, z, g)`.
pub fn recompute_regret(game: &GameInstance, mode: ResponseMode, ledger: &RunLedger) -> Result<Vec<f64>> {
    let mut buf = vec![0.0; game.m()];
    let mut payoffs = Vec::with_capacity(ledger.horizon());
    for r in &ledger.records {
        check_round(game, &r.x, &r.z, r.g)?;
        payoffs.push(round_payoff(game, mode, &r.x, &r.z, r.g, &mut buf));
    }
    Ok(prefix_regret(&payoffs, &ledger.benchmarks))
}

fn check_round(game: &GameInstance, x: &SimplexPoint, z: &SimplexPoint, g: usize) -> Result<()> {
    if g >= game.k() {
        return Err(Error::TypeIndex { index: g, types: game.k() });
    }
    for p in [x, z] {
        if p.dim() != game.n() {
            return Err(Error::Dimension {
                expected: game.n(),
                got: p.dim(),
            });
        }
    }
    Ok(())
}

/// `x^T U y^g(z)`: the leader plays `x`, a type-`g` follower responds to `z`.
fn round_payoff(game: &GameInstance, mode: ResponseMode, x: &SimplexPoint, z: &SimplexPoint, g: usize, buf: &mut [f64]) -> f64 {
    game.payoff_against(g, x, z, mode, buf)
}

/// Realized payoffs of a commitment sequence against a type sequence. With
/// memory the followers respond to the reputation; without it, to `x^t`
/// itself.
pub fn replay_payoffs(
    game: &GameInstance,
    mode: ResponseMode,
    memory: &MemoryModel,
    commitments: &[SimplexPoint],
    types: &[usize],
) -> Result<Vec<f64>> {
    if commitments.len() != types.len() {
        return Err(Error::Dimension {
            expected: commitments.len(),
            got: types.len(),
        });
    }
    let mut rep = (!memory.is_memoryless())
        .then(|| ReputationState::new(memory, game.n()))
        .transpose()?;
    let mut buf = vec![0.0; game.m()];
    commitments
        .iter()
        .zip(types)
        .map(|(x, &g)| {
            let z = match rep.as_mut() {
                Some(r) => r.update(x)?.clone(),
                None => x.clone(),
            };
            check_round(game, x, &z, g)?;
            Ok(round_payoff(game, mode, x, &z, g, &mut buf))
        })
        .collect()
}

/// Prefix benchmarks keyed by type counts, shared by the runs of one batch.
/// A cache must only ever see one game and one response mode.
#[derive(Debug, Default)]
pub struct BenchmarkCache {
    map: Mutex<HashMap<Vec<u32>, (SimplexPoint, f64)>>,
}

impl BenchmarkCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.lock().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get_or_compute(
        &self,
        game: &GameInstance,
        oracle: &Oracle,
        counts: &TypeWeights,
        mode: ResponseMode,
    ) -> Result<(SimplexPoint, f64)> {
        let key: Vec<u32> = counts.iter().map(|c| *c as u32).collect();
        if let Some(hit) = self.map.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        // Computed outside the lock; the oracle is deterministic, so racing
        // threads insert the same value.
        let fresh = best_in_hindsight(game, oracle, counts, mode)?;
        self.map.lock().expect("cache lock").insert(key, fresh.clone());
        Ok(fresh)
    }
}

/// Tolerance for benchmark oracle calls: `1e-4 * Ubar * H`, at least 1e-9.
pub fn benchmark_epsilon(game: &GameInstance, rounds: f64) -> f64 {
    (1e-4 * game.u_bar() * rounds).max(1e-9)
}

/// `max_x <Y(x)^T U^T x, G>` and a maximizer, through the matching oracle.
pub fn best_in_hindsight(
    game: &GameInstance,
    oracle: &Oracle,
    counts: &TypeWeights,
    mode: ResponseMode,
) -> Result<(SimplexPoint, f64)> {
    if counts.total() == 0.0 {
        return Ok((SimplexPoint::uniform(game.n()), 0.0));
    }
    let res = oracle.solve(&OracleRequest {
        game,
        weights: counts.clone(),
        linear_tilt: None,
        mode,
        epsilon: benchmark_epsilon(game, counts.total()),
    })?;
    Ok((res.x_star, res.value))
}

/// One episode of `spec.horizon` rounds.
pub fn run_episode(
    game: &GameInstance,
    oracle: &Oracle,
    spec: &EpisodeSpec,
    adversary: &AdversarySpec,
    learner_seed: u64,
) -> Result<RunLedger> {
    run_episode_cached(game, oracle, spec, adversary, learner_seed, &BenchmarkCache::new())
}

pub(crate) fn run_episode_cached(
    game: &GameInstance,
    oracle: &Oracle,
    spec: &EpisodeSpec,
    adversary: &AdversarySpec,
    learner_seed: u64,
    cache: &BenchmarkCache,
) -> Result<RunLedger> {
    spec.validate()?;
    let horizon = spec.horizon;
    let types = adversary.sequence(game.k(), horizon)?;
    let mut learner = Learner::new(game, &spec.learner_config(learner_seed))?;
    let mut rep = (!spec.memory.is_memoryless())
        .then(|| ReputationState::new(&spec.memory, game.n()))
        .transpose()?;
    let mut buf = vec![0.0; game.m()];
    let mut records = Vec::with_capacity(horizon);
    let mut benchmarks = Vec::with_capacity(horizon);
    let mut benchmark_point = SimplexPoint::uniform(game.n());
    let mut cumulative = 0.0;

    for (t, &g) in (1..=horizon).zip(&types) {
        let x = learner
            .next_commitment(game, oracle)
            .map_err(|e| Error::Round {
                round: t,
                source: Box::new(e),
            })?
            .x_star;
        let z = match rep.as_mut() {
            Some(r) => r.update(&x)?.clone(),
            None => x.clone(),
        };
        let payoff = round_payoff(game, spec.mode, &x, &z, g, &mut buf);
        cumulative += payoff;
        learner.observe(g)?;
        let (point, value) = cache
            .get_or_compute(game, oracle, learner.counts(), spec.mode)
            .map_err(|e| Error::Round {
                round: t,
                source: Box::new(e),
            })?;
        benchmarks.push(value);
        benchmark_point = point;
        records.push(RoundRecord { t, x, z, g, payoff });
    }

    let mut ledger = RunLedger {
        learner_seed,
        adversary_seed: adversary.seed,
        records,
        counts: learner.counts().clone(),
        cumulative_payoff: cumulative,
        benchmarks,
        benchmark_point,
        regret: Vec::new(),
        bound: spec.bound_trajectory(game),
    };
    ledger.regret = regret_curve(&ledger);
    Ok(ledger)
}
