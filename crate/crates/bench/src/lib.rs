//! Fixtures shared by the benchmarks.

use rsg_core::oracle::{Oracle, OracleConfig, OracleRequest};
use rsg_core::presets::reference_game;
use rsg_core::sim::{AdversaryKind, AdversarySpec, EpisodeSpec};
use rsg_core::{Algorithm, GameInstance, MemoryModel, ResponseMode, TypeWeights};

pub struct Fixture {
    pub game: GameInstance,
    pub oracle: Oracle,
    pub mode: ResponseMode,
}

impl Fixture {
    pub fn reference(mode: ResponseMode) -> Self {
        let game = reference_game();
        let oracle = Oracle::new(&game, mode, &OracleConfig::default()).expect("oracle");
        Fixture { game, oracle, mode }
    }

    /// A mid-episode request: counts of a few dozen rounds and a small tilt.
    pub fn request(&self, tilt: bool) -> OracleRequest<'_> {
        OracleRequest {
            game: &self.game,
            weights: TypeWeights::new(vec![7.3, 4.1, 9.8, 2.2, 6.5, 5.0]).expect("weights"),
            linear_tilt: tilt.then(|| vec![0.4, 1.1, 0.2]),
            mode: self.mode,
            epsilon: 1.0 / 200f64.sqrt(),
        }
    }
}

/// Memoryless or finite-memory episode spec on the reference game.
pub fn episode(mode: ResponseMode, memory: MemoryModel, horizon: usize) -> EpisodeSpec {
    let algorithm = if memory.is_memoryless() && mode == ResponseMode::Br {
        Algorithm::FtplMemoryless
    } else {
        Algorithm::FtplMemory
    };
    EpisodeSpec {
        algorithm,
        mode,
        epsilon: 1.0 / (horizon as f64).sqrt(),
        nu: 0.2,
        memory,
        horizon,
    }
}

pub fn stochastic(seed: u64) -> AdversarySpec {
    AdversarySpec::new(AdversaryKind::Stoc, seed)
}
