//! Experiment harness: adversaries, the round loop, regret against the
//! best commitment in hindsight, and batch aggregation.

mod adversary;
mod batch;
mod episode;
pub mod output;

pub use adversary::{AdversaryKind, AdversarySpec};
pub use batch::{aggregate, run_batch, run_batch_with, BatchResult, BatchSpec};
pub use episode::{
    benchmark_epsilon, best_in_hindsight, memory_regret_bound, memoryless_regret_bound, recompute_regret,
    regret_curve, replay_payoffs, run_episode, BenchmarkCache, EpisodeSpec, RoundRecord, RunLedger,
};
