use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::GameInstance;
use crate::oracle::Oracle;
use crate::simplex::dist1;

use super::adversary::{AdversaryKind, AdversarySpec};
use super::episode::{run_episode_cached, BenchmarkCache, EpisodeSpec, RunLedger};

#[derive(Debug, Clone, PartialEq)]
pub struct BatchSpec {
    pub episode: EpisodeSpec,
    pub adversary: AdversaryKind,
    pub iterations: usize,
    /// Run `r` uses seed `base_seed + r` for both the learner and the
    /// adversary (on separate RNG streams).
    pub base_seed: u64,
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub episode: EpisodeSpec,
    pub seeds: Vec<u64>,
    pub runs: Vec<RunLedger>,
    pub mean_regret: Vec<f64>,
    /// Per-round sample standard deviation (zero for a single run).
    pub std_regret: Vec<f64>,
    pub bound: Vec<f64>,
}

impl BatchResult {
    pub fn final_mean_regret(&self) -> f64 {
        self.mean_regret.last().copied().unwrap_or(0.0)
    }

    pub fn final_bound(&self) -> f64 {
        self.bound.last().copied().unwrap_or(0.0)
    }

    /// Mean over runs and rounds of `||x^{t+h} - x^t||_1`, a stability
    /// diagnostic. `None` if no run is longer than `h`.
    pub fn mean_drift(&self, h: usize) -> Option<f64> {
        let mut total = 0.0;
        let mut count = 0usize;
        for run in &self.runs {
            for pair in run.records.windows(h + 1) {
                total += dist1(&pair[0].x, &pair[h].x);
                count += 1;
            }
        }
        (h > 0 && count > 0).then(|| total / count as f64)
    }
}

/// `S` independent episodes in parallel. The output does not depend on the
/// thread count or completion order.
pub fn run_batch(game: &GameInstance, oracle: &Oracle, spec: &BatchSpec) -> Result<BatchResult> {
    if spec.iterations == 0 {
        return Err(Error::Config("iterations must be at least 1".into()));
    }
    let seeds: Vec<u64> = (0..spec.iterations as u64).map(|r| spec.base_seed.wrapping_add(r)).collect();
    let adversaries: Vec<AdversarySpec> = seeds
        .iter()
        .map(|&s| AdversarySpec::new(spec.adversary.clone(), s))
        .collect();
    run_batch_with(game, oracle, &spec.episode, &adversaries, &seeds)
}

/// Batch with explicit per-run adversaries and learner seeds.
pub fn run_batch_with(
    game: &GameInstance,
    oracle: &Oracle,
    episode: &EpisodeSpec,
    adversaries: &[AdversarySpec],
    learner_seeds: &[u64],
) -> Result<BatchResult> {
    if adversaries.is_empty() || adversaries.len() != learner_seeds.len() {
        return Err(Error::Config(format!(
            "need one learner seed per adversary and at least one run, got {} and {}",
            adversaries.len(),
            learner_seeds.len()
        )));
    }
    episode.validate()?;
    let cache = BenchmarkCache::new();
    let runs = adversaries
        .par_iter()
        .zip(learner_seeds.par_iter())
        .map(|(adv, &seed)| run_episode_cached(game, oracle, episode, adv, seed, &cache))
        .collect::<Result<Vec<_>>>()?;
    log::debug!("batch done; {} distinct benchmark problems", cache.len());
    let (mean_regret, std_regret) = aggregate(&runs);
    Ok(BatchResult {
        episode: episode.clone(),
        seeds: learner_seeds.to_vec(),
        bound: episode.bound_trajectory(game),
        runs,
        mean_regret,
        std_regret,
    })
}

/// Per-round mean and sample standard deviation of the regret curves.
pub fn aggregate(runs: &[RunLedger]) -> (Vec<f64>, Vec<f64>) {
    let Some(first) = runs.first() else {
        return (Vec::new(), Vec::new());
    };
    let s = runs.len() as f64;
    let horizon = first.regret.len();
    let mut mean = vec![0.0; horizon];
    let mut std = vec![0.0; horizon];
    for t in 0..horizon {
        let m = runs.iter().map(|r| r.regret[t]).sum::<f64>() / s;
        mean[t] = m;
        if runs.len() > 1 {
            let ss: f64 = runs.iter().map(|r| (r.regret[t] - m).powi(2)).sum();
            std[t] = (ss / (s - 1.0)).sqrt();
        }
    }
    (mean, std)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::ResponseMode;
    use crate::learner::Algorithm;
    use crate::memory::MemoryModel;
    use crate::oracle::OracleConfig;
    use crate::presets::reference_game;

    fn nomem(horizon: usize) -> EpisodeSpec {
        EpisodeSpec {
            algorithm: Algorithm::FtplMemoryless,
            mode: ResponseMode::Br,
            epsilon: 0.1,
            nu: 0.2,
            memory: MemoryModel::Memoryless,
            horizon,
        }
    }

    #[test]
    fn single_run_batch_is_the_run() {
        let game = reference_game();
        let oracle = Oracle::new(&game, ResponseMode::Br, &OracleConfig::default()).unwrap();
        let spec = BatchSpec {
            episode: nomem(15),
            adversary: AdversaryKind::Stoc,
            iterations: 1,
            base_seed: 11,
        };
        let b = run_batch(&game, &oracle, &spec).unwrap();
        assert_eq!(b.mean_regret, b.runs[0].regret);
        assert!(b.std_regret.iter().all(|s| *s == 0.0));
        assert_eq!(b.seeds, vec![11]);
    }

    #[test]
    fn identical_runs_have_zero_spread() {
        let game = reference_game();
        let oracle = Oracle::new(&game, ResponseMode::Br, &OracleConfig::default()).unwrap();
        let adv = AdversarySpec::new(AdversaryKind::Fixed((0..15).map(|t| t % 6).collect()), 0);
        let b = run_batch_with(&game, &oracle, &nomem(15), &[adv.clone(), adv], &[5, 5]).unwrap();
        assert!(b.std_regret.iter().all(|s| *s == 0.0));
        assert_eq!(b.runs[0], b.runs[1]);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let game = reference_game();
        let oracle = Oracle::new(&game, ResponseMode::Br, &OracleConfig::default()).unwrap();
        let spec = BatchSpec {
            episode: nomem(20),
            adversary: AdversaryKind::Stoc,
            iterations: 6,
            base_seed: 0,
        };
        let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let wide = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = serial.install(|| run_batch(&game, &oracle, &spec).unwrap());
        let b = wide.install(|| run_batch(&game, &oracle, &spec).unwrap());
        assert_eq!(a.runs, b.runs);
        assert_eq!(a.mean_regret, b.mean_regret);
        assert_eq!(a.std_regret, b.std_regret);
        assert!(a.mean_drift(1).unwrap() >= 0.0);
        assert!(a.mean_drift(0).is_none());
    }

    #[test]
    fn aggregate_matches_hand_computation() {
        let game = reference_game();
        let oracle = Oracle::new(&game, ResponseMode::Br, &OracleConfig::default()).unwrap();
        let spec = BatchSpec {
            episode: nomem(5),
            adversary: AdversaryKind::Stoc,
            iterations: 3,
            base_seed: 2,
        };
        let b = run_batch(&game, &oracle, &spec).unwrap();
        for t in 0..5 {
            let v: Vec<f64> = b.runs.iter().map(|r| r.regret[t]).collect();
            let m = (v[0] + v[1] + v[2]) / 3.0;
            let sd = (((v[0] - m).powi(2) + (v[1] - m).powi(2) + (v[2] - m).powi(2)) / 2.0).sqrt();
            assert!((b.mean_regret[t] - m).abs() < 1e-12);
            assert!((b.std_regret[t] - sd).abs() < 1e-12);
        }
    }
}
