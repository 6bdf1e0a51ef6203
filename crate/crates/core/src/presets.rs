//! The 3x3 security-style game used in the reference experiments and the
//! six named batch presets built on it.

use itertools::Itertools;

use crate::config::{GameSource, RunConfig};
use crate::error::{Error, Result};
use crate::game::{GameInstance, ResponseMode};
use crate::learner::Algorithm;
use crate::memory::MemoryModel;
use crate::sim::AdversaryKind;

pub const BENCH_PRESETS: [&str; 6] = ["stoc-nomem", "cyc-nomem", "stoc-fm", "cyc-fm", "stoc-dm", "cyc-dm"];

pub const PRESET_HORIZON: usize = 200;
pub const PRESET_CYCLE: usize = 5;
pub const PRESET_WINDOW: usize = 10;
pub const PRESET_DISCOUNT: f64 = 0.9;
/// Desk-scale default; the original experiments used 400.
pub const PRESET_ITERATIONS: usize = 50;

/// `U = [[3,2,1],[2,3,1],[1,2,3]]`, `eta = 2`, and one follower type per
/// column permutation of `-I_3`, in lexicographic permutation order.
/// Type `k` with permutation `p` has column `j` equal to `-e_{p(j)}`.
pub fn reference_game() -> GameInstance {
    let u = vec![vec![3.0, 2.0, 1.0], vec![2.0, 3.0, 1.0], vec![1.0, 2.0, 3.0]];
    let v: Vec<Vec<Vec<f64>>> = (0..3)
        .permutations(3)
        .map(|p| {
            (0..3)
                .map(|row| (0..3).map(|col| if p[col] == row { -1.0 } else { 0.0 }).collect())
                .collect()
        })
        .collect();
    GameInstance::from_rows(&u, &v, 2.0).expect("preset game is valid")
}

/// The named batch configuration. Runs without memory use best-responding
/// followers and the LP-enumeration oracle; runs with memory use quantal
/// followers, as the memory learner's guarantee requires.
pub fn bench_preset(name: &str) -> Result<RunConfig> {
    let (adv, mem) = name
        .split_once('-')
        .ok_or_else(|| Error::Config(format!("unknown preset `{name}`")))?;
    let adversary = match adv {
        "stoc" => AdversaryKind::Stoc,
        "cyc" => AdversaryKind::Cyc(PRESET_CYCLE),
        _ => return Err(Error::Config(format!("unknown preset `{name}`"))),
    };
    let (algorithm, response, memory) = match mem {
        "nomem" => (Algorithm::FtplMemoryless, ResponseMode::Br, MemoryModel::Memoryless),
        "fm" => (
            Algorithm::FtplMemory,
            ResponseMode::Qr,
            MemoryModel::FiniteMemory(PRESET_WINDOW),
        ),
        "dm" => (
            Algorithm::FtplMemory,
            ResponseMode::Qr,
            MemoryModel::Discounted(PRESET_DISCOUNT),
        ),
        _ => return Err(Error::Config(format!("unknown preset `{name}`"))),
    };
    Ok(RunConfig {
        name: name.to_string(),
        game: GameSource::Reference,
        algorithm,
        response,
        adversary,
        memory,
        horizon: PRESET_HORIZON,
        iterations: PRESET_ITERATIONS,
        epsilon: None,
        nu: None,
        seed: 0,
        output: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_matrices() {
        let g = reference_game();
        assert_eq!((g.n(), g.m(), g.k()), (3, 3, 6));
        assert_eq!(g.eta(), 2.0);
        assert_eq!(g.leader_matrix().get(0, 0), 3.0);
        assert_eq!(g.u_bar(), 3.0);
        assert_eq!(g.v_norm1_max(), 1.0);
        // Identity permutation first, reversal last.
        assert_eq!(g.follower_matrix(0).to_rows(), vec![vec![-1.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![0.0, 0.0, -1.0]]);
        assert_eq!(g.follower_matrix(5).to_rows(), vec![vec![0.0, 0.0, -1.0], vec![0.0, -1.0, 0.0], vec![-1.0, 0.0, 0.0]]);
        let mut seen: Vec<Vec<Vec<f64>>> = (0..6).map(|k| g.follower_matrix(k).to_rows()).collect();
        seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        seen.dedup();
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn preset_fields() {
        let p = bench_preset("stoc-nomem").unwrap();
        assert_eq!(p.horizon, 200);
        assert_eq!(p.algorithm, Algorithm::FtplMemoryless);
        let game = reference_game();
        let spec = p.episode_spec(&game).unwrap();
        assert_relative_eq!(spec.nu, (6.0f64 / 200.0).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(spec.epsilon, 1.0 / 200f64.sqrt(), max_relative = 1e-15);

        assert_eq!(bench_preset("cyc-fm").unwrap().adversary, AdversaryKind::Cyc(5));
        assert_eq!(bench_preset("stoc-dm").unwrap().memory, MemoryModel::Discounted(0.9));
        assert_eq!(bench_preset("cyc-fm").unwrap().memory, MemoryModel::FiniteMemory(10));
        for name in BENCH_PRESETS {
            let p = bench_preset(name).unwrap();
            assert_eq!(p.iterations, 50);
            p.episode_spec(&game).unwrap();
        }
        assert!(bench_preset("stoc").is_err());
        assert!(bench_preset("foo-nomem").is_err());
    }
}
