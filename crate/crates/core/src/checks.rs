//! Randomized property suites behind `rsg check`. Each suite draws its own
//! instances from a fixed seed and reports pass/fail with a short detail.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::Result;
use crate::game::{GameInstance, ResponseMode, TypeWeights};
use crate::learner::Algorithm;
use crate::memory::{finite_memory_theta_closed_form, MemoryModel, ReputationState};
use crate::oracle::{Oracle, OracleConfig, OracleRequest};
use crate::presets::reference_game;
use crate::sim::{
    recompute_regret, replay_payoffs, run_batch, AdversaryKind, BatchSpec, EpisodeSpec,
};
use crate::simplex::{dist1, dist_inf, norm1, simplex_grid, SimplexPoint};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Suite = fn() -> Result<(bool, String)>;

const SUITES: &[(&str, Suite)] = &[
    ("qr-lipschitz", qr_lipschitz),
    ("utility-lipschitz", utility_lipschitz),
    ("qr-gradient", qr_gradient),
    ("qr-normalization", qr_normalization),
    ("qr-to-br", qr_to_br),
    ("reputation-incremental", reputation_incremental),
    ("theta-closed-form", theta_closed_form),
    ("theta-monotone", theta_monotone),
    ("oracle-vs-grid", oracle_vs_grid),
    ("br-scaling", br_scaling),
    ("br-unique-response", br_unique_response),
    ("qr-determinism", qr_determinism),
    ("memoryless-degeneracy", memoryless_degeneracy),
    ("ledger-consistency", ledger_consistency),
    ("bound-monotone", bound_monotone),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|(n, _)| *n).collect()
}

/// Runs every suite whose name contains `filter` (all if `None`). Errors
/// inside a suite count as failures.
pub fn run_checks(filter: Option<&str>) -> Vec<CheckOutcome> {
    SUITES
        .iter()
        .filter(|(name, _)| filter.is_none_or(|f| name.contains(f)))
        .map(|(name, suite)| {
            log::info!("check {name}");
            match suite() {
                Ok((passed, detail)) => CheckOutcome { name, passed, detail },
                Err(e) => CheckOutcome {
                    name,
                    passed: false,
                    detail: format!("error: {e}"),
                },
            }
        })
        .collect()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point of the simplex (flat Dirichlet).
fn random_point(rng: &mut ChaCha8Rng, n: usize) -> SimplexPoint {
    let e: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = e.iter().sum();
    SimplexPoint::new(e.into_iter().map(|v| v / s).collect()).expect("normalized")
}

fn random_game(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize, k: usize) -> Result<GameInstance> {
    let n = rng.random_range(2..=max_n);
    let m = rng.random_range(2..=max_m);
    let eta = rng.random_range(0.1..10.0);
    GameInstance::random(n, m, k, eta, rng.random())
}

fn qr_lipschitz() -> Result<(bool, String)> {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let g = random_game(&mut r, 5, 5, 1)?;
        let (x, z) = (random_point(&mut r, g.n()), random_point(&mut r, g.n()));
        let lhs = dist1(&g.quantal_response(0, &x)?, &g.quantal_response(0, &z)?);
        let rhs = 2.0 * g.eta() * g.follower_matrix(0).norm1() * dist_inf(&x, &z);
        worst = worst.max(lhs / rhs);
    }
    Ok((worst <= 1.0 + 1e-12, format!("max ratio {worst:.4}")))
}

fn utility_lipschitz() -> Result<(bool, String)> {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let k = r.random_range(1..=3);
        let g = random_game(&mut r, 4, 4, k)?;
        let w: Vec<f64> = (0..k).map(|_| r.random_range(0.0..3.0)).collect();
        let tw = TypeWeights::new(w.clone())?;
        let (x, z) = (random_point(&mut r, g.n()), random_point(&mut r, g.n()));
        let d = dist_inf(&x, &z);
        let lhs = (g.weighted_objective(&x, &tw, ResponseMode::Qr)? - g.weighted_objective(&z, &tw, ResponseMode::Qr)?).abs();
        worst = worst.max(lhs / (g.utility_lipschitz(&w) * d));
        // Only the response moves: x^T U (Y(x) - Y(z)) g.
        let mut shift = 0.0;
        for (kk, wk) in w.iter().enumerate() {
            shift += wk * (g.leader_payoff(&x, &g.quantal_response(kk, &x)?)? - g.leader_payoff(&x, &g.quantal_response(kk, &z)?)?);
        }
        worst = worst.max(shift.abs() / (g.response_shift_lipschitz(&w) * d));
    }
    Ok((worst <= 1.0 + 1e-12, format!("max ratio {worst:.4}")))
}

fn qr_gradient() -> Result<(bool, String)> {
    let mut r = rng(3);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let g = random_game(&mut r, 5, 5, 1)?;
        let x = random_point(&mut r, g.n());
        let jac = g.quantal_response_gradient(0, &x)?;
        let scale = jac.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-12);
        let mut y = vec![0.0; g.m()];
        let mut y2 = vec![0.0; g.m()];
        for j in 0..g.n() {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            g.qr_into(0, &xp, &mut y);
            g.qr_into(0, &xm, &mut y2);
            for i in 0..g.m() {
                let fd = (y[i] - y2[i]) / (2.0 * h);
                worst = worst.max((fd - jac[i][j]).abs() / scale);
            }
        }
    }
    Ok((worst <= 1e-5, format!("max relative error {worst:.2e}")))
}

fn qr_normalization() -> Result<(bool, String)> {
    let mut r = rng(4);
    let mut ok = true;
    for _ in 0..2000 {
        let g = random_game(&mut r, 6, 6, 1)?.with_eta(r.random_range(1e-3..200.0))?;
        let y = g.quantal_response(0, &random_point(&mut r, g.n()))?;
        ok &= (y.iter().sum::<f64>() - 1.0).abs() <= 1e-9 && y.iter().all(|v| *v > 0.0);
    }
    Ok((ok, "2000 responses".into()))
}

fn qr_to_br() -> Result<(bool, String)> {
    let mut r = rng(5);
    let mut tested = 0;
    let mut worst: f64 = 1.0;
    while tested < 200 {
        let g = random_game(&mut r, 4, 4, 1)?.with_eta(1e4)?;
        let x = random_point(&mut r, g.n());
        let mut vals: Vec<f64> = (0..g.m()).map(|i| crate::simplex::dot(g.follower_matrix(0).col(i), &x)).collect();
        let (best, _) = g.best_response(0, &x)?;
        let top = vals[best];
        vals.remove(best);
        if vals.iter().any(|v| top - v < 0.1) {
            continue;
        }
        tested += 1;
        worst = worst.min(g.quantal_response(0, &x)?[best]);
    }
    Ok((worst >= 1.0 - 1e-3, format!("min best-response mass {worst:.6}")))
}

/// Definitional weighted average over the whole history.
fn batch_reputation(model: &MemoryModel, history: &[SimplexPoint]) -> Vec<f64> {
    let t = history.len();
    let n = history[0].dim();
    let mut z = vec![0.0; n];
    let mut b = 0.0;
    for (tau, x) in history.iter().enumerate() {
        let a = model.weight(t - 1 - tau);
        b += a;
        for (zi, xi) in z.iter_mut().zip(x.iter()) {
            *zi += a * xi;
        }
    }
    z.iter().map(|v| v / b).collect()
}

fn reputation_incremental() -> Result<(bool, String)> {
    let mut r = rng(6);
    let models = [
        MemoryModel::Memoryless,
        MemoryModel::FiniteMemory(4),
        MemoryModel::Discounted(0.7),
        MemoryModel::custom(vec![1.0, 0.5, 0.25, 2.0])?,
    ];
    let mut worst: f64 = 0.0;
    for model in &models {
        for _ in 0..20 {
            let mut state = ReputationState::new(model, 3)?;
            let mut hist = Vec::new();
            for _ in 0..60 {
                let x = random_point(&mut r, 3);
                hist.push(x.clone());
                let z = state.update(&x)?.clone();
                worst = worst.max(dist_inf(&z, &batch_reputation(model, &hist)));
            }
        }
    }
    Ok((worst <= 1e-10, format!("max deviation {worst:.2e}")))
}

fn theta_closed_form() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for h in 1..=120 {
        for b in 1..=h {
            let got = MemoryModel::FiniteMemory(b).theta_h(h);
            worst = worst.max((got - finite_memory_theta_closed_form(b, h)).abs());
        }
    }
    Ok((worst == 0.0, format!("max deviation {worst:e}")))
}

fn theta_monotone() -> Result<(bool, String)> {
    let models = [
        MemoryModel::FiniteMemory(10),
        MemoryModel::Discounted(0.9),
        MemoryModel::Discounted(0.99),
        MemoryModel::custom(vec![1.0, 3.0, 0.5, 2.0])?,
    ];
    let ok = models
        .iter()
        .all(|m| m.theta_prefix(2000).windows(2).all(|w| w[0] <= w[1]));
    Ok((ok, "horizons up to 2000".into()))
}

fn oracle_vs_grid() -> Result<(bool, String)> {
    let mut r = rng(7);
    let grid = simplex_grid(3, 50);
    let diameter = 1.0 / 50.0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..6 {
        let k = r.random_range(1..=2);
        let game = GameInstance::random(3, 3, k, r.random_range(0.5..4.0), r.random())?;
        let w: Vec<f64> = (0..k).map(|_| r.random_range(0.0..5.0)).collect();
        for mode in [ResponseMode::Br, ResponseMode::Qr] {
            let oracle = Oracle::new(&game, mode, &OracleConfig::default())?;
            let eps = 0.01;
            let res = oracle.solve(&OracleRequest {
                game: &game,
                weights: TypeWeights::new(w.clone())?,
                linear_tilt: None,
                mode,
                epsilon: eps,
            })?;
            let grid_best = grid
                .iter()
                .map(|x| game.objective_raw(x, &w, mode))
                .fold(f64::NEG_INFINITY, f64::max);
            let slack = eps + game.utility_lipschitz(&w) * diameter;
            worst = worst.max(grid_best - res.value - slack);
        }
    }
    Ok((worst <= 0.0, format!("max shortfall beyond slack {worst:.3e}")))
}

fn br_scaling() -> Result<(bool, String)> {
    let mut r = rng(8);
    let mut ok = true;
    for _ in 0..10 {
        let game = GameInstance::random(3, 3, 2, 1.0, r.random())?;
        let oracle = Oracle::new(&game, ResponseMode::Br, &OracleConfig::default())?;
        let w: Vec<f64> = (0..2).map(|_| r.random_range(0.1..3.0)).collect();
        let tilt: Vec<f64> = (0..3).map(|_| r.random_range(0.0..1.0)).collect();
        let c = r.random_range(0.5..4.0);
        let solve = |scale: f64| {
            oracle.solve(&OracleRequest {
                game: &game,
                weights: TypeWeights::new(w.iter().map(|v| v * scale).collect())?,
                linear_tilt: Some(tilt.iter().map(|v| v * scale).collect()),
                mode: ResponseMode::Br,
                epsilon: 1e-3 * scale,
            })
        };
        let (a, b) = (solve(1.0)?, solve(c)?);
        ok &= a.profile == b.profile && (b.value - c * a.value).abs() <= 1e-9 * (1.0 + b.value.abs());
    }
    Ok((ok, "10 instances".into()))
}

fn br_unique_response() -> Result<(bool, String)> {
    let mut r = rng(9);
    let mut ok = true;
    for _ in 0..20 {
        let game = GameInstance::random(3, 3, 3, 1.0, r.random())?;
        let oracle = Oracle::new(&game, ResponseMode::Br, &OracleConfig::default())?;
        let w: Vec<f64> = (0..3).map(|_| r.random_range(0.0..2.0)).collect();
        let res = oracle.solve(&OracleRequest {
            game: &game,
            weights: TypeWeights::new(w)?,
            linear_tilt: None,
            mode: ResponseMode::Br,
            epsilon: 0.01,
        })?;
        let profile = res.profile.clone().unwrap_or_default();
        for (k, &i) in profile.iter().enumerate() {
            let vals: Vec<f64> = (0..3).map(|j| crate::simplex::dot(game.follower_matrix(k).col(j), &res.x_star)).collect();
            ok &= (0..3).all(|j| j == i || vals[i] > vals[j]);
        }
    }
    Ok((ok, "20 instances".into()))
}

fn qr_determinism() -> Result<(bool, String)> {
    let game = reference_game();
    let oracle = Oracle::new(&game, ResponseMode::Qr, &OracleConfig::default())?;
    let req = OracleRequest {
        game: &game,
        weights: TypeWeights::new(vec![1.0, 2.0, 0.0, 3.0, 1.0, 0.5])?,
        linear_tilt: Some(vec![0.2, 0.0, 0.1]),
        mode: ResponseMode::Qr,
        epsilon: 1e-3,
    };
    let (a, b) = (oracle.solve(&req)?, oracle.solve(&req)?);
    let same = a.x_star.iter().zip(b.x_star.iter()).all(|(p, q)| p.to_bits() == q.to_bits())
        && a.value.to_bits() == b.value.to_bits();
    Ok((same, "bitwise comparison".into()))
}

fn memoryless_degeneracy() -> Result<(bool, String)> {
    let game = reference_game();
    let mut r = rng(10);
    let xs: Vec<SimplexPoint> = (0..200).map(|_| random_point(&mut r, 3)).collect();
    let gs: Vec<usize> = (0..200).map(|_| r.random_range(0..6)).collect();
    let plain = replay_payoffs(&game, ResponseMode::Qr, &MemoryModel::Memoryless, &xs, &gs)?;
    let window = replay_payoffs(&game, ResponseMode::Qr, &MemoryModel::FiniteMemory(1), &xs, &gs)?;
    let same = plain.iter().zip(&window).all(|(a, b)| a.to_bits() == b.to_bits());
    Ok((same, "200 rounds, bitwise".into()))
}

fn ledger_consistency() -> Result<(bool, String)> {
    let game = reference_game();
    let oracle = Oracle::new(&game, ResponseMode::Br, &OracleConfig::default())?;
    let spec = BatchSpec {
        episode: EpisodeSpec {
            algorithm: Algorithm::FtplMemoryless,
            mode: ResponseMode::Br,
            epsilon: 0.1,
            nu: 0.3,
            memory: MemoryModel::Memoryless,
            horizon: 40,
        },
        adversary: AdversaryKind::Stoc,
        iterations: 4,
        base_seed: 17,
    };
    let batch = run_batch(&game, &oracle, &spec)?;
    let mut ok = true;
    for run in &batch.runs {
        ok &= recompute_regret(&game, ResponseMode::Br, run)? == run.regret;
        let eps_bench = crate::sim::benchmark_epsilon(&game, 40.0);
        ok &= run.final_regret() >= -(spec.episode.epsilon + eps_bench);
        ok &= norm1(run.counts.as_slice()) == 40.0;
    }
    Ok((ok, "4 runs of 40 rounds".into()))
}

fn bound_monotone() -> Result<(bool, String)> {
    let game = reference_game();
    let mut ok = true;
    for (algorithm, mode, memory) in [
        (Algorithm::FtplMemoryless, ResponseMode::Br, MemoryModel::Memoryless),
        (Algorithm::FtplMemory, ResponseMode::Qr, MemoryModel::FiniteMemory(10)),
        (Algorithm::FtplMemory, ResponseMode::Qr, MemoryModel::Discounted(0.9)),
    ] {
        let spec = EpisodeSpec {
            algorithm,
            mode,
            epsilon: 0.07,
            nu: 0.1,
            memory,
            horizon: 1000,
        };
        ok &= spec.bound_trajectory(&game).windows(2).all(|w| w[0] <= w[1]);
    }
    Ok((ok, "horizons up to 1000".into()))
}
