//! Worked examples checked against brute-force references.

mod common;

use common::{dirichlet, grid3, rng, RefGame};
use rsg_core::memory::MemoryModel;
use rsg_core::oracle::{Oracle, OracleConfig, OracleRequest};
use rsg_core::presets::reference_game;
use rsg_core::sim::{best_in_hindsight, run_episode, AdversaryKind, AdversarySpec, EpisodeSpec};
use rsg_core::{Algorithm, GameInstance, ResponseMode, SimplexPoint, TypeWeights};

fn solve(game: &GameInstance, mode: ResponseMode, w: Vec<f64>, eps: f64) -> (SimplexPoint, f64) {
    let oracle = Oracle::new(game, mode, &OracleConfig::default()).unwrap();
    let res = oracle
        .solve(&OracleRequest {
            game,
            weights: TypeWeights::new(w).unwrap(),
            linear_tilt: None,
            mode,
            epsilon: eps,
        })
        .unwrap();
    (res.x_star, res.value)
}

/// Points with pairwise distinct coordinates: no follower of the reference
/// game is indifferent there.
fn tie_free(grid: &[[f64; 3]]) -> Vec<[f64; 3]> {
    grid.iter()
        .copied()
        .filter(|p| (p[0] - p[1]).abs() > 1e-12 && (p[1] - p[2]).abs() > 1e-12 && (p[0] - p[2]).abs() > 1e-12)
        .collect()
}

#[test]
fn br_oracle_single_type_vs_fine_grid() {
    let eye = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let rg = RefGame {
        u: eye.clone(),
        v: vec![eye],
        eta: 1.0,
    };
    let eps = 1e-3;
    let (x, v) = solve(&rg.to_game(), ResponseMode::Br, vec![1.0], eps);
    let grid_best = (0..=1000)
        .map(|i| {
            let p = i as f64 / 1000.0;
            rg.objective(&[p, 1.0 - p], &[1.0], None, false)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(v >= grid_best - eps, "{v} vs {grid_best}");
    assert!((rg.objective(&x, &[1.0], None, false) - v).abs() < 1e-12);
}

#[test]
fn br_oracle_reference_game_all_ones() {
    let game = reference_game();
    let rg = RefGame::from_game(&game);
    let w = vec![1.0; 6];
    let eps = 1e-3;
    let (_, v) = solve(&game, ResponseMode::Br, w.clone(), eps);
    let grid = tie_free(&grid3(50));
    let grid_best = grid.iter().map(|x| rg.objective(x, &w, None, false)).fold(f64::NEG_INFINITY, f64::max);
    assert!(v >= grid_best - eps, "{v} vs {grid_best}");
    // Index tie-breaking at a vertex scores above every strict region.
    assert_eq!(rg.objective(&[0.0, 1.0, 0.0], &w, None, false), 14.0);
    assert!((v - 12.0).abs() <= eps, "{v}");
}

#[test]
fn qr_oracle_reference_game_first_type() {
    let game = reference_game();
    let rg = RefGame::from_game(&game);
    let w: Vec<f64> = (0..6).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect();
    let (x, v) = solve(&game, ResponseMode::Qr, w.clone(), 1e-4);
    let grid_best = grid3(200).iter().map(|x| rg.objective(x, &w, None, true)).fold(f64::NEG_INFINITY, f64::max);
    assert!((v - grid_best).abs() <= 1e-3, "{v} vs {grid_best}");
    assert!((rg.objective(&x, &w, None, true) - v).abs() < 1e-12);
}

#[test]
fn response_matrix_matches_column_scan() {
    let game = reference_game();
    let rg = RefGame::from_game(&game);
    let mut r = rng(5);
    for _ in 0..200 {
        let x = dirichlet(&mut r, 3);
        let cols = game.response_matrix(&SimplexPoint::new(x.clone()).unwrap(), ResponseMode::Br).unwrap();
        assert_eq!(cols.len(), 6);
        for (k, y) in cols.iter().enumerate() {
            let a = rg.best_action(k, &x);
            let expect: Vec<f64> = (0..3).map(|i| if i == a { 1.0 } else { 0.0 }).collect();
            assert_eq!(y.as_slice(), expect.as_slice());
        }
        // Every pure response occurs, each for two of the six types.
        let mut seen = [0; 3];
        for y in &cols {
            seen[y.iter().position(|v| *v == 1.0).unwrap()] += 1;
        }
        assert_eq!(seen, [2, 2, 2]);
    }
}

#[test]
fn weighted_objective_term_by_term() {
    let mut r = rng(6);
    for _ in 0..100 {
        let rg = RefGame::random(&mut r, 3, 4, 3, 1.5);
        let game = rg.to_game();
        let x = dirichlet(&mut r, 3);
        let w = dirichlet(&mut r, 3).iter().map(|v| 4.0 * v).collect::<Vec<_>>();
        for (mode, quantal) in [(ResponseMode::Br, false), (ResponseMode::Qr, true)] {
            let got = game
                .weighted_objective(&SimplexPoint::new(x.clone()).unwrap(), &TypeWeights::new(w.clone()).unwrap(), mode)
                .unwrap();
            assert!((got - rg.objective(&x, &w, None, quantal)).abs() < 1e-12);
        }
    }
}

#[test]
fn hindsight_with_uniform_counts_vs_grid() {
    let game = reference_game();
    let rg = RefGame::from_game(&game);
    let oracle = Oracle::new(&game, ResponseMode::Br, &OracleConfig::default()).unwrap();
    let counts = TypeWeights::new(vec![10.0; 6]).unwrap();
    let (x, v) = best_in_hindsight(&game, &oracle, &counts, ResponseMode::Br).unwrap();
    let grid_best = tie_free(&grid3(100))
        .iter()
        .map(|p| rg.objective(p, counts.as_slice(), None, false))
        .fold(f64::NEG_INFINITY, f64::max);
    let eps_bench = 1e-4 * 3.0 * 60.0;
    assert!(v >= grid_best - eps_bench, "{v} vs {grid_best}");
    assert!((rg.objective(&x, counts.as_slice(), None, false) - v).abs() < 1e-9);
}

#[test]
fn hindsight_single_type_scales_with_count() {
    let mut r = rng(8);
    for _ in 0..10 {
        let rg = RefGame::random(&mut r, 3, 3, 2, 1.0);
        let game = rg.to_game();
        let h = 40.0;
        for mode in [ResponseMode::Br, ResponseMode::Qr] {
            let oracle = Oracle::new(&game, mode, &OracleConfig::default()).unwrap();
            let (_, v) = best_in_hindsight(&game, &oracle, &TypeWeights::new(vec![0.0, h]).unwrap(), mode).unwrap();
            let quantal = mode == ResponseMode::Qr;
            let single = grid3(100)
                .iter()
                .map(|p| rg.type_payoff(1, p, quantal))
                .fold(f64::NEG_INFINITY, f64::max);
            let eps_bench = 1e-4 * rg.u_bar() * h;
            // Grid points bound the value from below and, with the Lipschitz
            // slack, from above.
            let l = 2.0 * rg.eta * RefGame::norm1(&rg.v[1]);
            let slack = h * (1.0 + l) * RefGame::norm1(&rg.u) * 0.01;
            assert!(v >= h * single - eps_bench - 1e-9, "{v} vs {}", h * single);
            assert!(v <= h * single + slack, "{v} vs {}", h * single);
        }
    }
}

#[test]
fn single_type_adversary_earns_stackelberg_value() {
    let mut r = rng(9);
    let rg = RefGame::random(&mut r, 3, 3, 1, 1.0);
    let game = rg.to_game();
    let oracle = Oracle::new(&game, ResponseMode::Br, &OracleConfig::default()).unwrap();
    let eps = 0.01;
    let spec = EpisodeSpec {
        algorithm: Algorithm::FtplMemoryless,
        mode: ResponseMode::Br,
        epsilon: eps,
        nu: 1.0,
        memory: MemoryModel::Memoryless,
        horizon: 30,
    };
    let ledger = run_episode(&game, &oracle, &spec, &AdversarySpec::new(AdversaryKind::Stoc, 1), 1).unwrap();
    let probes: Vec<Vec<f64>> = (0..20_000).map(|_| dirichlet(&mut r, 3)).collect();
    let value = probes.iter().map(|p| rg.type_payoff(0, p, false)).fold(f64::NEG_INFINITY, f64::max);
    // From round 2 on the scalar weight is at least 1, so an eps-optimal
    // commitment is within eps of the single-type value.
    for rec in &ledger.records[1..] {
        assert!(rec.payoff >= value - eps - 1e-9, "round {}: {} vs {value}", rec.t, rec.payoff);
    }
}
