//! Reference computations written straight from the definitions, with no
//! reuse of library internals. Shared by the integration tests.

#![allow(dead_code)]

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rsg_core::GameInstance;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Plain row-major game data.
#[derive(Clone, Debug)]
pub struct RefGame {
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<Vec<f64>>>,
    pub eta: f64,
}

impl RefGame {
    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn m(&self) -> usize {
        self.u[0].len()
    }

    pub fn k(&self) -> usize {
        self.v.len()
    }

    pub fn random(r: &mut ChaCha8Rng, n: usize, m: usize, k: usize, eta: f64) -> Self {
        let u = (0..n).map(|_| (0..m).map(|_| r.random_range(0.0..1.0)).collect()).collect();
        let v = (0..k)
            .map(|_| (0..n).map(|_| (0..m).map(|_| r.random_range(-1.0..1.0)).collect()).collect())
            .collect();
        RefGame { u, v, eta }
    }

    pub fn from_game(g: &GameInstance) -> Self {
        RefGame {
            u: g.leader_matrix().to_rows(),
            v: (0..g.k()).map(|k| g.follower_matrix(k).to_rows()).collect(),
            eta: g.eta(),
        }
    }

    pub fn to_game(&self) -> GameInstance {
        GameInstance::from_rows(&self.u, &self.v, self.eta).unwrap()
    }

    /// `<V^k_i, x>` for every follower action `i`.
    pub fn follower_values(&self, k: usize, x: &[f64]) -> Vec<f64> {
        (0..self.m())
            .map(|i| (0..self.n()).map(|r| self.v[k][r][i] * x[r]).sum())
            .collect()
    }

    /// Logit choice probabilities, computed naively (fine for moderate eta).
    pub fn logit(&self, k: usize, x: &[f64]) -> Vec<f64> {
        let e: Vec<f64> = self.follower_values(k, x).iter().map(|v| (self.eta * v).exp()).collect();
        let s: f64 = e.iter().sum();
        e.iter().map(|v| v / s).collect()
    }

    /// First maximizer of the follower values.
    pub fn best_action(&self, k: usize, x: &[f64]) -> usize {
        let vals = self.follower_values(k, x);
        let mut best = 0;
        for i in 1..vals.len() {
            if vals[i] > vals[best] {
                best = i;
            }
        }
        best
    }

    pub fn payoff(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for (r, xr) in x.iter().enumerate() {
            for (c, yc) in y.iter().enumerate() {
                s += xr * self.u[r][c] * yc;
            }
        }
        s
    }

    /// Leader payoff against type `k` responding to `x`.
    pub fn type_payoff(&self, k: usize, x: &[f64], quantal: bool) -> f64 {
        if quantal {
            self.payoff(x, &self.logit(k, x))
        } else {
            let a = self.best_action(k, x);
            (0..self.n()).map(|r| x[r] * self.u[r][a]).sum()
        }
    }

    pub fn objective(&self, x: &[f64], w: &[f64], tilt: Option<&[f64]>, quantal: bool) -> f64 {
        let mut s: f64 = w
            .iter()
            .enumerate()
            .filter(|(_, wk)| **wk != 0.0)
            .map(|(k, wk)| wk * self.type_payoff(k, x, quantal))
            .sum();
        if let Some(t) = tilt {
            s += t.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
        s
    }

    /// Induced 1-norm (max absolute column sum).
    pub fn norm1(mat: &[Vec<f64>]) -> f64 {
        (0..mat[0].len())
            .map(|c| mat.iter().map(|row| row[c].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn u_bar(&self) -> f64 {
        self.u.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()))
    }
}

/// Every point of the 3-simplex with coordinates in multiples of `1/res`.
pub fn grid3(res: usize) -> Vec<[f64; 3]> {
    let mut out = Vec::new();
    for i in 0..=res {
        for j in 0..=res - i {
            let k = res - i - j;
            out.push([i as f64 / res as f64, j as f64 / res as f64, k as f64 / res as f64]);
        }
    }
    out
}

/// Uniform point of the simplex.
pub fn dirichlet(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - r.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

pub fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

pub fn dist1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum()
}

/// `Theta_H` as the literal double sum over the weight function `a`.
pub fn theta_double_sum(a: impl Fn(usize) -> f64, horizon: usize) -> f64 {
    let mut total = 0.0;
    for t in 1..=horizon {
        let b: f64 = (1..=t).map(|tau| a(t - tau)).sum();
        let inner: f64 = (1..=t).map(|tau| a(t - tau) * (t - tau) as f64).sum();
        total += inner / b;
    }
    total
}

/// Writes one line straight to the process stderr, bypassing the test
/// harness capture so that results show up in plain `cargo test` output.
pub fn report(line: &str) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
    let _ = err.flush();
}
