//! Commitment oracle against quantal-responding followers.
//!
//! The objective `sum_k w_k x^T U y^k_QR(x) + <tilt, x>` is smooth but not
//! concave. We start projected-gradient ascent from every point of a
//! simplicial grid and keep the best end point, which makes the search
//! deterministic and never worse than the best grid point.

use super::{Certificate, OracleRequest, OracleResult};
use crate::error::{Error, Result};
use crate::game::{GameInstance, ResponseMode};
use crate::simplex::{dot, grid_size, project_to_simplex, simplex_grid, SimplexPoint};

#[derive(Debug, Clone, PartialEq)]
pub struct QrOracleConfig {
    /// Grid steps per unit; `None` picks 20 for `N <= 4` and the finest
    /// resolution within `max_grid_points` otherwise.
    pub resolution: Option<usize>,
    pub max_grid_points: usize,
    pub max_iters: usize,
    /// Ascent stops once a step moves the iterate less than this (2-norm).
    pub min_step: f64,
    pub max_dim: usize,
}

impl Default for QrOracleConfig {
    fn default() -> Self {
        QrOracleConfig {
            resolution: None,
            max_grid_points: 5000,
            max_iters: 500,
            min_step: 1e-8,
            max_dim: 8,
        }
    }
}

impl QrOracleConfig {
    pub fn resolution_for(&self, n: usize) -> usize {
        if let Some(r) = self.resolution {
            return r.max(1);
        }
        if n <= 4 {
            return 20;
        }
        (1..=20)
            .rev()
            .find(|&r| grid_size(n, r) <= self.max_grid_points)
            .unwrap_or(1)
    }
}

/// Evaluates the weighted quantal objective and its gradient with reusable
/// scratch buffers.
pub(crate) struct QrObjective<'a> {
    game: &'a GameInstance,
    weights: Vec<(usize, f64)>,
    tilt: Vec<f64>,
    y: Vec<f64>,
    ux: Vec<f64>,
    vy: Vec<f64>,
}

impl<'a> QrObjective<'a> {
    pub(crate) fn new(game: &'a GameInstance, weights: &[f64], tilt: Vec<f64>) -> Self {
        QrObjective {
            game,
            weights: weights
                .iter()
                .copied()
                .enumerate()
                .filter(|(_, w)| *w != 0.0)
                .collect(),
            tilt,
            y: vec![0.0; game.m()],
            ux: vec![0.0; game.m()],
            vy: vec![0.0; game.n()],
        }
    }

    pub(crate) fn value(&mut self, x: &[f64]) -> f64 {
        let mut total = dot(&self.tilt, x);
        for &(k, w) in &self.weights {
            self.game.qr_into(k, x, &mut self.y);
            total += w * self.game.payoff_mixed(x, &self.y);
        }
        total
    }

    /// Value and gradient. For one type the gradient of `x^T U y(x)` is
    /// `U y + J^T U^T x`, with `J` the logit Jacobian
    /// (`J_ij = eta y_i (V_ji - (V y)_j)`).
    pub(crate) fn value_grad(&mut self, x: &[f64], grad: &mut [f64]) -> f64 {
        let game = self.game;
        let u = game.leader_matrix();
        let eta = game.eta();
        grad.copy_from_slice(&self.tilt);
        let mut total = dot(&self.tilt, x);
        for &(k, w) in &self.weights {
            let vk = game.follower_matrix(k);
            game.qr_into(k, x, &mut self.y);
            for (j, uxj) in self.ux.iter_mut().enumerate() {
                *uxj = dot(u.col(j), x);
            }
            let yu = dot(&self.y, &self.ux);
            total += w * yu;
            self.vy.iter_mut().for_each(|v| *v = 0.0);
            for (i, &yi) in self.y.iter().enumerate() {
                for (r, v) in vk.col(i).iter().enumerate() {
                    self.vy[r] += v * yi;
                }
            }
            // U y term.
            for (i, &yi) in self.y.iter().enumerate() {
                let coef = w * yi;
                for (g, un) in grad.iter_mut().zip(u.col(i)) {
                    *g += coef * un;
                }
            }
            // J^T (U^T x) = eta [ sum_i V_i y_i (U^T x)_i - (V y) <y, U^T x> ].
            for (i, &yi) in self.y.iter().enumerate() {
                let coef = w * eta * yi * self.ux[i];
                for (g, vn) in grad.iter_mut().zip(vk.col(i)) {
                    *g += coef * vn;
                }
            }
            for (g, vyr) in grad.iter_mut().zip(&self.vy) {
                *g -= w * eta * yu * vyr;
            }
        }
        total
    }
}

/// Projected-gradient ascent with Armijo backtracking from `start`.
/// Returns the end point and its value.
pub(crate) fn ascend(obj: &mut QrObjective<'_>, start: Vec<f64>, cfg: &QrOracleConfig) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut x = start;
    let mut grad = vec![0.0; n];
    let mut f = obj.value_grad(&x, &mut grad);
    let mut step = 1.0;
    for _ in 0..cfg.max_iters {
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
            let cand = project_to_simplex(&trial);
            let moved: f64 = cand.iter().zip(&x).map(|(c, a)| (c - a) * (c - a)).sum::<f64>().sqrt();
            if moved < cfg.min_step {
                // Projected gradient is (numerically) zero: stationary.
                return (x, f);
            }
            let fc = obj.value(&cand);
            let predicted: f64 = grad.iter().zip(cand.iter().zip(&x)).map(|(g, (c, a))| g * (c - a)).sum();
            if fc >= f + 1e-4 * predicted {
                accepted = Some((cand, fc, moved));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, _, moved)) = accepted else {
            return (x, f);
        };
        x = cand;
        f = obj.value_grad(&x, &mut grad);
        if moved < cfg.min_step {
            break;
        }
        step = (step * 2.0).min(1e6);
    }
    (x, f)
}

/// Grid-seeded projected-gradient search for the quantal commitment problem.
pub fn qr_oracle(req: &OracleRequest<'_>, cfg: &QrOracleConfig) -> Result<OracleResult> {
    req.validate()?;
    if req.mode != ResponseMode::Qr {
        return Err(Error::Config("qr_oracle called with a best-response request".into()));
    }
    let game = req.game;
    let n = game.n();
    if n > cfg.max_dim {
        return Err(Error::GridCap { n, cap: cfg.max_dim });
    }
    let mut obj = QrObjective::new(game, req.weights.as_slice(), req.tilt_or_zero());
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in simplex_grid(n, cfg.resolution_for(n)) {
        let (x, f) = ascend(&mut obj, start, cfg);
        if best.as_ref().is_none_or(|(_, b)| f > *b) {
            best = Some((x, f));
        }
    }
    let (x, _) = best.expect("grid is never empty");
    let x = super::lp::clean_simplex(x);
    let value = obj.value(&x);
    Ok(OracleResult {
        x_star: SimplexPoint::from_vec_unchecked(x),
        value,
        profile: None,
        certificate: Certificate::SearchBudgetExhausted,
    })
}
