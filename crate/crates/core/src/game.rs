//! Game data, follower response models and leader utilities.
//!
//! The leader has `N` actions and payoff matrix `U` (`N x M`, nonnegative);
//! a follower of type `k` has payoff matrix `V^k` (`N x M`). Column `i` of
//! `V^k` is the payoff vector of follower action `i` against the leader's
//! pure actions, so against a leader mixture `x` action `i` earns
//! `<V^k_i, x>`.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{dot, SimplexPoint};

/// How followers respond to a commitment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResponseMode {
    /// Logit quantal response with the game's rationality constant.
    Qr,
    /// Exact best response, ties to the smallest action index.
    Br,
}

impl std::str::FromStr for ResponseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qr" => Ok(ResponseMode::Qr),
            "br" => Ok(ResponseMode::Br),
            other => Err(Error::Config(format!("unknown response mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for ResponseMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ResponseMode::Qr => "qr",
            ResponseMode::Br => "br",
        })
    }
}

/// Dense real matrix stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidGame("matrix has no rows".into()));
        }
        let m = rows[0].len();
        if m == 0 {
            return Err(Error::InvalidGame("matrix has no columns".into()));
        }
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidGame("ragged matrix rows".into()));
        }
        let mut data = vec![0.0; n * m];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidGame(format!("non-finite entry at ({i}, {j})")));
                }
                data[j * n + i] = v;
            }
        }
        Ok(Matrix { rows: n, cols: m, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Induced 1-norm: largest absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| self.col(j).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Nonnegative weights over follower types (`g^t`, `G^t`, `G^t + sigma`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeWeights(Vec<f64>);

impl TypeWeights {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Config(format!(
                "type weights must be finite and nonnegative, got {weights:?}"
            )));
        }
        Ok(TypeWeights(weights))
    }

    pub fn zeros(types: usize) -> Self {
        TypeWeights(vec![0.0; types])
    }

    pub fn basis(types: usize, k: usize) -> Self {
        let mut w = vec![0.0; types];
        w[k] = 1.0;
        TypeWeights(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub(crate) fn add_count(&mut self, k: usize) {
        self.0[k] += 1.0;
    }

    /// `self + other`, entrywise.
    pub fn plus(&self, other: &[f64]) -> Result<Self> {
        if other.len() != self.0.len() {
            return Err(Error::Dimension {
                expected: self.0.len(),
                got: other.len(),
            });
        }
        TypeWeights::new(self.0.iter().zip(other).map(|(a, b)| a + b).collect())
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        TypeWeights::new(self.0.iter().map(|w| w * c).collect())
    }
}

impl std::ops::Deref for TypeWeights {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Serialize, Deserialize)]
struct GameJson {
    #[serde(rename = "U")]
    u: Vec<Vec<f64>>,
    #[serde(rename = "V")]
    v: Vec<Vec<Vec<f64>>>,
    eta: f64,
}

/// A Bayesian Stackelberg game with `K` follower types sharing one
/// rationality constant `eta`.
#[derive(Debug, Clone, PartialEq)]
pub struct GameInstance {
    u: Matrix,
    v: Vec<Matrix>,
    eta: f64,
    u_bar: f64,
    u_norm1: f64,
    v_norm1_max: f64,
}

impl GameInstance {
    pub fn new(u: Matrix, v: Vec<Matrix>, eta: f64) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidGame("at least one follower type is required".into()));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidGame(format!("eta must be positive, got {eta}")));
        }
        if (0..u.cols()).any(|j| u.col(j).iter().any(|x| *x < 0.0)) {
            return Err(Error::InvalidGame("leader payoffs U must be nonnegative".into()));
        }
        for (k, vk) in v.iter().enumerate() {
            if vk.rows() != u.rows() || vk.cols() != u.cols() {
                return Err(Error::InvalidGame(format!(
                    "V^{} has shape {}x{}, expected {}x{}",
                    k + 1,
                    vk.rows(),
                    vk.cols(),
                    u.rows(),
                    u.cols()
                )));
            }
        }
        let u_bar = u.max_abs();
        let u_norm1 = u.norm1();
        let v_norm1_max = v.iter().map(Matrix::norm1).fold(0.0, f64::max);
        Ok(GameInstance {
            u,
            v,
            eta,
            u_bar,
            u_norm1,
            v_norm1_max,
        })
    }

    pub fn from_rows(u: &[Vec<f64>], v: &[Vec<Vec<f64>>], eta: f64) -> Result<Self> {
        let u = Matrix::from_rows(u)?;
        let v = v.iter().map(|m| Matrix::from_rows(m)).collect::<Result<Vec<_>>>()?;
        GameInstance::new(u, v, eta)
    }

    /// Copy of this game with a different rationality constant.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        GameInstance::new(self.u.clone(), self.v.clone(), eta)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GameJson = serde_json::from_str(text)?;
        GameInstance::from_rows(&doc.u, &doc.v, doc.eta)
    }

    pub fn to_json(&self) -> String {
        let doc = GameJson {
            u: self.u.to_rows(),
            v: self.v.iter().map(Matrix::to_rows).collect(),
            eta: self.eta,
        };
        serde_json::to_string_pretty(&doc).expect("game serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        GameInstance::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    /// Random instance: `U` entries uniform on `[0, 1]`, `V^k` entries
    /// uniform on `[-1, 1]`.
    pub fn random(n: usize, m: usize, k: usize, eta: f64, seed: u64) -> Result<Self> {
        if n == 0 || m == 0 || k == 0 {
            return Err(Error::InvalidGame("N, M and K must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |lo: f64, hi: f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|_| (0..m).map(|_| rng.random_range(lo..=hi)).collect())
                .collect()
        };
        let u = draw(0.0, 1.0);
        let v: Vec<_> = (0..k).map(|_| draw(-1.0, 1.0)).collect();
        GameInstance::from_rows(&u, &v, eta)
    }

    /// Leader actions `N`.
    pub fn n(&self) -> usize {
        self.u.rows()
    }

    /// Follower actions `M`.
    pub fn m(&self) -> usize {
        self.u.cols()
    }

    /// Follower types `K`.
    pub fn k(&self) -> usize {
        self.v.len()
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn leader_matrix(&self) -> &Matrix {
        &self.u
    }

    pub fn follower_matrix(&self, k: usize) -> &Matrix {
        &self.v[k]
    }

    /// Largest absolute leader payoff `U-bar`.
    pub fn u_bar(&self) -> f64 {
        self.u_bar
    }

    /// `||U||_1`.
    pub fn u_norm1(&self) -> f64 {
        self.u_norm1
    }

    /// `max_k ||V^k||_1`.
    pub fn v_norm1_max(&self) -> f64 {
        self.v_norm1_max
    }

    /// Lipschitz constant of every quantal response w.r.t. `||.||_inf` on the
    /// input and `||.||_1` on the output: `2 eta max_k ||V^k||_1`.
    pub fn qr_lipschitz(&self) -> f64 {
        2.0 * self.eta * self.v_norm1_max
    }

    /// `(1 + L) ||g||_1 ||U||_1`, the Lipschitz constant of
    /// `x -> x^T U Y_QR(x) g`.
    pub fn utility_lipschitz(&self, g: &[f64]) -> f64 {
        (1.0 + self.qr_lipschitz()) * g.iter().map(|w| w.abs()).sum::<f64>() * self.u_norm1
    }

    /// `L ||U||_1 ||g||_1`, bounding `|x^T U (Y_QR(x) - Y_QR(z)) g|`.
    pub fn response_shift_lipschitz(&self, g: &[f64]) -> f64 {
        self.qr_lipschitz() * self.u_norm1 * g.iter().map(|w| w.abs()).sum::<f64>()
    }

    fn check_type(&self, k: usize) -> Result<()> {
        if k >= self.k() {
            return Err(Error::TypeIndex {
                index: k,
                types: self.k(),
            });
        }
        Ok(())
    }

    fn check_leader(&self, x: &SimplexPoint) -> Result<()> {
        if x.dim() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                got: x.dim(),
            });
        }
        Ok(())
    }

    fn check_follower(&self, y: &SimplexPoint) -> Result<()> {
        if y.dim() != self.m() {
            return Err(Error::Dimension {
                expected: self.m(),
                got: y.dim(),
            });
        }
        Ok(())
    }

    /// Logit response of type `k` to the commitment `x`.
    pub fn quantal_response(&self, k: usize, x: &SimplexPoint) -> Result<SimplexPoint> {
        self.check_type(k)?;
        self.check_leader(x)?;
        let mut y = vec![0.0; self.m()];
        self.qr_into(k, x, &mut y);
        Ok(SimplexPoint::from_vec_unchecked(y))
    }

    /// Unchecked logit response written into `out`; `x` need not be
    /// normalized. Uses max-subtraction so large `eta` cannot overflow.
    pub(crate) fn qr_into(&self, k: usize, x: &[f64], out: &mut [f64]) {
        let vk = &self.v[k];
        let mut top = f64::NEG_INFINITY;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.eta * dot(vk.col(i), x);
            top = top.max(*o);
        }
        let mut total = 0.0;
        for o in out.iter_mut() {
            *o = (*o - top).exp();
            total += *o;
        }
        for o in out.iter_mut() {
            *o /= total;
        }
    }

    /// Jacobian of the logit response of type `k` at `x`: an `M x N` matrix
    /// (as rows) whose row `i` is `eta y_i (V_i - V y)^T`.
    pub fn quantal_response_gradient(&self, k: usize, x: &SimplexPoint) -> Result<Vec<Vec<f64>>> {
        self.check_type(k)?;
        self.check_leader(x)?;
        let (n, m) = (self.n(), self.m());
        let mut y = vec![0.0; m];
        self.qr_into(k, x, &mut y);
        let vk = &self.v[k];
        let mut vy = vec![0.0; n];
        for (i, &yi) in y.iter().enumerate() {
            for (r, v) in vk.col(i).iter().enumerate() {
                vy[r] += v * yi;
            }
        }
        Ok((0..m)
            .map(|i| {
                vk.col(i)
                    .iter()
                    .zip(&vy)
                    .map(|(vi, vyr)| self.eta * y[i] * (vi - vyr))
                    .collect()
            })
            .collect())
    }

    /// Index of the best response of type `k`, ties to the smallest index.
    pub(crate) fn br_index(&self, k: usize, x: &[f64]) -> usize {
        let vk = &self.v[k];
        let mut best = 0;
        let mut best_val = dot(vk.col(0), x);
        for i in 1..self.m() {
            let val = dot(vk.col(i), x);
            if val > best_val {
                best = i;
                best_val = val;
            }
        }
        best
    }

    /// Best response of type `k` as `(action, e_action)`.
    pub fn best_response(&self, k: usize, x: &SimplexPoint) -> Result<(usize, SimplexPoint)> {
        self.check_type(k)?;
        self.check_leader(x)?;
        let i = self.br_index(k, x);
        Ok((i, SimplexPoint::vertex(self.m(), i)))
    }

    /// The stacked responses `Y(x)`: one column (length `M`) per type.
    pub fn response_matrix(&self, x: &SimplexPoint, mode: ResponseMode) -> Result<Vec<SimplexPoint>> {
        self.check_leader(x)?;
        (0..self.k())
            .map(|k| match mode {
                ResponseMode::Qr => self.quantal_response(k, x),
                ResponseMode::Br => self.best_response(k, x).map(|(_, y)| y),
            })
            .collect()
    }

    /// `x^T U y`.
    pub fn leader_payoff(&self, x: &SimplexPoint, y: &SimplexPoint) -> Result<f64> {
        self.check_leader(x)?;
        self.check_follower(y)?;
        Ok(self.payoff_mixed(x, y))
    }

    pub(crate) fn payoff_mixed(&self, x: &[f64], y: &[f64]) -> f64 {
        y.iter()
            .enumerate()
            .map(|(j, yj)| yj * dot(self.u.col(j), x))
            .sum()
    }

    /// Leader payoff when a type-`k` follower responds to `response_to`
    /// while the leader actually plays `x` (`x^T U y^k(response_to)`).
    pub(crate) fn payoff_against(
        &self,
        k: usize,
        x: &[f64],
        response_to: &[f64],
        mode: ResponseMode,
        buf: &mut [f64],
    ) -> f64 {
        match mode {
            ResponseMode::Br => dot(self.u.col(self.br_index(k, response_to)), x),
            ResponseMode::Qr => {
                self.qr_into(k, response_to, buf);
                self.payoff_mixed(x, buf)
            }
        }
    }

    /// `sum_k w_k x^T U y^k(x)`.
    pub fn weighted_objective(&self, x: &SimplexPoint, weights: &TypeWeights, mode: ResponseMode) -> Result<f64> {
        self.check_leader(x)?;
        if weights.len() != self.k() {
            return Err(Error::Dimension {
                expected: self.k(),
                got: weights.len(),
            });
        }
        Ok(self.objective_raw(x, weights, mode))
    }

    pub(crate) fn objective_raw(&self, x: &[f64], weights: &[f64], mode: ResponseMode) -> f64 {
        let mut buf = vec![0.0; self.m()];
        weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w != 0.0)
            .map(|(k, w)| w * self.payoff_against(k, x, x, mode, &mut buf))
            .sum()
    }
}
