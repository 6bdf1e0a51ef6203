//! Follower memory: the reputation `z^t`, a weighted average of the leader's
//! past commitments, and the memory-drag quantity `Theta_H`.
//!
//! With weights `a_0, a_1, ...` the reputation after round `t` is
//! `z^t = (1 / b_t) sum_{tau=1..t} a_{t-tau} x^tau` where
//! `b_t = sum_{tau=1..t} a_{t-tau}`.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::simplex::SimplexPoint;

/// Custom weight sequences are cut at the first weight below this value.
pub const CUSTOM_WEIGHT_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub enum MemoryModel {
    /// `a_0 = 1`, all later weights zero: followers see only `x^t`.
    Memoryless,
    /// `a_s = 1` for `s < B`, zero afterwards.
    FiniteMemory(usize),
    /// `a_s = gamma^s`.
    Discounted(f64),
    /// Explicit `a_0, a_1, ...`; weights past the end are zero.
    Custom(Vec<f64>),
}

impl MemoryModel {
    /// Checked constructor for custom weights. Truncates at the first weight
    /// below [`CUSTOM_WEIGHT_FLOOR`].
    pub fn custom(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::Memory("weights must be finite and nonnegative".into()));
        }
        let cut = weights
            .iter()
            .position(|a| *a < CUSTOM_WEIGHT_FLOOR)
            .unwrap_or(weights.len());
        if cut == 0 {
            return Err(Error::Memory("a_0 must be positive".into()));
        }
        if cut < weights.len() {
            log::warn!(
                "custom memory weights truncated to the first {cut} entries (a_{cut} < {CUSTOM_WEIGHT_FLOOR:e})"
            );
        }
        Ok(MemoryModel::Custom(weights[..cut].to_vec()))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MemoryModel::Memoryless => Ok(()),
            MemoryModel::FiniteMemory(b) if *b >= 1 => Ok(()),
            MemoryModel::FiniteMemory(_) => Err(Error::Memory("memory length B must be at least 1".into())),
            MemoryModel::Discounted(g) if *g > 0.0 && *g < 1.0 => Ok(()),
            MemoryModel::Discounted(g) => Err(Error::Memory(format!("discount must lie in (0, 1), got {g}"))),
            MemoryModel::Custom(w) => {
                if w.first().is_some_and(|a| *a > 0.0) && w.iter().all(|a| a.is_finite() && *a >= 0.0) {
                    Ok(())
                } else {
                    Err(Error::Memory("custom weights need a_0 > 0 and nonnegative entries".into()))
                }
            }
        }
    }

    /// The weight `a_s`.
    pub fn weight(&self, s: usize) -> f64 {
        match self {
            MemoryModel::Memoryless => (s == 0) as u8 as f64,
            MemoryModel::FiniteMemory(b) => (s < *b) as u8 as f64,
            MemoryModel::Discounted(g) => g.powi(s as i32),
            MemoryModel::Custom(w) => w.get(s).copied().unwrap_or(0.0),
        }
    }

    pub fn is_memoryless(&self) -> bool {
        matches!(self, MemoryModel::Memoryless)
    }

    /// `Theta_t` for every `t = 1..=horizon` (index `t - 1`).
    pub fn theta_prefix(&self, horizon: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(horizon);
        // b_t and sum_s a_s s both extend by one term per round.
        let mut weight_sum = 0.0;
        let mut lag_sum = 0.0;
        let mut theta = 0.0;
        let mut a = 1.0;
        for s in 0..horizon {
            let a_s = match self {
                MemoryModel::Discounted(g) => {
                    let cur = a;
                    a *= g;
                    cur
                }
                _ => self.weight(s),
            };
            weight_sum += a_s;
            lag_sum += a_s * s as f64;
            theta += lag_sum / weight_sum;
            out.push(theta);
        }
        out
    }

    /// `Theta_H = sum_{t=1..H} (1/b_t) sum_{tau=1..t} a_{t-tau} (t - tau)`.
    pub fn theta_h(&self, horizon: usize) -> f64 {
        self.theta_prefix(horizon).last().copied().unwrap_or(0.0)
    }
}

/// `Theta_H` of a finite window of length `b`. Once the window is full
/// every round contributes its mean lag `(B - 1)/2`; before that round `t`
/// contributes `(t - 1)/2`. Summing gives `(B - 1)(2H - B)/4` for
/// `B <= H` and `H(H - 1)/4` otherwise.
pub fn finite_memory_theta_closed_form(b: usize, horizon: usize) -> f64 {
    let (b, h) = (b as f64, horizon as f64);
    if b <= h {
        (b - 1.0) * (2.0 * h - b) / 4.0
    } else {
        h * (h - 1.0) / 4.0
    }
}

/// Upper bound on `Theta_H` for discounted memory:
/// `gamma/(1-gamma) * (H + ((H+1) gamma^H (1-gamma) + 1 - gamma^(H+1)) / (1-gamma)^2)`.
pub fn discounted_theta_upper_bound(gamma: f64, horizon: usize) -> f64 {
    let h = horizon as f64;
    let tail = ((h + 1.0) * gamma.powf(h) * (1.0 - gamma) + 1.0 - gamma.powf(h + 1.0)) / (1.0 - gamma).powi(2);
    gamma / (1.0 - gamma) * (h + tail)
}

impl FromStr for MemoryModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let model = match (head, arg) {
            ("none", None) => MemoryModel::Memoryless,
            ("fm", Some(b)) => MemoryModel::FiniteMemory(
                b.trim()
                    .parse()
                    .map_err(|_| Error::Memory(format!("bad window length `{b}`")))?,
            ),
            ("dm", Some(g)) => MemoryModel::Discounted(
                g.trim()
                    .parse()
                    .map_err(|_| Error::Memory(format!("bad discount `{g}`")))?,
            ),
            ("custom", Some(list)) => {
                let weights = list
                    .split(',')
                    .map(|w| {
                        w.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Memory(format!("bad weight `{w}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                MemoryModel::custom(weights)?
            }
            _ => return Err(Error::Memory(format!("unrecognized memory model `{s}`"))),
        };
        model.validate()?;
        Ok(model)
    }
}

impl fmt::Display for MemoryModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MemoryModel::Memoryless => write!(f, "none"),
            MemoryModel::FiniteMemory(b) => write!(f, "fm:{b}"),
            MemoryModel::Discounted(g) => write!(f, "dm:{g}"),
            MemoryModel::Custom(w) => {
                write!(f, "custom:")?;
                for (i, a) in w.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Accumulator {
    /// Most recent strategies first, at most `weights.len()` of them.
    Window { weights: Vec<f64>, history: VecDeque<Vec<f64>> },
    /// Running `s = sum gamma^(t-tau) x^tau` and `c = sum gamma^(t-tau)`.
    Discounted { gamma: f64, sum: Vec<f64>, count: f64 },
}

/// Incrementally maintained reputation `z^t`.
#[derive(Debug, Clone)]
pub struct ReputationState {
    t: usize,
    z: SimplexPoint,
    acc: Accumulator,
}

impl ReputationState {
    /// Fresh state before round 1. `z` starts uniform and is replaced by the
    /// first update.
    pub fn new(model: &MemoryModel, n: usize) -> Result<Self> {
        model.validate()?;
        let acc = match model {
            MemoryModel::Memoryless => Accumulator::Window {
                weights: vec![1.0],
                history: VecDeque::with_capacity(1),
            },
            MemoryModel::FiniteMemory(b) => Accumulator::Window {
                weights: vec![1.0; *b],
                history: VecDeque::with_capacity(*b),
            },
            MemoryModel::Custom(w) => Accumulator::Window {
                weights: w.clone(),
                history: VecDeque::with_capacity(w.len()),
            },
            MemoryModel::Discounted(g) => Accumulator::Discounted {
                gamma: *g,
                sum: vec![0.0; n],
                count: 0.0,
            },
        };
        Ok(ReputationState {
            t: 0,
            z: SimplexPoint::uniform(n),
            acc,
        })
    }

    pub fn round(&self) -> usize {
        self.t
    }

    pub fn reputation(&self) -> &SimplexPoint {
        &self.z
    }

    /// Folds in the round-`t` commitment and returns the new `z^t`.
    pub fn update(&mut self, x: &SimplexPoint) -> Result<&SimplexPoint> {
        let n = self.z.dim();
        if x.dim() != n {
            return Err(Error::Dimension { expected: n, got: x.dim() });
        }
        self.t += 1;
        let z = match &mut self.acc {
            Accumulator::Window { weights, history } => {
                if history.len() == weights.len() {
                    history.pop_back();
                }
                history.push_front(x.to_vec());
                let mut z = vec![0.0; n];
                let mut b = 0.0;
                for (a, past) in weights.iter().zip(history.iter()) {
                    b += a;
                    for (zi, pi) in z.iter_mut().zip(past) {
                        *zi += a * pi;
                    }
                }
                z.iter_mut().for_each(|zi| *zi /= b);
                z
            }
            Accumulator::Discounted { gamma, sum, count } => {
                for (s, xi) in sum.iter_mut().zip(x.iter()) {
                    *s = *gamma * *s + xi;
                }
                *count = *gamma * *count + 1.0;
                sum.iter().map(|s| s / *count).collect()
            }
        };
        self.z = SimplexPoint::from_vec_unchecked(z);
        Ok(&self.z)
    }
}
