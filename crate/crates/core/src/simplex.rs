//! Probability-simplex points and the small amount of geometry the oracles
//! need on top of them: Euclidean projection and simplicial grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on the entry sum (and on negative entries) accepted by
/// [`SimplexPoint::new`].
pub const SIMPLEX_TOL: f64 = 1e-9;

/// A probability vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    /// Validates `probs` and renormalizes it when it is within
    /// [`SIMPLEX_TOL`] of the simplex.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let dim = probs.len();
        if dim == 0 {
            return Err(Error::NotOnSimplex {
                dim,
                reason: "empty vector".into(),
            });
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < -SIMPLEX_TOL) {
            return Err(Error::NotOnSimplex {
                dim,
                reason: format!("entry {bad} is negative or not finite"),
            });
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::NotOnSimplex {
                dim,
                reason: format!("entries sum to {sum}"),
            });
        }
        let mut probs = probs;
        let needs_fix = sum != 1.0 || probs.iter().any(|p| *p < 0.0);
        if needs_fix {
            probs.iter_mut().for_each(|p| *p = p.max(0.0));
            let s: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= s);
        }
        Ok(SimplexPoint(probs))
    }

    /// Wraps a vector the caller already knows to be a probability vector.
    pub(crate) fn from_vec_unchecked(probs: Vec<f64>) -> Self {
        debug_assert!(probs.iter().all(|p| *p >= -1e-9));
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        SimplexPoint(probs)
    }

    pub fn uniform(dim: usize) -> Self {
        SimplexPoint(vec![1.0 / dim as f64; dim])
    }

    /// The `i`-th vertex `e_i`.
    pub fn vertex(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        SimplexPoint(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for SimplexPoint {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for SimplexPoint {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        SimplexPoint::new(v)
    }
}

impl From<SimplexPoint> for Vec<f64> {
    fn from(p: SimplexPoint) -> Vec<f64> {
        p.0
    }
}

/// Euclidean projection of `v` onto the probability simplex (sort-based).
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Number of points of the simplicial grid with `resolution` steps on the
/// `dim`-simplex, `C(resolution + dim - 1, dim - 1)`.
pub fn grid_size(dim: usize, resolution: usize) -> usize {
    let k = dim.saturating_sub(1);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (resolution + k - i) as u128 / (i + 1) as u128;
    }
    acc.min(usize::MAX as u128) as usize
}

/// All points `c / resolution` with `c` a composition of `resolution` into
/// `dim` nonnegative parts, in lexicographic order of `c` (descending first
/// coordinate).
pub fn simplex_grid(dim: usize, resolution: usize) -> Vec<Vec<f64>> {
    assert!(dim >= 1 && resolution >= 1);
    let mut out = Vec::with_capacity(grid_size(dim, resolution));
    let mut counts = vec![0usize; dim];
    fill_grid(&mut counts, 0, resolution, resolution, &mut out);
    out
}

fn fill_grid(
    counts: &mut [usize],
    pos: usize,
    remaining: usize,
    resolution: usize,
    out: &mut Vec<Vec<f64>>,
) {
    if pos + 1 == counts.len() {
        counts[pos] = remaining;
        out.push(
            counts
                .iter()
                .map(|&c| c as f64 / resolution as f64)
                .collect(),
        );
        return;
    }
    for c in (0..=remaining).rev() {
        counts[pos] = c;
        fill_grid(counts, pos + 1, remaining - c, resolution, out);
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

pub fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn dist1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Index of the largest entry; ties go to the smallest index.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_off_simplex_vectors() {
        assert!(SimplexPoint::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexPoint::new(vec![1.2, -0.2]).is_err());
        assert!(SimplexPoint::new(vec![]).is_err());
        assert!(SimplexPoint::new(vec![f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn renormalizes_within_tolerance() {
        let p = SimplexPoint::new(vec![0.5 + 4e-10, 0.5]).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let q = SimplexPoint::new(vec![1.0 + 1e-10, -1e-10]).unwrap();
        assert_eq!(q[1], 0.0);
    }

    #[test]
    fn json_roundtrip_validates() {
        let p: SimplexPoint = serde_json::from_str("[0.25,0.75]").unwrap();
        assert_eq!(p.as_slice(), &[0.25, 0.75]);
        assert!(serde_json::from_str::<SimplexPoint>("[0.25,0.5]").is_err());
    }

    #[test]
    fn grid_counts() {
        assert_eq!(grid_size(3, 20), 231);
        assert_eq!(simplex_grid(3, 20).len(), 231);
        assert_eq!(simplex_grid(1, 5), vec![vec![1.0]]);
        assert_eq!(simplex_grid(2, 2).len(), 3);
        assert_eq!(grid_size(3, 100), 5151);
        for p in simplex_grid(4, 7) {
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn argmax_breaks_ties_low() {
        assert_eq!(argmax(&[1.0, 3.0, 2.0, 3.0]), 1);
    }

    proptest! {
        #[test]
        fn projection_lands_on_simplex_and_is_nearest(
            v in proptest::collection::vec(-3.0f64..3.0, 1..7),
            seed in proptest::collection::vec(0.0f64..1.0, 7),
        ) {
            let p = project_to_simplex(&v);
            prop_assert!(p.iter().all(|x| *x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            // Any other simplex point is no closer to v.
            let s: f64 = seed[..v.len()].iter().sum::<f64>() + 1e-12;
            let q: Vec<f64> = seed[..v.len()].iter().map(|x| (x + 1e-12 / v.len() as f64) / s).collect();
            let d = |a: &[f64]| a.iter().zip(&v).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
            prop_assert!(d(&p) <= d(&q) + 1e-12);
        }
    }
}
