//! Commitment oracle against best-responding followers.
//!
//! Every joint follower profile `(i_1, ..., i_K)` carves out a polytope of
//! leader strategies under which each type `k` weakly prefers `i_k`. On that
//! polytope the leader objective is linear, so the oracle solves one LP per
//! profile and keeps the best. The winning vertex usually sits on a tie
//! boundary, so it is then pulled a short distance toward an interior point
//! of its polytope, where every follower's best response is unique.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use super::lp::{clean_simplex, lp_solve, Halfspace, LinearProgram, LpOutcome, LpStatus, Relation};
use super::{Certificate, OracleRequest, OracleResult};
use crate::error::{Error, Result};
use crate::game::{GameInstance, ResponseMode};
use crate::simplex::{dot, dist1, norm1, SimplexPoint};

/// Default cap on `M^K`.
pub const DEFAULT_PROFILE_CAP: usize = 1_000_000;

/// Minimum max-slack for a polytope to count as having an interior.
const INTERIOR_TOL: f64 = 1e-9;

/// How a pairwise preference `<V_i - V_j, x> >= 0` behaves on the simplex.
enum Preference {
    /// Varies with `x`; kept as a (normalized) constraint.
    Constraint(Halfspace),
    /// Constant positive: always strict.
    Always,
    /// Constant negative: never satisfied.
    Never,
    /// Constant zero: the two columns tie everywhere. `true` when the tie
    /// rule (smallest index) favors the other column.
    PermanentTie { loses_tie_break: bool },
}

fn preference(game: &GameInstance, k: usize, i: usize, j: usize) -> Preference {
    let vk = game.follower_matrix(k);
    let d: Vec<f64> = vk.col(i).iter().zip(vk.col(j)).map(|(a, b)| a - b).collect();
    let scale = d.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    let spread = d.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    if spread <= 1e-12 * scale.max(1.0) {
        // On the simplex <d, x> = mean.
        if mean > 1e-12 * scale.max(1.0) {
            Preference::Always
        } else if mean < -1e-12 * scale.max(1.0) {
            Preference::Never
        } else {
            Preference::PermanentTie { loses_tie_break: j < i }
        }
    } else {
        Preference::Constraint(Halfspace::new(d.iter().map(|v| v / scale).collect(), 0.0))
    }
}

/// Constraints under which type `k` weakly prefers action `i`, or `None`
/// when some other action always beats it. The flag marks actions that can
/// only ever be chosen through a favorable tie.
fn action_constraints(game: &GameInstance, k: usize, i: usize) -> Option<(Vec<Halfspace>, bool)> {
    let mut hs = Vec::new();
    let mut canonical = true;
    for j in (0..game.m()).filter(|&j| j != i) {
        match preference(game, k, i, j) {
            Preference::Constraint(h) => hs.push(h),
            Preference::Always => {}
            Preference::Never => return None,
            Preference::PermanentTie { loses_tie_break } => canonical &= !loses_tie_break,
        }
    }
    Some((hs, canonical))
}

/// A profile whose polytope has nonempty interior.
#[derive(Debug, Clone)]
pub struct ProfileRegion {
    actions: Vec<usize>,
    constraints: Vec<Halfspace>,
    center: Vec<f64>,
    canonical: bool,
}

impl ProfileRegion {
    /// Follower action per type.
    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    /// Non-trivial preference constraints, normalized to unit max-norm.
    pub fn constraints(&self) -> &[Halfspace] {
        &self.constraints
    }

    /// Interior point used for the shift.
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// False when some type's action is only reachable through a
    /// permanent tie lost under the smallest-index rule.
    pub fn is_canonical(&self) -> bool {
        self.canonical
    }
}

/// Profiles with a full-dimensional best-response polytope, computed once
/// per game (they do not depend on weights or perturbations).
#[derive(Debug, Clone)]
pub struct FeasibleProfiles {
    shape: (usize, usize, usize),
    total: u128,
    regions: Vec<ProfileRegion>,
}

impl FeasibleProfiles {
    pub fn regions(&self) -> &[ProfileRegion] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// `M^K`.
    pub fn total_profiles(&self) -> u128 {
        self.total
    }

    pub fn contains(&self, actions: &[usize]) -> bool {
        self.regions.iter().any(|r| r.actions == actions)
    }

    fn matches(&self, game: &GameInstance) -> bool {
        self.shape == (game.n(), game.m(), game.k())
    }
}

/// Enumerates all `M^K` profiles and keeps those whose polytope has an
/// interior point (constraints that are constant on the simplex are decided
/// directly: permanent ties count as satisfied).
pub fn precompute_feasible_profiles(game: &GameInstance, cap: usize) -> Result<FeasibleProfiles> {
    let (n, m, k) = (game.n(), game.m(), game.k());
    let total = (m as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if total > cap as u128 {
        return Err(Error::ProfileCap {
            count: if total == u128::MAX { format!("{m}^{k}") } else { total.to_string() },
            cap,
        });
    }
    // A profile can only have an interior if each of its actions does on its own.
    let per_type: Vec<Vec<(usize, Vec<Halfspace>, bool)>> = (0..k)
        .map(|kk| {
            (0..m)
                .filter_map(|i| {
                    let (hs, canonical) = action_constraints(game, kk, i)?;
                    max_slack(n, &hs).ok().flatten().map(|_| (i, hs, canonical))
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut regions = Vec::new();
    for combo in per_type.iter().map(|opts| opts.iter()).multi_cartesian_product() {
        let constraints: Vec<Halfspace> = combo.iter().flat_map(|(_, hs, _)| hs.iter().cloned()).collect();
        let Some(interior) = max_slack(n, &constraints)? else {
            continue;
        };
        let center = analytic_center(n, &constraints, &interior)?;
        regions.push(ProfileRegion {
            actions: combo.iter().map(|(i, _, _)| *i).collect(),
            canonical: combo.iter().all(|(_, _, c)| *c),
            constraints,
            center,
        });
    }
    Ok(FeasibleProfiles {
        shape: (n, m, k),
        total,
        regions,
    })
}

/// Point maximizing the smallest slack over the constraints and the
/// coordinates, or `None` if that slack is not positive.
fn max_slack(n: usize, constraints: &[Halfspace]) -> Result<Option<Vec<f64>>> {
    let mut obj = vec![0.0; n + 1];
    obj[n] = 1.0;
    let mut lp = LinearProgram::new(obj);
    let mut simplex_row = vec![1.0; n + 1];
    simplex_row[n] = 0.0;
    lp.add_row(simplex_row, Relation::Eq, 1.0);
    for h in constraints {
        let mut row = h.normal.clone();
        row.push(-1.0);
        lp.add_row(row, Relation::Ge, h.offset);
    }
    for i in 0..n {
        let mut row = vec![0.0; n + 1];
        row[i] = 1.0;
        row[n] = -1.0;
        lp.add_row(row, Relation::Ge, 0.0);
    }
    let mut cap = vec![0.0; n + 1];
    cap[n] = 1.0;
    lp.add_row(cap, Relation::Le, 1.0);
    match lp.solve()? {
        LpStatus::Optimal { x, value } if value > INTERIOR_TOL => Ok(Some(x[..n].to_vec())),
        LpStatus::Optimal { .. } | LpStatus::Infeasible => Ok(None),
        LpStatus::Unbounded => Err(Error::LpDegenerate("max-slack problem unbounded".into())),
    }
}

/// Analytic center of `{x in simplex : constraints}` (log barrier on every
/// constraint and coordinate), by damped Newton from a seed averaging the
/// max-slack point with the LP vertices for objectives `+e_i` and `-e_i`.
fn analytic_center(n: usize, constraints: &[Halfspace], interior: &[f64]) -> Result<Vec<f64>> {
    let mut seed = interior.to_vec();
    let mut count = 1.0;
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut c = vec![0.0; n];
            c[i] = sign;
            if let LpOutcome::Optimal { x, .. } = lp_solve(&c, constraints)? {
                seed.iter_mut().zip(x.iter()).for_each(|(s, v)| *s += v);
                count += 1.0;
            }
        }
    }
    seed.iter_mut().for_each(|s| *s /= count);
    let barrier = |x: &[f64]| -> Option<f64> {
        let mut acc = 0.0;
        for h in constraints {
            let s = h.slack(x);
            if s <= 0.0 {
                return None;
            }
            acc -= s.ln();
        }
        for v in x {
            if *v <= 0.0 {
                return None;
            }
            acc -= v.ln();
        }
        Some(acc)
    };
    let Some(mut f) = barrier(&seed) else {
        // The seed mixes in a strictly interior point, so this only happens
        // through round-off; the max-slack point is interior by construction.
        return Ok(interior.to_vec());
    };
    let mut x = seed;
    for _ in 0..100 {
        let mut grad = DVector::<f64>::zeros(n);
        let mut hess = DMatrix::<f64>::zeros(n, n);
        for h in constraints {
            let s = h.slack(&x);
            for a in 0..n {
                grad[a] -= h.normal[a] / s;
                for b in 0..n {
                    hess[(a, b)] += h.normal[a] * h.normal[b] / (s * s);
                }
            }
        }
        for a in 0..n {
            grad[a] -= 1.0 / x[a];
            hess[(a, a)] += 1.0 / (x[a] * x[a]);
        }
        // KKT system for the step restricted to sum(dx) = 0.
        let mut kkt = DMatrix::<f64>::zeros(n + 1, n + 1);
        kkt.view_mut((0, 0), (n, n)).copy_from(&hess);
        for a in 0..n {
            kkt[(a, n)] = 1.0;
            kkt[(n, a)] = 1.0;
        }
        let mut rhs = DVector::<f64>::zeros(n + 1);
        for a in 0..n {
            rhs[a] = -grad[a];
        }
        let Some(sol) = kkt.lu().solve(&rhs) else { break };
        let step: Vec<f64> = (0..n).map(|a| sol[a]).collect();
        let decrement: f64 = -(0..n).map(|a| grad[a] * step[a]).sum::<f64>();
        if !decrement.is_finite() || decrement < 1e-14 {
            break;
        }
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand: Vec<f64> = x.iter().zip(&step).map(|(v, d)| v + t * d).collect();
            if let Some(fc) = barrier(&cand) {
                if fc <= f - 0.25 * t * decrement {
                    x = cand;
                    f = fc;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !moved {
            break;
        }
    }
    Ok(clean_simplex(x))
}

/// Solves the weighted best-response commitment problem to within
/// `req.epsilon`, returning a point where every type's best response is
/// unique.
pub fn br_oracle(req: &OracleRequest<'_>, profiles: &FeasibleProfiles) -> Result<OracleResult> {
    req.validate()?;
    if req.mode != ResponseMode::Br {
        return Err(Error::Config("br_oracle called with a quantal-response request".into()));
    }
    let game = req.game;
    if !profiles.matches(game) {
        return Err(Error::Config("feasible-profile cache belongs to a different game".into()));
    }
    let n = game.n();
    let u = game.leader_matrix();
    let tilt = req.tilt_or_zero();
    let weights = req.weights.as_slice();

    let mut best: Option<(f64, &ProfileRegion, Vec<f64>)> = None;
    for region in profiles.regions.iter().filter(|r| r.canonical) {
        let mut c = tilt.clone();
        for (k, &i) in region.actions.iter().enumerate() {
            if weights[k] != 0.0 {
                for (cn, un) in c.iter_mut().zip(u.col(i)) {
                    *cn += weights[k] * un;
                }
            }
        }
        // The LP optimum cannot beat the best vertex of the whole simplex.
        let ceiling = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if let Some((b, _, _)) = &best {
            if ceiling <= *b {
                continue;
            }
        }
        if let LpOutcome::Optimal { x, value } = lp_solve(&c, &region.constraints)? {
            if best.as_ref().is_none_or(|(b, _, _)| value > *b) {
                best = Some((value, region, x.into_vec()));
            }
        }
    }
    let Some((_, region, vertex)) = best else {
        return Err(Error::NoFeasibleProfile);
    };

    // ||x' - x*||_1 <= delta keeps the objective within epsilon.
    let lipschitz = norm1(weights) * game.u_bar() + tilt.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let delta = if lipschitz > 0.0 { req.epsilon / lipschitz } else { f64::INFINITY };
    let dist = dist1(&region.center, &vertex);
    let mut t = if dist > 0.0 { (delta / dist).min(1.0) } else { 0.0 };
    let x_star = loop {
        let x: Vec<f64> = vertex
            .iter()
            .zip(&region.center)
            .map(|(v, c)| v + t * (c - v))
            .collect();
        let x = clean_simplex(x);
        let unique = region.actions.iter().enumerate().all(|(k, &i)| game.br_index(k, &x) == i)
            && region.constraints.iter().all(|h| h.slack(&x) > 0.0);
        if unique || t >= 1.0 {
            break x;
        }
        t = (t * 2.0).clamp(1e-12, 1.0);
    };
    let profile: Vec<usize> = (0..game.k()).map(|k| game.br_index(k, &x_star)).collect();
    let value = game.objective_raw(&x_star, weights, ResponseMode::Br) + dot(&tilt, &x_star);
    debug_assert_eq!(x_star.len(), n);
    Ok(OracleResult {
        x_star: SimplexPoint::from_vec_unchecked(x_star),
        value,
        profile: Some(profile),
        certificate: Certificate::EnumerationComplete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::TypeWeights;
    use crate::presets::reference_game;

    fn request<'a>(game: &'a GameInstance, w: Vec<f64>, eps: f64) -> OracleRequest<'a> {
        OracleRequest {
            game,
            weights: TypeWeights::new(w).unwrap(),
            linear_tilt: None,
            mode: ResponseMode::Br,
            epsilon: eps,
        }
    }

    #[test]
    fn dominated_action_never_feasible() {
        // Column 2 is strictly worse than column 0 everywhere.
        let g = GameInstance::from_rows(
            &[vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]],
            &[vec![vec![1.0, 0.0, 0.5], vec![0.0, 1.0, -0.5]]],
            1.0,
        )
        .unwrap();
        let p = precompute_feasible_profiles(&g, DEFAULT_PROFILE_CAP).unwrap();
        assert!(p.contains(&[0]) && p.contains(&[1]));
        assert!(!p.contains(&[2]));
        assert_eq!(p.total_profiles(), 3);
    }

    #[test]
    fn identical_columns_all_feasible() {
        let g = GameInstance::from_rows(
            &[vec![1.0, 2.0, 3.0], vec![0.0, 4.0, 1.0]],
            &[vec![vec![0.2, 0.2, 0.2], vec![-1.0, -1.0, -1.0]]],
            1.0,
        )
        .unwrap();
        let p = precompute_feasible_profiles(&g, DEFAULT_PROFILE_CAP).unwrap();
        assert_eq!(p.len(), 3);
        // Only the tie-break winner is used by the oracle.
        let canon: Vec<_> = p.regions().iter().filter(|r| r.is_canonical()).collect();
        assert_eq!(canon.len(), 1);
        assert_eq!(canon[0].actions(), &[0]);
        let res = br_oracle(&request(&g, vec![1.0], 1e-3), &p).unwrap();
        assert_eq!(res.profile.as_deref(), Some(&[0][..]));
        // Leader payoff against column 0 is maximized at e_1.
        assert!((res.value - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn reference_game_profiles_are_stable_and_pruned() {
        let g = reference_game();
        let a = precompute_feasible_profiles(&g, DEFAULT_PROFILE_CAP).unwrap();
        let b = precompute_feasible_profiles(&g, DEFAULT_PROFILE_CAP).unwrap();
        assert!(a.len() < 729);
        assert_eq!(a.total_profiles(), 729);
        let acts = |p: &FeasibleProfiles| p.regions().iter().map(|r| r.actions().to_vec()).collect::<Vec<_>>();
        assert_eq!(acts(&a), acts(&b));
        // One region per leader action that can be the unique minimum.
        assert_eq!(a.len(), 3);
    }

    #[test]
    fn profile_cap_is_enforced() {
        let g = GameInstance::random(2, 4, 11, 1.0, 1).unwrap();
        assert!(matches!(
            precompute_feasible_profiles(&g, DEFAULT_PROFILE_CAP),
            Err(Error::ProfileCap { .. })
        ));
    }

    #[test]
    fn centers_are_strictly_interior() {
        let g = GameInstance::random(3, 3, 2, 1.0, 21).unwrap();
        let p = precompute_feasible_profiles(&g, DEFAULT_PROFILE_CAP).unwrap();
        for r in p.regions() {
            assert!(r.constraints().iter().all(|h| h.slack(r.center()) > 0.0));
            for (k, &i) in r.actions().iter().enumerate() {
                assert_eq!(g.br_index(k, r.center()), i);
            }
        }
    }

    #[test]
    fn zero_weights_give_zero_value() {
        let g = GameInstance::random(3, 3, 2, 1.0, 5).unwrap();
        let p = precompute_feasible_profiles(&g, DEFAULT_PROFILE_CAP).unwrap();
        let r = br_oracle(&request(&g, vec![0.0, 0.0], 1e-3), &p).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn returned_profile_is_the_unique_best_response() {
        for seed in 0..20 {
            let g = GameInstance::random(3, 3, 2, 1.0, seed).unwrap();
            let p = precompute_feasible_profiles(&g, DEFAULT_PROFILE_CAP).unwrap();
            let r = br_oracle(&request(&g, vec![1.3, 0.4], 1e-4), &p).unwrap();
            let profile = r.profile.clone().unwrap();
            for k in 0..2 {
                let vals: Vec<f64> = (0..3).map(|i| dot(g.follower_matrix(k).col(i), &r.x_star)).collect();
                let top = vals[profile[k]];
                assert!(vals.iter().enumerate().all(|(i, v)| i == profile[k] || *v < top));
            }
            let re = g
                .weighted_objective(&r.x_star, &TypeWeights::new(vec![1.3, 0.4]).unwrap(), ResponseMode::Br)
                .unwrap();
            assert!((re - r.value).abs() <= 1e-9);
        }
    }
}
