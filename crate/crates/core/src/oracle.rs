//! Brute-force reference solvers for small instances.
//!
//! These share no code with the production solvers beyond the data types: resolution is
//! checked by enumerating the vertices of the constraint polytope and maximizing the ℓ¹
//! distance directly, scheduling and bidding by grid search.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::allocation::{AllocationPattern, Bid};
use crate::error::{Error, Result};
use crate::scheduler::{evaluate, SpectralEfficiencyTable};
use crate::solver::interior::alpha_fair;
use crate::subset::{nonempty_subsets, subset_count, subsets_containing, SubsetId};

const GRID_LIMIT: u64 = 20_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResolution {
    pub pattern: AllocationPattern,
    pub objective: f64,
    pub vertices: usize,
}

/// Maximizes `Σ_S |b_S − b0_S|` over reciprocity and every bid box by visiting all vertices.
pub fn resolve_by_vertices(bids: &[Bid], b0: &AllocationPattern) -> Result<OracleResolution> {
    let n = b0.n_players();
    let vars: Vec<SubsetId> = nonempty_subsets(n).collect();
    let k = vars.len();
    let mut lo = vec![0.0_f64; k];
    let mut hi = vec![f64::INFINITY; k];
    for bid in bids {
        for (j, &s) in vars.iter().enumerate() {
            if let Some(a) = bid.get(s) {
                let d = b0.get(s);
                lo[j] = lo[j].max(a.min(d));
                hi[j] = hi[j].min(a.max(d));
            }
        }
    }
    if (0..k).any(|j| !hi[j].is_finite()) {
        return Err(Error::invalid("every subset needs at least one bid"));
    }
    let a = DMatrix::from_fn(n, k, |p, j| {
        if vars[j].contains(p) {
            1.0 / vars[j].len() as f64
        } else {
            0.0
        }
    });
    let rhs = 1.0 / n as f64;

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut visited = 0;
    for basis in choose(k, n) {
        let nonbasic: Vec<usize> = (0..k).filter(|j| !basis.contains(j)).collect();
        let ab = DMatrix::from_fn(n, n, |p, c| a[(p, basis[c])]);
        let Some(inv) = ab.try_inverse() else {
            continue;
        };
        for mask in 0u64..(1 << nonbasic.len()) {
            let mut x = vec![0.0; k];
            for (q, &j) in nonbasic.iter().enumerate() {
                x[j] = if mask >> q & 1 == 1 { hi[j] } else { lo[j] };
            }
            let r = DVector::from_fn(n, |p, _| {
                rhs - nonbasic.iter().map(|&j| a[(p, j)] * x[j]).sum::<f64>()
            });
            let xb = &inv * r;
            let mut ok = true;
            for (c, &j) in basis.iter().enumerate() {
                if xb[c] < lo[j] - 1e-10 || xb[c] > hi[j] + 1e-10 {
                    ok = false;
                    break;
                }
                x[j] = xb[c].clamp(lo[j], hi[j]);
            }
            if !ok {
                continue;
            }
            visited += 1;
            let obj: f64 = vars
                .iter()
                .enumerate()
                .map(|(j, &s)| (x[j] - b0.get(s)).abs())
                .sum();
            if best.as_ref().is_none_or(|(b, _)| obj > *b) {
                best = Some((obj, x));
            }
        }
    }
    let (objective, x) = best.ok_or_else(|| Error::Internal("no feasible vertex".into()))?;
    let mut values = vec![0.0; subset_count(n)];
    for (j, &s) in vars.iter().enumerate() {
        values[s.index()] = x[j];
    }
    Ok(OracleResolution {
        pattern: AllocationPattern::new(n, values)?,
        objective,
        vertices: visited,
    })
}

fn choose(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// All ways to split `total` units into `parts` non-negative integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Grid search of the per-transmitter scheduling problem with `steps` units per simplex.
///
/// Cooperative groups in the table are ignored.
pub fn utility_by_grid(
    b: &AllocationPattern,
    table: &SpectralEfficiencyTable,
    alpha: f64,
    steps: usize,
) -> Result<f64> {
    let users = table.users();
    let mut txs: Vec<usize> = users.iter().map(|u| u.serving_tx).collect();
    txs.sort_unstable();
    txs.dedup();
    // Each pool is one (transmitter, subset) pair splitting b_S among that TX's users.
    let mut pools: Vec<(Vec<usize>, usize, f64)> = Vec::new();
    for &v in &txs {
        let members: Vec<usize> = (0..users.len()).filter(|&u| users[u].serving_tx == v).collect();
        for (k, &s) in table.subsets().iter().enumerate() {
            pools.push((members.clone(), k, b.get(s)));
        }
    }
    let combos = pools
        .iter()
        .map(|(m, _, _)| binomial((steps + m.len() - 1) as u64, (m.len() - 1) as u64))
        .fold(1u64, |a, c| a.saturating_mul(c));
    if combos > GRID_LIMIT {
        return Err(Error::invalid(format!("grid of {combos} points is too large")));
    }
    let options: Vec<Vec<Vec<usize>>> = pools
        .iter()
        .map(|(m, _, _)| compositions(steps, m.len()))
        .collect();
    let live: Vec<bool> = users.iter().map(|u| u.mu.iter().any(|&m| m > 0.0)).collect();
    let mut best = f64::NEG_INFINITY;
    let mut idx = vec![0usize; pools.len()];
    loop {
        let mut rates = vec![0.0; users.len()];
        for (p, (members, k, supply)) in pools.iter().enumerate() {
            let split = &options[p][idx[p]];
            for (q, &u) in members.iter().enumerate() {
                rates[u] += supply * split[q] as f64 / steps as f64 * users[u].mu[*k];
            }
        }
        let value: f64 = (0..users.len())
            .filter(|&u| live[u])
            .map(|u| alpha_fair(rates[u], alpha))
            .sum();
        best = best.max(value);
        let mut p = 0;
        loop {
            if p == pools.len() {
                return Ok(if users.is_empty() { 0.0 } else { best });
            }
            idx[p] += 1;
            if idx[p] < options[p].len() {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridBid {
    pub bid: Bid,
    pub utility: f64,
}

/// Best bid on a grid over the player's reciprocity simplex (`steps` units of share).
pub fn greedy_bid_by_grid(
    player: usize,
    b0: &AllocationPattern,
    table: &SpectralEfficiencyTable,
    alpha: f64,
    steps: usize,
) -> Result<GridBid> {
    let n = b0.n_players();
    let subsets = subsets_containing(player, n)?;
    let count = binomial((steps + subsets.len() - 1) as u64, (subsets.len() - 1) as u64);
    if count > GRID_LIMIT / 100 {
        return Err(Error::invalid(format!("bid grid of {count} points is too large")));
    }
    let share = 1.0 / n as f64;
    let mut best: Option<GridBid> = None;
    for split in compositions(steps, subsets.len()) {
        let vals: Vec<f64> = subsets
            .iter()
            .zip(&split)
            .map(|(s, &q)| q as f64 / steps as f64 * share * s.len() as f64)
            .collect();
        let bid = Bid::new(player, n, &vals)?;
        let mut pattern = b0.clone();
        let mut values = pattern.values().to_vec();
        for (s, v) in bid.entries() {
            values[s.index()] = v;
        }
        pattern = AllocationPattern::new(n, values)?;
        let utility = evaluate(player, &pattern, table, alpha)?.value;
        if best.as_ref().is_none_or(|b| utility > b.utility) {
            best = Some(GridBid { bid, utility });
        }
    }
    best.ok_or_else(|| Error::Internal("empty bid grid".into()))
}

/// A random admissible bid: shares `a_S/|S|` uniform on the simplex of mass `1/N`.
pub fn random_bid<R: Rng + ?Sized>(player: usize, n: usize, rng: &mut R) -> Result<Bid> {
    let subsets = subsets_containing(player, n)?;
    let w: Vec<f64> = subsets.iter().map(|_| Exp1.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    let vals: Vec<f64> = subsets
        .iter()
        .zip(&w)
        .map(|(s, x)| x / total / n as f64 * s.len() as f64)
        .collect();
    Bid::new(player, n, &vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::{default_pattern, DefaultKind};
    use crate::scheduler::TableUser;
    use approx::assert_abs_diff_eq;

    #[test]
    fn vertex_oracle_golden() {
        let b0 = default_pattern(DefaultKind::Mrg, 2).unwrap();
        let s = SubsetId::from_players;
        let bids = [
            Bid::from_entries(0, 2, &[(s(&[0]), 0.3), (s(&[0, 1]), 0.4)]).unwrap(),
            Bid::from_entries(1, 2, &[(s(&[1]), 0.1), (s(&[0, 1]), 0.8)]).unwrap(),
        ];
        let r = resolve_by_vertices(&bids, &b0).unwrap();
        assert_abs_diff_eq!(r.objective, 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(r.pattern.get(s(&[0, 1])), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn grid_equal_split() {
        let t = SpectralEfficiencyTable::new(
            0,
            2,
            vec![
                TableUser {
                    serving_tx: 0,
                    mu: vec![2.0, 0.0],
                },
                TableUser {
                    serving_tx: 0,
                    mu: vec![4.0, 0.0],
                },
            ],
        )
        .unwrap();
        let b = AllocationPattern::from_entries(2, &[(SubsetId::singleton(0), 1.0)]).unwrap();
        assert_abs_diff_eq!(utility_by_grid(&b, &t, 1.0, 1000).unwrap(), 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(4, 3).len(), binomial(6, 2) as usize);
        assert_eq!(choose(5, 2).len(), 10);
    }
}
