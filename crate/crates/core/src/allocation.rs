//! Allocation patterns over player subsets, reciprocity, bids and bid boxes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::simplex::BoundedLp;
use crate::subset::{check_players, nonempty_subsets, subset_count, subsets_containing, SubsetId};

/// Default absolute tolerance for feasibility checks.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Which default usage pattern the game starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DefaultKind {
    /// Mutual renting: every player owns `1/N` privately.
    Mrg,
    /// Resource pool: the whole unit is shared by everybody.
    Rpg,
}

/// Fractions of the unit resource, dense over all `2^N` subsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationPattern {
    n_players: usize,
    values: Vec<f64>,
}

impl AllocationPattern {
    pub fn new(n_players: usize, mut values: Vec<f64>) -> Result<Self> {
        check_players(n_players)?;
        if values.len() != subset_count(n_players) {
            return Err(Error::invalid(format!(
                "pattern for {n_players} players needs {} entries, got {}",
                subset_count(n_players),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("pattern entries must be finite"));
        }
        values[0] = 0.0;
        Ok(Self { n_players, values })
    }

    pub fn zeros(n_players: usize) -> Result<Self> {
        Self::new(n_players, vec![0.0; subset_count(n_players)])
    }

    /// Build from `(subset, value)` pairs; unspecified subsets are zero.
    pub fn from_entries(n_players: usize, entries: &[(SubsetId, f64)]) -> Result<Self> {
        let mut values = vec![0.0; subset_count(n_players)];
        for &(s, v) in entries {
            if s.index() >= values.len() {
                return Err(Error::invalid(format!("subset {s} out of range")));
            }
            values[s.index()] = v;
        }
        Self::new(n_players, values)
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    #[inline]
    pub fn get(&self, s: SubsetId) -> f64 {
        self.values[s.index()]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn set(&mut self, s: SubsetId, v: f64) {
        if !s.is_empty() {
            self.values[s.index()] = v;
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `Σ_S |self_S − other_S|`.
    pub fn l1_distance(&self, other: &AllocationPattern) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }

    /// Convex combination `θ·self + (1−θ)·other`.
    pub fn mix(&self, other: &AllocationPattern, theta: f64) -> AllocationPattern {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| theta * a + (1.0 - theta) * b)
            .collect();
        AllocationPattern {
            n_players: self.n_players,
            values,
        }
    }

    /// Restriction of this pattern to the subsets containing `player`, as a bid.
    pub fn restriction(&self, player: usize) -> Bid {
        let values = (0..self.values.len())
            .map(|i| SubsetId(i as u32))
            .map(|s| s.contains(player).then(|| self.get(s)))
            .collect();
        Bid {
            player,
            n_players: self.n_players,
            values,
        }
    }
}

/// The default usage pattern for `kind`.
pub fn default_pattern(kind: DefaultKind, n_players: usize) -> Result<AllocationPattern> {
    check_players(n_players)?;
    let mut b = AllocationPattern::zeros(n_players)?;
    match kind {
        DefaultKind::Mrg => {
            for n in 0..n_players {
                b.set(SubsetId::singleton(n), 1.0 / n_players as f64);
            }
        }
        DefaultKind::Rpg => b.set(SubsetId::full(n_players), 1.0),
    }
    Ok(b)
}

/// Per-player favor balance `Σ_{S∋n} b_S/|S|`.
pub fn reciprocity_shares(b: &AllocationPattern) -> Vec<f64> {
    let mut shares = vec![0.0; b.n_players];
    for s in nonempty_subsets(b.n_players) {
        let v = b.get(s) / s.len() as f64;
        for n in s.members() {
            shares[n] += v;
        }
    }
    shares
}

/// Non-negativity plus instantaneous reciprocity, both within `tol`.
pub fn is_feasible(b: &AllocationPattern, tol: f64) -> bool {
    let target = 1.0 / b.n_players as f64;
    b.values.iter().all(|&v| v >= -tol)
        && reciprocity_shares(b)
            .iter()
            .all(|share| (share - target).abs() <= tol)
}

/// A player's preferred pattern; void (`None`) on subsets not containing the player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bid {
    player: usize,
    n_players: usize,
    values: Vec<Option<f64>>,
}

impl Bid {
    /// Build from values on `P_n`, given in the order of [`subsets_containing`].
    pub fn new(player: usize, n_players: usize, on_own_subsets: &[f64]) -> Result<Self> {
        check_players(n_players)?;
        let own = subsets_containing(player, n_players)?;
        if own.len() != on_own_subsets.len() {
            return Err(Error::invalid(format!(
                "bid of player {player} needs {} values, got {}",
                own.len(),
                on_own_subsets.len()
            )));
        }
        let mut values = vec![None; subset_count(n_players)];
        for (s, &v) in own.iter().zip(on_own_subsets) {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!(
                    "bid value on {s} must be finite and non-negative, got {v}"
                )));
            }
            values[s.index()] = Some(v);
        }
        Ok(Self {
            player,
            n_players,
            values,
        })
    }

    /// Build from `(subset, value)` pairs; every subset containing the player must appear.
    pub fn from_entries(player: usize, n_players: usize, entries: &[(SubsetId, f64)]) -> Result<Self> {
        let own = subsets_containing(player, n_players)?;
        let mut vals = Vec::with_capacity(own.len());
        for s in &own {
            let v = entries
                .iter()
                .find(|(t, _)| t == s)
                .map(|&(_, v)| v)
                .ok_or_else(|| Error::invalid(format!("bid of player {player} misses {s}")))?;
            vals.push(v);
        }
        if entries.iter().any(|(s, _)| !s.contains(player)) {
            return Err(Error::invalid(format!(
                "bid of player {player} names a subset without that player"
            )));
        }
        Self::new(player, n_players, &vals)
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    /// `None` is the void value for subsets not containing the bidder.
    #[inline]
    pub fn get(&self, s: SubsetId) -> Option<f64> {
        self.values[s.index()]
    }

    /// Iterate `(S, a_S)` over the subsets containing the bidder.
    pub fn entries(&self) -> impl Iterator<Item = (SubsetId, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (SubsetId(i as u32), v)))
    }

    /// `Σ_{S∈P_n} a_S/|S|`; equals `1/N` for admissible bids.
    pub fn reciprocity_share(&self) -> f64 {
        self.entries().map(|(s, v)| v / s.len() as f64).sum()
    }

    pub fn is_admissible(&self, tol: f64) -> bool {
        (self.reciprocity_share() - 1.0 / self.n_players as f64).abs() <= tol
            && self.entries().all(|(_, v)| v >= -tol)
    }
}

/// Per-subset interval `[min(a_S, b0_S), max(a_S, b0_S)]` on `P_n`; unconstrained elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidBox {
    player: usize,
    intervals: Vec<Option<(f64, f64)>>,
}

impl BidBox {
    pub fn player(&self) -> usize {
        self.player
    }

    /// `None` means unconstrained.
    pub fn interval(&self, s: SubsetId) -> Option<(f64, f64)> {
        self.intervals[s.index()]
    }

    pub fn contains(&self, b: &AllocationPattern, tol: f64) -> bool {
        self.intervals.iter().enumerate().all(|(i, iv)| match iv {
            Some((lo, hi)) => {
                let v = b.values[i];
                v >= lo - tol && v <= hi + tol
            }
            None => true,
        })
    }
}

pub fn bid_box(bid: &Bid, b0: &AllocationPattern) -> Result<BidBox> {
    if bid.n_players != b0.n_players {
        return Err(Error::invalid("bid and default pattern differ in player count"));
    }
    let intervals = bid
        .values
        .iter()
        .enumerate()
        .map(|(i, a)| a.map(|a| (a.min(b0.values[i]), a.max(b0.values[i]))))
        .collect();
    Ok(BidBox {
        player: bid.player,
        intervals,
    })
}

/// Sample a random feasible pattern as a random convex combination of LP vertices of the
/// feasible polytope (vertices found by maximizing random linear objectives).
pub fn sample_feasible<R: Rng + ?Sized>(
    n_players: usize,
    vertices: usize,
    rng: &mut R,
) -> Result<AllocationPattern> {
    check_players(n_players)?;
    let vars: Vec<SubsetId> = nonempty_subsets(n_players).collect();
    let mut lp = BoundedLp::new(vars.len());
    for j in 0..vars.len() {
        lp.set_bounds(j, 0.0, f64::INFINITY);
    }
    let rhs = 1.0 / n_players as f64;
    for n in 0..n_players {
        let row: Vec<(usize, f64)> = vars
            .iter()
            .enumerate()
            .filter(|(_, s)| s.contains(n))
            .map(|(j, s)| (j, 1.0 / s.len() as f64))
            .collect();
        lp.add_row(&row, rhs);
    }
    let mut acc = vec![0.0; subset_count(n_players)];
    let mut total_weight = 0.0;
    for _ in 0..vertices.max(1) {
        for j in 0..vars.len() {
            lp.set_objective(j, rng.random_range(-1.0..1.0));
        }
        let sol = lp.maximize()?;
        let w: f64 = rng.random_range(0.0..1.0_f64).max(1e-3);
        total_weight += w;
        for (j, s) in vars.iter().enumerate() {
            acc[s.index()] += w * sol.x[j].max(0.0);
        }
    }
    for v in &mut acc {
        *v /= total_weight;
    }
    AllocationPattern::new(n_players, acc)
}

/// The symmetric interior point with equal mass on every non-empty subset.
pub fn uniform_interior(n_players: usize) -> Result<AllocationPattern> {
    check_players(n_players)?;
    let denom: f64 = nonempty_subsets(n_players)
        .filter(|s| s.contains(0))
        .map(|s| 1.0 / s.len() as f64)
        .sum();
    let c = 1.0 / (n_players as f64 * denom);
    let mut values = vec![c; subset_count(n_players)];
    values[0] = 0.0;
    AllocationPattern::new(n_players, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two(b1: f64, b2: f64, b12: f64) -> AllocationPattern {
        AllocationPattern::from_entries(
            2,
            &[(SubsetId(1), b1), (SubsetId(2), b2), (SubsetId(3), b12)],
        )
        .unwrap()
    }

    #[test]
    fn mrg_and_rpg_defaults() {
        let mrg = default_pattern(DefaultKind::Mrg, 2).unwrap();
        assert_eq!(mrg.values(), &[0.0, 0.5, 0.5, 0.0]);
        let rpg = default_pattern(DefaultKind::Rpg, 2).unwrap();
        assert_eq!(rpg.values(), &[0.0, 0.0, 0.0, 1.0]);
        let mrg4 = default_pattern(DefaultKind::Mrg, 4).unwrap();
        for n in 0..4 {
            assert_eq!(mrg4.get(SubsetId::singleton(n)), 0.25);
        }
        assert_abs_diff_eq!(mrg4.total_mass(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn defaults_reject_small_and_large() {
        assert!(matches!(
            default_pattern(DefaultKind::Mrg, 1),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            default_pattern(DefaultKind::Rpg, 11),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn defaults_always_feasible() {
        for n in 2..=10 {
            for kind in [DefaultKind::Mrg, DefaultKind::Rpg] {
                assert!(is_feasible(&default_pattern(kind, n).unwrap(), FEASIBILITY_TOL));
            }
        }
    }

    #[test]
    fn feasibility_examples() {
        assert!(is_feasible(&two(0.3, 0.3, 0.4), 1e-9));
        assert!(!is_feasible(&two(0.6, 0.4, 0.0), 1e-9));
        assert!(!is_feasible(&two(-0.1, 0.45, 0.65), 1e-9));
    }

    #[test]
    fn shares_examples() {
        let s = reciprocity_shares(&default_pattern(DefaultKind::Rpg, 3).unwrap());
        for v in s {
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
        }
        let s = reciprocity_shares(&two(0.3, 0.3, 0.4));
        assert_abs_diff_eq!(s[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s[1], 0.5, epsilon = 1e-15);
        assert_eq!(reciprocity_shares(&AllocationPattern::zeros(3).unwrap()), vec![0.0; 3]);
    }

    #[test]
    fn empty_set_is_pinned() {
        let b = AllocationPattern::new(2, vec![0.7, 0.5, 0.5, 0.0]).unwrap();
        assert_eq!(b.get(SubsetId::EMPTY), 0.0);
    }

    #[test]
    fn bid_box_examples() {
        let b0 = default_pattern(DefaultKind::Mrg, 2).unwrap();
        let bid = Bid::from_entries(0, 2, &[(SubsetId(1), 0.3), (SubsetId(3), 0.4)]).unwrap();
        let bx = bid_box(&bid, &b0).unwrap();
        assert_eq!(bx.interval(SubsetId(1)), Some((0.3, 0.5)));
        assert_eq!(bx.interval(SubsetId(3)), Some((0.0, 0.4)));
        assert_eq!(bx.interval(SubsetId(2)), None);

        let up = Bid::from_entries(1, 2, &[(SubsetId(2), 0.0), (SubsetId(3), 1.0)]).unwrap();
        assert_eq!(bid_box(&up, &b0).unwrap().interval(SubsetId(3)), Some((0.0, 1.0)));

        let same = b0.restriction(1);
        let bx = bid_box(&same, &b0).unwrap();
        assert_eq!(bx.interval(SubsetId(2)), Some((0.5, 0.5)));
        assert_eq!(bx.interval(SubsetId(3)), Some((0.0, 0.0)));
    }

    #[test]
    fn bid_validation() {
        assert!(Bid::new(0, 2, &[0.5]).is_err());
        assert!(Bid::new(0, 2, &[0.5, -0.1]).is_err());
        assert!(Bid::from_entries(0, 2, &[(SubsetId(1), 0.5), (SubsetId(2), 0.0)]).is_err());
        let bid = Bid::new(0, 2, &[0.3, 0.4]).unwrap();
        assert!(bid.is_admissible(1e-12));
        assert_eq!(bid.get(SubsetId(2)), None);
    }

    #[test]
    fn sampled_patterns_have_unit_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..=5 {
            for _ in 0..20 {
                let b = sample_feasible(n, 4, &mut rng).unwrap();
                assert!(is_feasible(&b, 1e-9));
                assert_abs_diff_eq!(b.total_mass(), 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn uniform_interior_is_feasible() {
        for n in 2..=6 {
            let b = uniform_interior(n).unwrap();
            assert!(is_feasible(&b, 1e-12));
            assert!(nonempty_subsets(n).all(|s| b.get(s) > 0.0));
        }
    }
}
