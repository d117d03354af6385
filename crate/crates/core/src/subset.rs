//! Player subsets encoded as bit masks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard upper bound on the number of players; patterns are dense over `2^N` subsets.
pub const DEFAULT_MAX_PLAYERS: usize = 10;

/// A subset of players. Bit `n` is set iff player `n` is a member.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubsetId(pub u32);

impl SubsetId {
    pub const EMPTY: SubsetId = SubsetId(0);

    pub fn singleton(player: usize) -> Self {
        SubsetId(1 << player)
    }

    /// The grand coalition of `n_players`.
    pub fn full(n_players: usize) -> Self {
        SubsetId(((1u64 << n_players) - 1) as u32)
    }

    pub fn from_players(players: &[usize]) -> Self {
        SubsetId(players.iter().fold(0, |acc, &p| acc | (1 << p)))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn contains(self, player: usize) -> bool {
        player < 32 && self.0 & (1 << player) != 0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: SubsetId) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn without(self, player: usize) -> Self {
        SubsetId(self.0 & !(1 << player))
    }

    pub fn with(self, player: usize) -> Self {
        SubsetId(self.0 | (1 << player))
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..32).filter(move |p| bits & (1 << p) != 0)
    }
}

impl fmt::Debug for SubsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SubsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, p) in self.members().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

pub(crate) fn check_players(n_players: usize) -> Result<()> {
    if n_players < 2 {
        return Err(Error::invalid(format!(
            "at least two players are required, got {n_players}"
        )));
    }
    if n_players > DEFAULT_MAX_PLAYERS {
        return Err(Error::Config(format!(
            "{n_players} players exceeds the cap of {DEFAULT_MAX_PLAYERS}"
        )));
    }
    Ok(())
}

/// Number of subsets (including the empty set) for `n_players`.
pub fn subset_count(n_players: usize) -> usize {
    1 << n_players
}

/// All non-empty subsets in increasing index order.
pub fn nonempty_subsets(n_players: usize) -> impl Iterator<Item = SubsetId> {
    (1..subset_count(n_players) as u32).map(SubsetId)
}

/// The `2^(N-1)` subsets containing `player`, in increasing index order.
pub fn subsets_containing(player: usize, n_players: usize) -> Result<Vec<SubsetId>> {
    if player >= n_players {
        return Err(Error::invalid(format!(
            "player {player} out of range for {n_players} players"
        )));
    }
    Ok(nonempty_subsets(n_players)
        .filter(|s| s.contains(player))
        .collect())
}

/// Subsets with at least two members that contain `player`.
pub fn shared_subsets_containing(player: usize, n_players: usize) -> Result<Vec<SubsetId>> {
    Ok(subsets_containing(player, n_players)?
        .into_iter()
        .filter(|s| s.len() > 1)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn containing_two_players() {
        let p = subsets_containing(0, 2).unwrap();
        assert_eq!(p, vec![SubsetId(0b01), SubsetId(0b11)]);
    }

    #[test]
    fn containing_counts() {
        let p = subsets_containing(1, 3).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.iter().all(|s| s.contains(1)));
        assert_eq!(subsets_containing(0, 4).unwrap().len(), 8);
    }

    #[test]
    fn containing_out_of_range() {
        assert!(matches!(
            subsets_containing(3, 3),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn membership_and_display() {
        let s = SubsetId::from_players(&[0, 2]);
        assert!(s.contains(0) && !s.contains(1) && s.contains(2));
        assert!(!s.contains(31));
        assert_eq!(s.len(), 2);
        assert_eq!(s.to_string(), "{0,2}");
        assert!(SubsetId::EMPTY.is_empty());
        assert_eq!(SubsetId::full(3), SubsetId(7));
        assert!(SubsetId(0b01).is_subset_of(SubsetId(0b11)));
    }
}
