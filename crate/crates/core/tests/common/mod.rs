#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sharing_game::scheduler::{SpectralEfficiencyTable, TableUser};
use sharing_game::subset::subsets_containing;
use sharing_game::AllocationPattern;

/// Random table for `player` with users spread over `txs` transmitters.
///
/// Each other player `m` in the subset scales a user's efficiency by a factor in
/// `(0.2, 1]`, so efficiencies never grow when interferers are added.
pub fn random_table(player: usize, n: usize, users: usize, txs: usize, seed: u64) -> SpectralEfficiencyTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subsets = subsets_containing(player, n).unwrap();
    let rows = (0..users)
        .map(|u| {
            let base: f64 = rng.random_range(0.5..6.0);
            let damp: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..=1.0)).collect();
            TableUser {
                serving_tx: u % txs,
                mu: subsets
                    .iter()
                    .map(|s| s.members().filter(|&m| m != player).map(|m| damp[m]).product::<f64>() * base)
                    .collect(),
            }
        })
        .collect();
    SpectralEfficiencyTable::new(player, n, rows).unwrap()
}

/// Overwrites `b` with `values` on the coordinates a bid or restriction touches.
pub fn with_entries(b: &AllocationPattern, entries: impl Iterator<Item = (sharing_game::SubsetId, f64)>) -> AllocationPattern {
    let mut values = b.values().to_vec();
    for (s, v) in entries {
        values[s.index()] = v;
    }
    AllocationPattern::new(b.n_players(), values).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
