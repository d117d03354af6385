mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;
use sharing_game::allocation::{default_pattern, sample_feasible, uniform_interior, DefaultKind};
use sharing_game::oracle::{greedy_bid_by_grid, utility_by_grid};
use sharing_game::scheduler::{
    evaluate, finite_difference_gradient, utility_supergradient, SpectralEfficiencyTable, TableUser,
};
use sharing_game::strategy::{greedy_bid, restricted_greedy_bid, utility, StrategyProblem};
use sharing_game::subset::{nonempty_subsets, SubsetId};
use sharing_game::AllocationPattern;

fn alpha_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(0.5), Just(1.0), Just(2.0)]
}

fn interior(n: usize, seed: u64) -> AllocationPattern {
    let b = sample_feasible(n, 3, &mut common::rng(seed)).unwrap();
    b.mix(&uniform_interior(n).unwrap(), 0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn utility_is_concave(
        n in 2usize..=4,
        users in 1usize..=5,
        txs in 1usize..=2,
        alpha in alpha_strategy(),
        theta in 0.0f64..=1.0,
        seed in any::<u64>(),
    ) {
        let t = common::random_table(0, n, users, txs, seed);
        let mut rng = common::rng(seed ^ 9);
        let b1 = sample_feasible(n, 3, &mut rng).unwrap();
        let b2 = sample_feasible(n, 3, &mut rng).unwrap();
        let g1 = utility(0, &b1, &t, alpha).unwrap();
        let g2 = utility(0, &b2, &t, alpha).unwrap();
        let gm = utility(0, &b1.mix(&b2, theta), &t, alpha).unwrap();
        let chord = theta * g1 + (1.0 - theta) * g2;
        prop_assert!(chord == f64::NEG_INFINITY || gm >= chord - 1e-6, "{gm} < {chord}");
    }

    #[test]
    fn moving_to_a_smaller_subset_never_hurts(
        users in 1usize..=5,
        txs in 1usize..=2,
        alpha in alpha_strategy(),
        pick in any::<u8>(),
        seed in any::<u64>(),
    ) {
        let n = 3;
        let t = common::random_table(1, n, users, txs, seed);
        let shared: Vec<SubsetId> = t.subsets().iter().copied().filter(|s| s.len() > 1).collect();
        let big = shared[pick as usize % shared.len()];
        let smaller: Vec<SubsetId> = t.subsets().iter().copied().filter(|s| *s != big && s.is_subset_of(big)).collect();
        let small = smaller[(pick as usize / 3) % smaller.len()];
        let b = interior(n, seed);
        let mut values = b.values().to_vec();
        values[big.index()] -= 0.01;
        values[small.index()] += 0.01;
        let moved = AllocationPattern::new(n, values).unwrap();
        let before = utility(1, &b, &t, alpha).unwrap();
        let after = utility(1, &moved, &t, alpha).unwrap();
        prop_assert!(after >= before - 1e-9 * before.abs().max(1.0));
    }

    #[test]
    fn utility_ignores_subsets_without_the_player(
        users in 1usize..=4,
        alpha in alpha_strategy(),
        scale in 0.0f64..=3.0,
        seed in any::<u64>(),
    ) {
        let n = 3;
        let t = common::random_table(0, n, users, 1, seed);
        let b = interior(n, seed);
        let mut values = b.values().to_vec();
        for s in nonempty_subsets(n).filter(|s| !s.contains(0)) {
            values[s.index()] *= scale;
        }
        let other = AllocationPattern::new(n, values).unwrap();
        prop_assert_eq!(utility(0, &b, &t, alpha).unwrap(), utility(0, &other, &t, alpha).unwrap());
    }

    #[test]
    fn allocation_meets_supplies(
        n in 2usize..=4,
        users in 1usize..=6,
        txs in 1usize..=3,
        alpha in alpha_strategy(),
        seed in any::<u64>(),
    ) {
        let t = common::random_table(0, n, users, txs, seed);
        let b = sample_feasible(n, 3, &mut common::rng(seed)).unwrap();
        let r = evaluate(0, &b, &t, alpha).unwrap();
        for (k, &s) in r.allocation.subsets.iter().enumerate() {
            for v in 0..txs.min(users) {
                let total: f64 = (0..users).filter(|u| u % txs == v).map(|u| r.allocation.rows[u][k]).sum();
                prop_assert!((total - b.get(s)).abs() <= 1e-8, "tx {v} subset {s}: {total} vs {}", b.get(s));
            }
        }
        prop_assert!(r.allocation.rows.iter().flatten().all(|&w| w >= -1e-10));
        let from_rows: f64 = r.rates.iter().map(|&x| sharing_game::scheduler::alpha_fair_value(x, alpha)).sum();
        prop_assert!((from_rows - r.value).abs() <= 1e-9 * r.value.abs().max(1.0));
    }

    #[test]
    fn supergradient_matches_finite_differences(
        n in 2usize..=3,
        users in 1usize..=4,
        txs in 1usize..=2,
        alpha in alpha_strategy(),
        seed in any::<u64>(),
    ) {
        let t = common::random_table(0, n, users, txs, seed);
        let b = interior(n, seed);
        let g = utility_supergradient(0, &b, &t, alpha).unwrap();
        let fd = finite_difference_gradient(0, &b, &t, alpha, 1e-6).unwrap();
        for (a, e) in g.iter().zip(&fd) {
            prop_assert!((a - e).abs() <= 1e-4 * e.abs().max(1e-8), "{a} vs {e}");
        }
    }

    #[test]
    fn proportional_fairness_is_scale_free(users in 1usize..=5, seed in any::<u64>(), c in 0.1f64..=10.0) {
        let n = 2;
        let t = common::random_table(0, n, users, 2, seed);
        let b = interior(n, seed);
        let base = evaluate(0, &b, &t, 1.0).unwrap();
        let scaled = evaluate(0, &b, &t.scaled(c), 1.0).unwrap();
        prop_assert!((scaled.value - base.value - users as f64 * c.ln()).abs() <= 1e-8);
        for (r0, r1) in base.allocation.rows.iter().zip(&scaled.allocation.rows) {
            for (w0, w1) in r0.iter().zip(r1) {
                prop_assert!((w0 - w1).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn bids_are_admissible_and_no_worse_than_default(
        n in 2usize..=3,
        users in 1usize..=4,
        alpha in prop_oneof![Just(0.5), Just(1.0), Just(2.0)],
        kind in prop_oneof![Just(DefaultKind::Mrg), Just(DefaultKind::Rpg)],
        seed in any::<u64>(),
    ) {
        let t = common::random_table(0, n, users, 2, seed);
        let b0 = default_pattern(kind, n).unwrap();
        let problem = StrategyProblem { player: 0, b0: &b0, table: &t, alpha, restriction: None };
        let bid = greedy_bid(&problem).unwrap();
        prop_assert!(bid.is_admissible(1e-9));
        let gained = utility(0, &common::with_entries(&b0, bid.entries()), &t, alpha).unwrap();
        let stay = utility(0, &b0, &t, alpha).unwrap();
        prop_assert!(gained >= stay - 1e-7 * stay.abs().max(1.0));

        let shared = SubsetId::full(n);
        let restricted = restricted_greedy_bid(&StrategyProblem { restriction: Some(shared), ..problem }).unwrap();
        prop_assert!(restricted.is_admissible(1e-9));
        // Only the singleton and the chosen subset may move.
        for (s, v) in restricted.entries() {
            if s != shared && s != SubsetId::singleton(0) {
                prop_assert!((v - b0.get(s)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn bid_is_unchanged_by_scaling_at_alpha_one(users in 1usize..=4, seed in any::<u64>(), c in 0.2f64..=5.0) {
        let n = 2;
        let t = common::random_table(0, n, users, 2, seed);
        let b0 = default_pattern(DefaultKind::Mrg, n).unwrap();
        let problem = StrategyProblem { player: 0, b0: &b0, table: &t, alpha: 1.0, restriction: None };
        let a = greedy_bid(&problem).unwrap();
        let scaled = t.scaled(c);
        let b = greedy_bid(&StrategyProblem { table: &scaled, ..problem }).unwrap();
        for ((_, x), (_, y)) in a.entries().zip(b.entries()) {
            prop_assert!((x - y).abs() <= 1e-5, "{x} vs {y}");
        }
    }
}

#[test]
fn equal_split_matches_grid() {
    let t = SpectralEfficiencyTable::new(
        0,
        2,
        vec![
            TableUser { serving_tx: 0, mu: vec![2.0, 1.0] },
            TableUser { serving_tx: 0, mu: vec![4.0, 1.0] },
        ],
    )
    .unwrap();
    let b = AllocationPattern::from_entries(2, &[(SubsetId::singleton(0), 1.0)]).unwrap();
    let r = evaluate(0, &b, &t, 1.0).unwrap();
    assert_relative_eq!(r.value, 2f64.ln(), epsilon = 1e-10);
    assert_relative_eq!(r.allocation.rows[0][0], 0.5, epsilon = 1e-8);
    assert_relative_eq!(utility_by_grid(&b, &t, 1.0, 1000).unwrap(), r.value, epsilon = 1e-12);
}

#[test]
fn doubling_efficiencies_adds_log_two_per_user() {
    let t = common::random_table(0, 3, 4, 2, 11);
    let b = interior(3, 11);
    let base = evaluate(0, &b, &t, 1.0).unwrap();
    let doubled = evaluate(0, &b, &t.scaled(2.0), 1.0).unwrap();
    assert_relative_eq!(doubled.value - base.value, 4.0 * 2f64.ln(), epsilon = 1e-9);
}

#[test]
fn scheduling_agrees_with_grid_search() {
    for seed in 0..30u64 {
        let n = 2 + (seed % 2) as usize;
        let t = common::random_table(0, n, 2, 1, seed);
        let b = sample_feasible(n, 3, &mut common::rng(seed)).unwrap();
        for alpha in [0.0, 0.5, 1.0, 2.0] {
            let exact = evaluate(0, &b, &t, alpha).unwrap().value;
            // One split per subset, so the grid has (steps + 1)^|P_0| points.
            let (steps, tol) = if n == 2 { (400, 1e-3) } else { (24, 5e-3) };
            let grid = utility_by_grid(&b, &t, alpha, steps).unwrap();
            assert!(grid <= exact + 1e-9, "seed {seed} α {alpha}: grid {grid} above {exact}");
            assert!(
                (exact - grid) <= tol * exact.abs().max(1.0),
                "seed {seed} α {alpha}: grid {grid} vs {exact}"
            );
        }
    }
}

#[test]
fn greedy_bid_agrees_with_grid_search() {
    for seed in 0..12u64 {
        let t = common::random_table(0, 2, 1 + (seed % 3) as usize, 2, seed);
        let kind = if seed % 2 == 0 { DefaultKind::Mrg } else { DefaultKind::Rpg };
        let b0 = default_pattern(kind, 2).unwrap();
        for alpha in [0.5, 1.0, 2.0] {
            let problem = StrategyProblem { player: 0, b0: &b0, table: &t, alpha, restriction: None };
            let bid = greedy_bid(&problem).unwrap();
            let value = utility(0, &common::with_entries(&b0, bid.entries()), &t, alpha).unwrap();
            let grid = greedy_bid_by_grid(0, &b0, &t, alpha, 2000).unwrap();
            assert!(
                value >= grid.utility - 1e-6 * grid.utility.abs().max(1.0),
                "seed {seed} α {alpha}: bid {value} below grid {}",
                grid.utility
            );
        }
    }
}

#[test]
fn full_sharing_without_interference_and_none_when_useless() {
    let clean = SpectralEfficiencyTable::new(0, 2, vec![TableUser { serving_tx: 0, mu: vec![3.0, 3.0] }]).unwrap();
    let b0 = default_pattern(DefaultKind::Mrg, 2).unwrap();
    let problem = StrategyProblem { player: 0, b0: &b0, table: &clean, alpha: 1.0, restriction: None };
    let bid = greedy_bid(&problem).unwrap();
    assert_relative_eq!(bid.get(SubsetId::full(2)).unwrap(), 1.0, epsilon = 1e-6);
    let grid = greedy_bid_by_grid(0, &b0, &clean, 1.0, 1000).unwrap();
    assert_relative_eq!(grid.bid.get(SubsetId::full(2)).unwrap(), 1.0, epsilon = 1e-12);

    let jammed = SpectralEfficiencyTable::new(0, 2, vec![TableUser { serving_tx: 0, mu: vec![3.0, 0.0] }]).unwrap();
    let bid = greedy_bid(&StrategyProblem { table: &jammed, ..problem }).unwrap();
    assert_relative_eq!(bid.get(SubsetId::singleton(0)).unwrap(), 0.5, epsilon = 1e-6);
    let grid = greedy_bid_by_grid(0, &b0, &jammed, 1.0, 1000).unwrap();
    assert_relative_eq!(grid.bid.get(SubsetId::singleton(0)).unwrap(), 0.5, epsilon = 1e-12);
}

/// A drop where the last Newton step of the joint bid program used to turn non-finite.
#[test]
fn greedy_bid_survives_degenerate_final_step() {
    let rows = [
        (2, 1.6938959297042144, 0.00012084588438464328),
        (0, 6.521233979519856, 0.0173536610068837),
        (0, 17.571441184861584, 10.898327873954791),
        (0, 14.267194308946653, 9.912403581857088),
        (0, 16.30412106056491, 5.850622276988426),
        (0, 14.916123196514201, 10.816676905457559),
        (0, 25.253453791163473, 4.783524889602454),
        (2, 18.596297449677365, 12.48113411252344),
        (2, 14.798725432020195, 8.303292797676121),
        (2, 19.454797666043163, 12.978495213428182),
        (2, 11.964377529213534, 5.15646961631415),
        (0, 19.52255047725636, 7.736335670554271),
        (2, 10.637053783566989, 5.642261692086446),
    ];
    let users = rows
        .iter()
        .map(|&(tx, solo, shared)| TableUser { serving_tx: tx, mu: vec![solo, shared] })
        .collect();
    let t = SpectralEfficiencyTable::new(0, 2, users).unwrap();
    let b0 = default_pattern(DefaultKind::Mrg, 2).unwrap();
    let problem = StrategyProblem { player: 0, b0: &b0, table: &t, alpha: 1.0, restriction: None };
    let bid = greedy_bid(&problem).unwrap();
    assert!(bid.is_admissible(1e-9));
    let value = utility(0, &common::with_entries(&b0, bid.entries()), &t, 1.0).unwrap();
    let grid = greedy_bid_by_grid(0, &b0, &t, 1.0, 2000).unwrap();
    assert!(value >= grid.utility - 1e-6 * grid.utility.abs());
}

/// Supplies over seven decades and efficiencies over five, with some of both at zero.
#[test]
fn scheduling_handles_badly_scaled_supplies() {
    use rand::Rng;
    let mut rng = common::rng(17);
    let decade = |rng: &mut rand_chacha::ChaCha8Rng, lo: f64, hi: f64, zero: f64| {
        if rng.random_bool(zero) {
            0.0
        } else {
            10f64.powf(rng.random_range(lo..hi))
        }
    };
    for case in 0..400 {
        let n = rng.random_range(2..=4);
        let users = rng.random_range(1..=12);
        let txs = rng.random_range(1..=3);
        let subsets: Vec<SubsetId> = nonempty_subsets(n).filter(|s| s.contains(0)).collect();
        let rows = (0..users)
            .map(|u| TableUser {
                serving_tx: u % txs,
                mu: subsets.iter().map(|_| decade(&mut rng, -4.0, 1.5, 0.1)).collect(),
            })
            .collect();
        let t = SpectralEfficiencyTable::new(0, n, rows).unwrap();
        let mut values = vec![0.0; 1 << n];
        for s in nonempty_subsets(n) {
            values[s.index()] = decade(&mut rng, -7.0, 0.0, 0.15);
        }
        let b = AllocationPattern::new(n, values).unwrap();
        for alpha in [0.0, 0.5, 1.0, 2.0] {
            let r = evaluate(0, &b, &t, alpha).unwrap_or_else(|e| panic!("case {case} α {alpha}: {e}"));
            for (k, &s) in r.allocation.subsets.iter().enumerate() {
                for v in 0..txs.min(users) {
                    let used: f64 = (v..users).step_by(txs).map(|u| r.allocation.rows[u][k]).sum();
                    let supply = b.get(s);
                    assert!(
                        (used - supply).abs() <= 1e-6 * supply || (supply <= 1e-12 && used == 0.0),
                        "case {case} α {alpha} tx {v} subset {s}: {used:e} vs {supply:e}"
                    );
                }
            }
        }
    }
}

/// A tiny useful supply next to a large useless one.
#[test]
fn tiny_supply_beside_a_useless_one() {
    let t = SpectralEfficiencyTable::new(0, 2, vec![TableUser { serving_tx: 0, mu: vec![3.0, 0.0] }]).unwrap();
    let b = AllocationPattern::from_entries(2, &[(SubsetId::singleton(0), 5e-4), (SubsetId::full(2), 0.999)]).unwrap();
    assert_relative_eq!(evaluate(0, &b, &t, 1.0).unwrap().value, (3.0 * 5e-4f64).ln(), epsilon = 1e-9);
}
