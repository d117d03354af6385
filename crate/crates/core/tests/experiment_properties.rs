mod common;

use std::collections::BTreeMap;

use sharing_game::allocation::DefaultKind;
use sharing_game::checks::{game_checks, random_scenarios, two_player_games};
use sharing_game::experiment::{emit_outputs, median, run_experiment, ExperimentConfig};
use sharing_game::orchestrator::choose_subset_by_vote;
use sharing_game::orchestrator::GameConfig;
use sharing_game::scenario::{generate_users, ChannelParams, Layout, Preset};
use sharing_game::subset::SubsetId;

/// Kolmogorov-Smirnov distance between a sample and the uniform law on `[lo, hi]`.
fn ks_uniform(mut xs: Vec<f64>, lo: f64, hi: f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = (x - lo) / (hi - lo);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn visiting_users_cover_the_floor_uniformly() {
    let layout = Layout::preset(Preset::FourPlayer, &ChannelParams::default());
    let [x0, x1, y0, y1] = layout.floor;
    let mut rng = common::rng(3);
    let mut points = Vec::new();
    while points.len() < 4000 {
        points.extend(generate_users(&layout, 0, 8.0, 1.0, &mut rng).unwrap());
    }
    let n = points.len() as f64;
    // 1% critical value of the one-sample statistic.
    let critical = 1.63 / n.sqrt();
    assert!(ks_uniform(points.iter().map(|p| p[0]).collect(), x0, x1) < critical);
    assert!(ks_uniform(points.iter().map(|p| p[1]).collect(), y0, y1) < critical);
}

#[test]
fn visiting_share_matches_probability() {
    let layout = Layout::preset(Preset::TwoPlayer, &ChannelParams::default());
    let [x0, x1, y0, y1] = layout.floor;
    let [h0, h1, k0, k1] = layout.home_area(1);
    let outside_floor = 1.0 - (h1 - h0) * (k1 - k0) / ((x1 - x0) * (y1 - y0));
    let vp = 0.5;
    let mut rng = common::rng(4);
    let mut points = Vec::new();
    while points.len() < 20_000 {
        points.extend(generate_users(&layout, 1, 8.0, vp, &mut rng).unwrap());
    }
    let outside = points
        .iter()
        .filter(|p| !(h0..=h1).contains(&p[0]) || !(k0..=k1).contains(&p[1]))
        .count() as f64;
    let n = points.len() as f64;
    let expected = vp * outside_floor;
    let sigma = (expected * (1.0 - expected) / n).sqrt();
    assert!((outside / n - expected).abs() < 5.0 * sigma, "{} vs {expected}", outside / n);
}

#[test]
fn votes_are_drawn_in_proportion_to_counts() {
    let a = SubsetId::from_players(&[0, 1]);
    let b = SubsetId::from_players(&[1, 2]);
    let prefs = [(0, a), (1, a), (2, a), (3, b)];
    let mut rng = common::rng(5);
    let draws = 10_000;
    let hits = (0..draws)
        .filter(|_| choose_subset_by_vote(&prefs, &mut rng).unwrap() == a)
        .count() as f64;
    let sigma = (draws as f64 * 0.75 * 0.25).sqrt();
    assert!((hits - 0.75 * draws as f64).abs() < 5.0 * sigma, "{hits}");
}

#[test]
fn summary_medians_match_rates_file() {
    let config = ExperimentConfig {
        user_draws: Some(3),
        fading_draws: Some(2),
        seed: 77,
        ..ExperimentConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let summary = emit_outputs(&run_experiment(&config).unwrap(), dir.path()).unwrap();
    let mut reader = csv::Reader::from_path(dir.path().join("rates.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let mut columns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.unwrap();
        for (name, value) in headers.iter().zip(record.iter()) {
            if let Some(key) = name.strip_suffix("_rate_bps") {
                columns.entry(key.to_string()).or_default().push(value.parse().unwrap());
            }
        }
    }
    assert_eq!(columns.len(), 4);
    assert_eq!(summary.users, columns["game"].len());
    for (key, values) in &columns {
        let stats = &summary.rates_bps[key];
        let expected = median(values).unwrap();
        assert!((stats.median.unwrap() - expected).abs() <= 1e-9 * expected.abs().max(1.0), "{key}");
    }
}

#[test]
fn games_on_drawn_scenarios() {
    let two = random_scenarios(Preset::TwoPlayer, 6, 8).unwrap();
    let r = two_player_games(&two, &GameConfig::default(), 1e-3).unwrap();
    assert!(r.passed, "{}", r.line());
    let four = random_scenarios(Preset::FourPlayer, 3, 9).unwrap();
    let g = game_checks(&four, &GameConfig::default(), &[DefaultKind::Mrg, DefaultKind::Rpg]).unwrap();
    for c in [&g.convergence, &g.outcomes, &g.baselines] {
        assert!(c.passed, "{}", c.line());
    }
}
