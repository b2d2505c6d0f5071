mod common;

use common::{career_scenario, check_regen_split, check_walk, random_config};
use playtest_core::experiments::{Accumulator, AggregateStats};
use playtest_core::{parse_tuning, Game, ScenarioOverrides};
use proptest::prelude::*;

fn desk_base() -> Game {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/desk_base.json");
    Game::new(parse_tuning(&std::fs::read_to_string(path).unwrap()).unwrap()).unwrap()
}

fn random_game(seed: u64) -> Game {
    Game::new(parse_tuning(&random_config(seed)).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn random_configs_keep_invariants(seed in 0u64..400, choices in prop::collection::vec(any::<u16>(), 0..80)) {
        let game = random_game(seed);
        let root = game.initial_sim(&career_scenario()).unwrap();
        check_walk(&game, root, &choices).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn desk_walks_keep_invariants(
        career in prop::option::of(0usize..4),
        grant in any::<bool>(),
        choices in prop::collection::vec(any::<u16>(), 0..150),
    ) {
        let game = desk_base();
        let sc = ScenarioOverrides {
            career: career.map(|i| game.careers()[i].name.clone()),
            grant_objects: grant,
            ..Default::default()
        };
        let root = game.initial_sim(&sc).unwrap();
        check_walk(&game, root, &choices).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn regeneration_splits_exactly(
        seed in 0u64..400,
        start in 0u32..=6,
        a in 0u64..50,
        b in 0u64..50,
    ) {
        check_regen_split(&random_game(seed), start, a, b).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn accumulator_merge_matches_one_batch(
        xs in prop::collection::vec(0u64..1_000_000, 1..60),
        ys in prop::collection::vec(0u64..1_000_000, 1..60),
    ) {
        let mut a = Accumulator::default();
        xs.iter().for_each(|&v| a.push(v));
        let mut b = Accumulator::default();
        ys.iter().for_each(|&v| b.push(v));
        a.merge(&b);
        let all: Vec<u64> = xs.iter().chain(&ys).copied().collect();
        let merged = a.finish("k").unwrap();
        prop_assert_eq!(&merged, &AggregateStats::from_values("k", all.iter().copied()).unwrap());
        prop_assert!(merged.min <= merged.mean && merged.mean <= merged.max);
        prop_assert!(merged.variance >= 0.0);
        prop_assert_eq!(merged.count, all.len() as u64);
        // two-pass reference
        let mean = all.iter().sum::<u64>() as f64 / all.len() as f64;
        let var = all.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / all.len() as f64;
        prop_assert!((merged.variance - var).abs() <= 1e-6 * var.max(1.0));
    }
}
