mod common;

use common::naive_pne_exists;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rgg_core::dynamics::{
    brute_force_pne, run_best_response_dynamics, verify_pne, BruteForceConfig, DynamicsConfig, ResponseMode, Schedule,
};
use rgg_core::potential::potential_unweighted;
use rgg_core::random::{random_explicit_space, random_separable_linear_game, random_tabulated, GameShape, TableFlavor};
use rgg_core::{Certificate, CostModel, Game, Player, Profile};

fn first_profile(g: &Game) -> Profile {
    Profile::new(g.strategy_table(100).unwrap().into_iter().map(|l| l[0].clone()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dynamics_descend_the_potential(seed in any::<u64>(), better in any::<bool>(), random in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_separable_linear_game(&mut rng, &GameShape::default()).unwrap();
        let config = DynamicsConfig {
            mode: if better { ResponseMode::Better } else { ResponseMode::Best },
            schedule: if random { Schedule::Random { seed } } else { Schedule::RoundRobin },
            ..DynamicsConfig::default()
        };
        let start = first_profile(&g);
        let trace = run_best_response_dynamics(&g, &start, &config).unwrap();
        prop_assert!(trace.converged);
        let mut p = start.clone();
        let mut pot = potential_unweighted(&g, &p).unwrap();
        for step in &trace.steps {
            p.choices[step.player] = step.new.clone();
            let next = potential_unweighted(&g, &p).unwrap();
            prop_assert!(next < pot);
            prop_assert_eq!(step.delta, rgg_core::Value::Exact(next - pot));
            pot = next;
        }
        prop_assert_eq!(&p, &trace.terminal);
        prop_assert_eq!(verify_pne(&g, &trace.terminal, 100).unwrap(), Certificate::IsPne);
    }

    #[test]
    fn brute_force_agrees_with_naive_search(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let m = rng.gen_range(1..=3);
        let n = rng.gen_range(1..=3);
        let t = random_tabulated(&mut rng, m, n as u32, 4, TableFlavor::Uniform).unwrap();
        let players = (0..n).map(|_| Player::unit(random_explicit_space(&mut rng, m, 3))).collect();
        let g = Game::new(m, players, CostModel::Tabulated(t)).unwrap();
        let naive = naive_pne_exists(&g, 100);
        match brute_force_pne(&g, &BruteForceConfig::default()).unwrap() {
            Certificate::PneFound { profile } => {
                prop_assert_eq!(Some(profile.clone()), naive);
                prop_assert_eq!(verify_pne(&g, &profile, 100).unwrap(), Certificate::IsPne);
            }
            Certificate::NoPneExists { .. } => prop_assert!(naive.is_none()),
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn parallel_search_is_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_separable_linear_game(&mut rng, &GameShape::default()).unwrap();
        let one = brute_force_pne(&g, &BruteForceConfig { jobs: Some(1), ..Default::default() }).unwrap();
        let four = brute_force_pne(&g, &BruteForceConfig { jobs: Some(4), ..Default::default() }).unwrap();
        prop_assert_eq!(one, four);
    }
}
