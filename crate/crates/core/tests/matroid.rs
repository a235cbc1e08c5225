mod common;

use common::q;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rgg_core::matroid::{exchange_decompose, greedy_best_response, GraphEdge, MatroidDesc};
use rgg_core::random::{random_graphic, random_partition, random_uniform};
use rgg_core::{Rational, Strategy};

/// Basis test written from the definitions.
fn is_basis_oracle(desc: &MatroidDesc, set: &[usize]) -> bool {
    match desc {
        MatroidDesc::Uniform { k } => set.len() == *k,
        MatroidDesc::Partition { blocks, quotas } => {
            set.iter().all(|r| blocks.iter().any(|b| b.contains(r)))
                && blocks.iter().zip(quotas).all(|(b, &q)| set.iter().filter(|r| b.contains(r)).count() == q)
        }
        MatroidDesc::Graphic { vertices, edges } => {
            if set.len() + 1 != *vertices {
                return false;
            }
            let mut comp: Vec<usize> = (0..*vertices).collect();
            for &r in set {
                let e: &GraphEdge = edges.iter().find(|e| e.resource == r).unwrap();
                let (a, b) = (comp[e.u], comp[e.v]);
                if a == b {
                    return false;
                }
                for c in comp.iter_mut() {
                    if *c == b {
                        *c = a;
                    }
                }
            }
            true
        }
    }
}

fn oracle_bases(desc: &MatroidDesc, m: usize) -> Vec<Strategy> {
    (0u32..1 << m)
        .map(|mask| (0..m).filter(|&r| mask >> r & 1 == 1).collect::<Vec<_>>())
        .filter(|s| is_basis_oracle(desc, s))
        .map(|s| Strategy::from_support(m, &s).unwrap())
        .collect()
}

fn random_desc(rng: &mut ChaCha8Rng) -> (MatroidDesc, usize) {
    match rng.gen_range(0..3) {
        0 => {
            let m = rng.gen_range(1..=6);
            (random_uniform(rng, m), m)
        }
        1 => {
            let m = rng.gen_range(1..=6);
            (random_partition(rng, m, 3), m)
        }
        _ => {
            let v = rng.gen_range(2..=5);
            let m = rng.gen_range(v - 1..=7);
            (random_graphic(rng, v, m), m)
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumeration_matches_definition(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (desc, m) = random_desc(&mut rng);
        let mut got = desc.enumerate_bases(m, 10_000).unwrap();
        let want = oracle_bases(&desc, m);
        prop_assert!(got.windows(2).all(|w| w[0] < w[1]));
        got.sort();
        let mut want = want;
        want.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn exchange_paths_replay(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (desc, m) = random_desc(&mut rng);
        let bases = desc.enumerate_bases(m, 10_000).unwrap();
        for t in &bases {
            for u in &bases {
                let steps = exchange_decompose(&desc, t, u).unwrap();
                let diff = t.iter_support().filter(|&r| !u.contains(r)).count();
                prop_assert_eq!(steps.len(), diff);
                let mut cur = t.clone();
                for s in &steps {
                    prop_assert!(cur.contains(s.remove) && !cur.contains(s.add));
                    cur = cur.exchanged(s.remove, s.add);
                    prop_assert!(is_basis_oracle(&desc, &cur.support()));
                }
                prop_assert_eq!(&cur, u);
            }
        }
    }

    #[test]
    fn greedy_is_a_minimum_basis(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (desc, m) = random_desc(&mut rng);
        let w: Vec<Rational> = (0..m).map(|_| q(rng.gen_range(-3..=3))).collect();
        let g = greedy_best_response(&desc, m, &w).unwrap();
        let weight = |s: &Strategy| s.iter_support().map(|r| w[r]).sum::<Rational>();
        let bases = oracle_bases(&desc, m);
        let best = bases.iter().map(weight).min().unwrap();
        prop_assert_eq!(weight(&g), best);
        let first = bases.iter().filter(|b| weight(b) == best).min().unwrap();
        prop_assert_eq!(&g, first);
    }
}
