mod common;

use common::q;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rgg_core::characterize::{check_cross_linearity, check_jacobian_symmetry, cross_linearity_report, Violation};
use rgg_core::dynamics::{brute_force_pne, BruteForceConfig};
use rgg_core::gadgets::{
    build_gadget, check_ab_symmetry, copy_index, expected_ab, violation_to_counterexample, AbSymmetry, GadgetLemma,
    GadgetSpec,
};
use rgg_core::random::{random_tabulated, TableFlavor};
use rgg_core::{load_of, Certificate, CostModel, Rational, Tabulated};

fn table(m: usize, bound: u32, f: impl Fn(usize, &[i128]) -> i128) -> Tabulated {
    Tabulated::from_fn(m, bound, vec![(0..m).collect(); m], |r, x| {
        let x: Vec<i128> = x.iter().map(|&v| v as i128).collect();
        q(f(r, &x))
    })
    .unwrap()
}

fn assert_no_pne(c: &Tabulated, v: &Violation) -> GadgetLemma {
    let ce = violation_to_counterexample(&CostModel::Tabulated(c.clone()), v).unwrap();
    assert!(matches!(ce.certificate, Certificate::NoPneExists { .. }), "{:?}", ce.certificate);
    assert!(!ce.symmetry.a_value.same(&ce.symmetry.b_value));
    let (a, b) = expected_ab(&ce.spec).unwrap();
    let w = &ce.symmetry;
    assert!((a.same(&w.a_value) && b.same(&w.b_value)) || (a.same(&w.b_value) && b.same(&w.a_value)));
    ce.spec.lemma
}

#[test]
fn jacobian_violation_gives_two_resource_gadget() {
    let c = table(2, 4, |r, x| if r == 0 { x[0] + x[1] } else { 3 * x[0] + x[1] });
    let v = check_jacobian_symmetry(&c, 2).unwrap().unwrap();
    assert_eq!(assert_no_pne(&c, &v), GadgetLemma::L3);
}

#[test]
fn square_cross_effect_gives_cross_linearity_gadget() {
    let c = table(2, 4, |r, x| if r == 0 { x[0] + x[1] * x[1] } else { 0 });
    let v = cross_linearity_report(&c, 2).unwrap().b.unwrap();
    assert_eq!(assert_no_pne(&c, &v), GadgetLemma::L4);
}

#[test]
fn three_resource_violation_gives_three_resource_gadget() {
    let c = table(3, 3, |r, x| if r == 0 { x[0] + x[1] * x[2] } else { 0 });
    let v = cross_linearity_report(&c, 1).unwrap().three.unwrap();
    assert_eq!(v.t, Some(2));
    assert_eq!(assert_no_pne(&c, &v), GadgetLemma::L5);
}

#[test]
fn product_cost_chain_resolves_to_a_local_step() {
    let c = table(2, 4, |r, x| if r == 0 { x[0] * x[1] } else { 0 });
    let v = cross_linearity_report(&c, 2).unwrap().diagonal.unwrap();
    let lemma = assert_no_pne(&c, &v);
    assert!(matches!(lemma, GadgetLemma::L3 | GadgetLemma::L4));
}

#[test]
fn gadget_size_and_dummy_loads() {
    let c = table(3, 5, |r, x| x[r] + x[(r + 1) % 3]);
    let point = vec![q(2), q(1), q(3)];
    for lemma in [GadgetLemma::L3, GadgetLemma::L4, GadgetLemma::L5] {
        let mut spec = GadgetSpec::new(lemma, CostModel::Tabulated(c.clone()), point.clone(), 0, 1);
        if lemma == GadgetLemma::L5 {
            spec = spec.with_t(2);
        }
        let g = build_gadget(&spec).unwrap();
        assert_eq!(g.m(), 12);
        let table = g.strategy_table(10).unwrap();
        let background: Vec<Rational> = match lemma {
            GadgetLemma::L3 => point.clone(),
            _ => vec![q(1), q(1), q(3)],
        };
        for a in &table[0] {
            for b in &table[1] {
                let mut choices: Vec<_> = table.iter().map(|l| l[0].clone()).collect();
                choices[0] = a.clone();
                choices[1] = b.clone();
                let loads = load_of(&g, &rgg_core::Profile::new(choices)).unwrap();
                for k in 1..=4 {
                    for t in 0..3 {
                        let idx = copy_index(3, k, t);
                        let free = [a, b].iter().filter(|s| s.contains(idx)).count() as i128;
                        assert_eq!(loads.0[idx], background[t] + q(free));
                    }
                }
            }
        }
    }
}

fn first_violation(c: &Tabulated, bound: u32) -> Option<Violation> {
    check_jacobian_symmetry(c, bound).unwrap().or_else(|| check_cross_linearity(c, bound).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_violations_become_counterexamples(seed in any::<u64>(), derived in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.gen_range(2..=3);
        let flavor = if derived { TableFlavor::PotentialDifference } else { TableFlavor::Uniform };
        let c = random_tabulated(&mut rng, m, 4, 6, flavor).unwrap();
        if let Some(v) = first_violation(&c, 2) {
            assert_no_pne(&c, &v);
        }
    }

    #[test]
    fn two_resource_gadget_has_pne_iff_values_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_tabulated(&mut rng, 2, 3, 2, TableFlavor::Uniform).unwrap();
        let point = vec![q(rng.gen_range(0..=2)), q(rng.gen_range(0..=2))];
        let spec = GadgetSpec::new(GadgetLemma::L3, CostModel::Tabulated(c), point, 0, 1);
        let g = build_gadget(&spec).unwrap();
        let (a, b) = expected_ab(&spec).unwrap();
        let pne = brute_force_pne(&g, &BruteForceConfig::default()).unwrap().is_positive();
        prop_assert_eq!(pne, a.same(&b));
        match check_ab_symmetry(&g, 0, 1, 1000).unwrap() {
            AbSymmetry::Symmetric(w) => {
                prop_assert!((w.a_value.same(&a) && w.b_value.same(&b)) || (w.a_value.same(&b) && w.b_value.same(&a)));
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn weighted_gadget_matches_closed_form(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = rgg_core::random::random_symmetric(&mut rng, 2, 3);
        let mut a2 = a.clone();
        a2.set(0, 1, a.get(0, 1) + q(rng.gen_range(1..=3)));
        let cost = CostModel::Affine { a: a2, b: vec![q(1), q(2)] };
        let eps = rgg_core::random::random_weight(&mut rng);
        let spec = GadgetSpec::new(GadgetLemma::L3, cost, vec![Rational::new(1, 2), q(1)], 0, 1).with_epsilon(eps);
        let g = build_gadget(&spec).unwrap();
        let (x, y) = expected_ab(&spec).unwrap();
        prop_assert!(!x.same(&y));
        let cert = brute_force_pne(&g, &BruteForceConfig::default()).unwrap();
        prop_assert!(matches!(cert, Certificate::NoPneExists { .. }), "{:?}", cert);
    }
}
