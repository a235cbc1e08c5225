//! Independent oracles: plain exhaustive searches that share no code paths
//! with the library beyond its data types.
#![allow(dead_code)]

use rgg_core::costs::CostModel;
use rgg_core::reductions::{ForbiddenPairsInstance, SatInstance};
use rgg_core::{Game, Profile, Rational, Strategy};

pub fn q(v: i128) -> Rational {
    Rational::from_int(v)
}

/// Any assignment satisfying every clause.
pub fn sat_oracle(inst: &SatInstance) -> bool {
    (0u32..1 << inst.n_vars).any(|mask| {
        inst.clauses
            .iter()
            .all(|c| c.iter().any(|l| ((mask >> l.var) & 1 == 1) == l.positive))
    })
}

/// Breadth-first enumeration of simple s-t paths as edge lists, filtered by
/// the pair constraint.
pub fn pairs_oracle(inst: &ForbiddenPairsInstance) -> bool {
    let mut queue: std::collections::VecDeque<(usize, u64, Vec<usize>)> = Default::default();
    queue.push_back((inst.s, 1 << inst.s, Vec::new()));
    while let Some((v, seen, path)) = queue.pop_front() {
        if v == inst.t {
            let ok = inst.pairs.iter().all(|&(a, b)| !(path.contains(&a) && path.contains(&b)));
            if ok {
                return true;
            }
            continue;
        }
        for (k, &(a, b)) in inst.edges.iter().enumerate() {
            if a == v && seen & (1 << b) == 0 {
                let mut p = path.clone();
                p.push(k);
                queue.push_back((b, seen | 1 << b, p));
            }
        }
    }
    false
}

/// Integer loads of an unweighted profile.
pub fn int_loads(m: usize, profile: &Profile) -> Vec<i128> {
    let mut x = vec![0i128; m];
    for s in &profile.choices {
        for r in s.iter_support() {
            x[r] += 1;
        }
    }
    x
}

/// `Σ_i x_iᵀ c(x_1 + ... + x_i)` for a separable-plus-linear cost, summed in
/// plain loops.
pub fn sequential_sum_spl(game: &Game, profile: &Profile) -> Rational {
    let (f, a) = match game.cost() {
        CostModel::SeparablePlusLinear { f, a } => (f, a),
        _ => panic!("not separable-plus-linear"),
    };
    let m = game.m();
    let mut x = vec![0usize; m];
    let mut total = q(0);
    for s in &profile.choices {
        for r in s.iter_support() {
            x[r] += 1;
        }
        for r in s.iter_support() {
            let mut c = f[r][x[r]];
            for (t, &xt) in x.iter().enumerate() {
                c += a.get(r, t) * Rational::from(xt);
            }
            total += c;
        }
    }
    total
}

/// All profiles, player 0 most significant.
pub fn all_profiles(table: &[Vec<Strategy>]) -> Vec<Profile> {
    let mut out = vec![Vec::new()];
    for list in table {
        out = out
            .into_iter()
            .flat_map(|p: Vec<Strategy>| {
                list.iter().map(move |s| {
                    let mut p = p.clone();
                    p.push(s.clone());
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(Profile::new).collect()
}

/// Whether some profile admits no strictly improving unilateral deviation,
/// evaluating costs from scratch for every candidate.
pub fn naive_pne_exists(game: &Game, cap: usize) -> Option<Profile> {
    let table = game.strategy_table(cap).unwrap();
    all_profiles(&table).into_iter().find(|p| {
        (0..game.n()).all(|i| {
            let now = rgg_core::private_cost(game, p, i).unwrap();
            table[i].iter().all(|y| {
                let mut d = p.clone();
                d.choices[i] = y.clone();
                !rgg_core::private_cost(game, &d, i).unwrap().less_than(&now)
            })
        })
    })
}
