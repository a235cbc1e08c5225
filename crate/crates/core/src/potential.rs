//! Exact potentials for separable-plus-symmetric-linear costs (unweighted)
//! and symmetric affine costs (weighted), and a tester for the exact
//! potential identity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::costs::{CostModel, Matrix};
use crate::error::{Error, Result};
use crate::game::{load_of, Game, LoadVector, Profile, Strategy};
use crate::rational::{Rational, Value};

fn weighted_vector(s: &Strategy, w: Rational) -> Vec<Rational> {
    s.bits().iter().map(|&b| if b { w } else { Rational::zero() }).collect()
}

fn symmetric(a: &Matrix) -> Result<()> {
    match a.asymmetry() {
        None => Ok(()),
        Some((r, s)) => Err(Error::Precondition(format!(
            "A is not symmetric: a[{r}][{s}] = {} but a[{s}][{r}] = {}",
            a.get(r, s),
            a.get(s, r)
        ))),
    }
}

/// `Σ_r Σ_{k=1}^{x_r} f_r(k) + ½ xᵀAx + ½ Σ_i x_iᵀ A x_i`.
pub fn potential_unweighted(game: &Game, profile: &Profile) -> Result<Rational> {
    let (f, a) = match game.cost() {
        CostModel::SeparablePlusLinear { f, a } => (f, a),
        other => {
            return Err(Error::Precondition(format!(
                "unweighted potential needs a separable-plus-linear cost, got {}",
                other.kind()
            )))
        }
    };
    if !game.is_unweighted() {
        return Err(Error::Precondition("unweighted potential on a weighted game".into()));
    }
    symmetric(a)?;
    let loads = load_of(game, profile)?;
    let mut p = Rational::zero();
    for (r, x) in loads.0.iter().enumerate() {
        let k = x.to_u32().expect("unweighted loads are integers") as usize;
        if k >= f[r].len() {
            return Err(Error::Range(format!(
                "load {k} on resource {r} exceeds table bound {}",
                f[r].len() - 1
            )));
        }
        p += f[r][1..=k].iter().sum::<Rational>();
    }
    p += a.bilinear(&loads.0, &loads.0).half();
    for s in &profile.choices {
        let v = weighted_vector(s, Rational::one());
        p += a.bilinear(&v, &v).half();
    }
    Ok(p)
}

/// `½ xᵀAx + ½ Σ_i x_iᵀ A x_i + xᵀb`, with `x_i = w_i · (0/1 choice)`.
///
/// The `b` term enters with coefficient one; this is the value of the
/// sequential sum `Σ_i x_iᵀ(A x_{≤i} + b)`.
pub fn potential_weighted_affine(game: &Game, profile: &Profile) -> Result<Rational> {
    let (a, b) = match game.cost() {
        CostModel::Affine { a, b } => (a, b),
        other => {
            return Err(Error::Precondition(format!(
                "weighted affine potential needs an affine cost, got {}",
                other.kind()
            )))
        }
    };
    symmetric(a)?;
    let loads = load_of(game, profile)?;
    let mut p = a.bilinear(&loads.0, &loads.0).half();
    for (s, pl) in profile.choices.iter().zip(game.players()) {
        let v = weighted_vector(s, pl.weight);
        p += a.bilinear(&v, &v).half();
    }
    p += loads.0.iter().zip(b).map(|(x, b)| *x * *b).sum::<Rational>();
    Ok(p)
}

/// Sum of private costs when players enter one at a time in `order`, each
/// paying against the players already present.
pub fn sequential_potential(game: &Game, profile: &Profile, order: &[usize]) -> Result<Value> {
    game.check_profile(profile)?;
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..game.n()).collect::<Vec<_>>() {
        return Err(Error::Usage("order must be a permutation of the players".into()));
    }
    let mut loads = LoadVector::zeros(game.m());
    let mut total = Value::zero();
    for &i in order {
        loads.add_strategy(profile.get(i), game.player(i).weight);
        total = total + game.cost_at(&loads, i, profile.get(i))?;
    }
    Ok(total)
}

/// A unilateral deviation where `ΔP != Δπ_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialWitness {
    pub profile: Profile,
    pub player: usize,
    pub deviation: Strategy,
    pub delta_potential: Value,
    pub delta_cost: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialCheck {
    Pass {
        profiles_checked: u64,
        deviations_checked: u64,
        /// False when the profile space exceeded the bound and a seeded
        /// sample of `bound` profiles was checked instead.
        exhaustive: bool,
    },
    Fail(PotentialWitness),
}

impl PotentialCheck {
    pub fn passed(&self) -> bool {
        matches!(self, PotentialCheck::Pass { .. })
    }
}

/// Checks `P(y, x_{-i}) - P(x) = π_i(y, x_{-i}) - π_i(x)` for every profile,
/// player and deviation; above `bound` profiles a deterministic sample of
/// `bound` base profiles is used. Strategy spaces are enumerated up to
/// `strategy_cap` each.
pub fn check_exact_potential<P>(
    game: &Game,
    potential: P,
    bound: u64,
    strategy_cap: usize,
) -> Result<PotentialCheck>
where
    P: Fn(&Profile) -> Result<Value>,
{
    let table = game.strategy_table(strategy_cap)?;
    let radix: Vec<u64> = table.iter().map(|l| l.len() as u64).collect();
    let total = radix.iter().try_fold(1u64, |acc, &k| acc.checked_mul(k));
    let exhaustive = matches!(total, Some(t) if t <= bound);
    let decode = |mut idx: u64| -> Profile {
        let mut choices = vec![Strategy::empty(0); table.len()];
        for i in (0..table.len()).rev() {
            choices[i] = table[i][(idx % radix[i]) as usize].clone();
            idx /= radix[i];
        }
        Profile::new(choices)
    };
    let bases: Vec<Profile> = if exhaustive {
        (0..total.unwrap_or(0)).map(decode).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        (0..bound)
            .map(|_| Profile::new(table.iter().map(|l| l[rng.gen_range(0..l.len())].clone()).collect()))
            .collect()
    };
    let mut deviations = 0u64;
    for x in &bases {
        let px = potential(x)?;
        let loads = load_of(game, x)?;
        for i in 0..game.n() {
            let w = game.player(i).weight;
            let cx = game.cost_at(&loads, i, x.get(i))?;
            let mut others = loads.clone();
            others.remove_strategy(x.get(i), w);
            for y in &table[i] {
                if y == x.get(i) {
                    continue;
                }
                deviations += 1;
                let mut ly = others.clone();
                ly.add_strategy(y, w);
                let cy = game.cost_at(&ly, i, y)?;
                let mut xy = x.clone();
                xy.choices[i] = y.clone();
                let py = potential(&xy)?;
                let (dp, dc) = (py - px, cy - cx);
                if !dp.same(&dc) {
                    return Ok(PotentialCheck::Fail(PotentialWitness {
                        profile: x.clone(),
                        player: i,
                        deviation: y.clone(),
                        delta_potential: dp,
                        delta_cost: dc,
                    }));
                }
            }
        }
    }
    Ok(PotentialCheck::Pass { profiles_checked: bases.len() as u64, deviations_checked: deviations, exhaustive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Player, StrategySpace};

    fn s(m: usize, sup: &[usize]) -> Strategy {
        Strategy::from_support(m, sup).unwrap()
    }

    fn q(v: i128) -> Rational {
        Rational::from_int(v)
    }

    #[test]
    fn empty_game_has_zero_potential() {
        let g = Game::new(
            2,
            vec![],
            CostModel::SeparablePlusLinear { f: vec![vec![q(0)]; 2], a: Matrix::zeros(2) },
        )
        .unwrap();
        assert_eq!(potential_unweighted(&g, &Profile::new(vec![])).unwrap(), q(0));
    }

    #[test]
    fn rosenthal_sum_on_one_resource() {
        let cost = CostModel::SeparablePlusLinear { f: vec![vec![q(0), q(1), q(2)]], a: Matrix::zeros(1) };
        let space = StrategySpace::explicit(vec![s(1, &[0])]);
        let g = Game::new(1, vec![Player::unit(space); 2], cost).unwrap();
        let x = Profile::new(vec![s(1, &[0]); 2]);
        assert_eq!(potential_unweighted(&g, &x).unwrap(), q(3));
    }

    #[test]
    fn swap_interaction() {
        let cost = CostModel::SeparablePlusLinear {
            f: vec![vec![q(0); 3]; 2],
            a: Matrix::from_ints(&[&[0, 1], &[1, 0]]).unwrap(),
        };
        let space = StrategySpace::explicit(vec![s(2, &[0]), s(2, &[1])]);
        let g = Game::new(2, vec![Player::unit(space); 2], cost).unwrap();
        let x = Profile::new(vec![s(2, &[0]), s(2, &[1])]);
        assert_eq!(potential_unweighted(&g, &x).unwrap(), q(1));
    }

    #[test]
    fn asymmetric_a_is_rejected() {
        let cost = CostModel::SeparablePlusLinear {
            f: vec![vec![q(0); 2]; 2],
            a: Matrix::from_ints(&[&[0, 1], &[0, 0]]).unwrap(),
        };
        let g = Game::new(2, vec![], cost).unwrap();
        assert!(matches!(potential_unweighted(&g, &Profile::new(vec![])), Err(Error::Precondition(_))));
    }

    #[test]
    fn weighted_examples() {
        let space = StrategySpace::explicit(vec![s(1, &[0])]);
        let w = Rational::new(5, 3);
        let g = Game::new(1, vec![Player::new(w, space)], CostModel::Affine { a: Matrix::zeros(1), b: vec![q(1)] })
            .unwrap();
        assert_eq!(potential_weighted_affine(&g, &Profile::new(vec![s(1, &[0])])).unwrap(), w);

        let space = StrategySpace::explicit(vec![s(2, &[0]), s(2, &[1])]);
        let g = Game::new(
            2,
            vec![Player::new(q(1), space.clone()), Player::new(q(2), space)],
            CostModel::Affine { a: Matrix::identity(2), b: vec![q(0); 2] },
        )
        .unwrap();
        let x = Profile::new(vec![s(2, &[0]), s(2, &[1])]);
        assert_eq!(potential_weighted_affine(&g, &x).unwrap(), q(5));
        let seq = sequential_potential(&g, &x, &[1, 0]).unwrap();
        assert!(seq.same(&Value::Exact(q(5))));
    }

    #[test]
    fn zero_potential_fails_on_nontrivial_game() {
        let cost = CostModel::Affine { a: Matrix::zeros(2), b: vec![q(1), q(2)] };
        let space = StrategySpace::explicit(vec![s(2, &[0]), s(2, &[1])]);
        let g = Game::new(2, vec![Player::unit(space)], cost).unwrap();
        let res = check_exact_potential(&g, |_| Ok(Value::zero()), 1000, 100).unwrap();
        assert!(!res.passed());
    }

    #[test]
    fn asymmetric_affine_has_no_exact_potential() {
        // Crossing strategies: player 0 on {0} or {1}, player 1 likewise.
        let a = Matrix::from_ints(&[&[0, 1], &[0, 0]]).unwrap();
        let cost = CostModel::Affine { a: a.clone(), b: vec![q(0); 2] };
        let space = StrategySpace::explicit(vec![s(2, &[0]), s(2, &[1])]);
        let g = Game::new(2, vec![Player::unit(space); 2], cost).unwrap();
        // The closed form, evaluated without the symmetry precondition.
        let p = |x: &Profile| -> Result<Value> {
            let l = load_of(&g, x)?;
            let mut v = a.bilinear(&l.0, &l.0).half();
            for c in &x.choices {
                let e = weighted_vector(c, q(1));
                v += a.bilinear(&e, &e).half();
            }
            Ok(Value::Exact(v))
        };
        assert!(!check_exact_potential(&g, p, 1000, 100).unwrap().passed());
    }
}
