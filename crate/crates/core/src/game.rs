//! Game representation, load aggregation and private costs.
//!
//! A player's strategy is a 0/1 incidence vector over the `m` resources; in a
//! weighted game the vector actually placed on the resources is `w_i` times
//! that incidence vector. Profiles store the 0/1 choices and the weights are
//! applied when loads are aggregated.

use std::cmp::Ordering;
use std::fmt;

use crate::costs::CostModel;
use crate::error::{Error, Result};
use crate::matroid::MatroidDesc;
use crate::rational::{Rational, Value};

/// A 0/1 incidence vector over the resources.
///
/// Strategies are ordered by their sorted support lists compared
/// lexicographically (`{0,1} < {0,2} < {1,2}`); this is the canonical order
/// used for enumeration and all tie-breaking.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Strategy {
    bits: Vec<bool>,
}

impl Strategy {
    pub fn new(bits: Vec<bool>) -> Self {
        Strategy { bits }
    }

    pub fn empty(m: usize) -> Self {
        Strategy { bits: vec![false; m] }
    }

    pub fn from_support(m: usize, support: &[usize]) -> Result<Self> {
        let mut bits = vec![false; m];
        for &r in support {
            if r >= m {
                return Err(Error::Structural(format!(
                    "resource {r} out of range for m = {m}"
                )));
            }
            bits[r] = true;
        }
        Ok(Strategy { bits })
    }

    pub fn dim(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, r: usize) -> bool {
        self.bits.get(r).copied().unwrap_or(false)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn iter_support(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(r, _)| r)
    }

    pub fn support(&self) -> Vec<usize> {
        self.iter_support().collect()
    }

    pub fn size(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// `self - 1_remove + 1_add`.
    pub fn exchanged(&self, remove: usize, add: usize) -> Strategy {
        let mut bits = self.bits.clone();
        bits[remove] = false;
        bits[add] = true;
        Strategy { bits }
    }
}

impl Ord for Strategy {
    fn cmp(&self, other: &Self) -> Ordering {
        self.iter_support()
            .cmp(other.iter_support())
            .then_with(|| self.bits.len().cmp(&other.bits.len()))
    }
}

impl PartialOrd for Strategy {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.support())
    }
}

/// The set of 0/1 vectors a player may choose from.
#[derive(Clone, Debug, PartialEq)]
pub enum StrategySpace {
    /// Sorted, deduplicated list.
    Explicit(Vec<Strategy>),
    MatroidBases(MatroidDesc),
}

impl StrategySpace {
    /// Canonicalizes the list (sort + dedup).
    pub fn explicit(mut strategies: Vec<Strategy>) -> Self {
        strategies.sort();
        strategies.dedup();
        StrategySpace::Explicit(strategies)
    }

    pub fn contains(&self, s: &Strategy) -> bool {
        match self {
            StrategySpace::Explicit(list) => list.binary_search(s).is_ok(),
            StrategySpace::MatroidBases(desc) => desc.is_basis(s),
        }
    }

    /// All strategies in canonical order, failing if there are more than `cap`.
    pub fn enumerate(&self, m: usize, cap: usize) -> Result<Vec<Strategy>> {
        match self {
            StrategySpace::Explicit(list) => {
                if list.len() > cap {
                    return Err(Error::capacity("explicit strategy list", cap as u64));
                }
                Ok(list.clone())
            }
            StrategySpace::MatroidBases(desc) => desc.enumerate_bases(m, cap),
        }
    }

    fn validate(&self, m: usize) -> Result<()> {
        match self {
            StrategySpace::Explicit(list) => {
                if list.is_empty() {
                    return Err(Error::Structural("empty strategy space".into()));
                }
                if let Some(s) = list.iter().find(|s| s.dim() != m) {
                    return Err(Error::Structural(format!(
                        "strategy of dimension {} in a game with m = {m}",
                        s.dim()
                    )));
                }
                if list.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Structural(
                        "explicit strategy list must be sorted and deduplicated".into(),
                    ));
                }
                Ok(())
            }
            StrategySpace::MatroidBases(desc) => desc.validate(m),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Player {
    pub weight: Rational,
    pub space: StrategySpace,
}

impl Player {
    pub fn new(weight: Rational, space: StrategySpace) -> Self {
        Player { weight, space }
    }

    pub fn unit(space: StrategySpace) -> Self {
        Player { weight: Rational::one(), space }
    }
}

/// A (possibly weighted) resource graph game.
#[derive(Clone, Debug, PartialEq)]
pub struct Game {
    m: usize,
    players: Vec<Player>,
    cost: CostModel,
}

impl Game {
    pub fn new(m: usize, players: Vec<Player>, cost: CostModel) -> Result<Self> {
        if m == 0 {
            return Err(Error::Structural("a game needs at least one resource".into()));
        }
        for (i, p) in players.iter().enumerate() {
            if !p.weight.is_positive() {
                return Err(Error::Structural(format!("player {i} has non-positive weight")));
            }
            p.space
                .validate(m)
                .map_err(|e| Error::Structural(format!("player {i}: {e}")))?;
        }
        cost.validate(m, players.len())?;
        Ok(Game { m, players, cost })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.players.len()
    }

    pub fn players(&self) -> &[Player] {
        &self.players
    }

    pub fn player(&self, i: usize) -> &Player {
        &self.players[i]
    }

    pub fn cost(&self) -> &CostModel {
        &self.cost
    }

    pub fn is_unweighted(&self) -> bool {
        self.players.iter().all(|p| p.weight == Rational::one())
    }

    /// Same players, different cost model.
    pub fn with_cost(&self, cost: CostModel) -> Result<Game> {
        Game::new(self.m, self.players.clone(), cost)
    }

    /// Every player's strategies in canonical order.
    pub fn strategy_table(&self, cap: usize) -> Result<Vec<Vec<Strategy>>> {
        self.players
            .iter()
            .enumerate()
            .map(|(i, p)| {
                p.space.enumerate(self.m, cap).map_err(|e| match e {
                    Error::Capacity { what, limit } => Error::Capacity {
                        what: format!("strategies of player {i} ({what})"),
                        limit,
                    },
                    other => other,
                })
            })
            .collect()
    }

    /// Checks dimensions and membership of every choice.
    pub fn check_profile(&self, profile: &Profile) -> Result<()> {
        self.check_dims(profile)?;
        for (i, (s, p)) in profile.choices.iter().zip(&self.players).enumerate() {
            if !p.space.contains(s) {
                return Err(Error::Domain(format!(
                    "choice {s:?} is not playable for player {i}"
                )));
            }
        }
        Ok(())
    }

    fn check_dims(&self, profile: &Profile) -> Result<()> {
        if profile.choices.len() != self.n() {
            return Err(Error::Structural(format!(
                "profile has {} choices for {} players",
                profile.choices.len(),
                self.n()
            )));
        }
        if let Some(s) = profile.choices.iter().find(|s| s.dim() != self.m) {
            return Err(Error::Structural(format!(
                "choice of dimension {} in a game with m = {}",
                s.dim(),
                self.m
            )));
        }
        Ok(())
    }

    /// Player `i`'s cost for playing `strategy` when the aggregate load is
    /// `loads` (which must already include the player's own contribution).
    pub fn cost_at(&self, loads: &LoadVector, i: usize, strategy: &Strategy) -> Result<Value> {
        let costs = self.cost.eval(&loads.0, Some(i))?;
        let total: Value = strategy.iter_support().map(|r| costs[r]).sum();
        Ok(total.scale(self.players[i].weight))
    }
}

/// One 0/1 choice per player, in player order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Profile {
    pub choices: Vec<Strategy>,
}

impl Profile {
    pub fn new(choices: Vec<Strategy>) -> Self {
        Profile { choices }
    }

    pub fn get(&self, i: usize) -> &Strategy {
        &self.choices[i]
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }
}

/// Resource-wise aggregate of the players' weighted vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LoadVector(pub Vec<Rational>);

impl LoadVector {
    pub fn zeros(m: usize) -> Self {
        LoadVector(vec![Rational::zero(); m])
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn add_strategy(&mut self, s: &Strategy, weight: Rational) {
        for r in s.iter_support() {
            self.0[r] += weight;
        }
    }

    pub fn remove_strategy(&mut self, s: &Strategy, weight: Rational) {
        for r in s.iter_support() {
            self.0[r] -= weight;
        }
    }
}

pub fn load_of(game: &Game, profile: &Profile) -> Result<LoadVector> {
    game.check_dims(profile)?;
    let mut loads = LoadVector::zeros(game.m);
    for (s, p) in profile.choices.iter().zip(&game.players) {
        loads.add_strategy(s, p.weight);
    }
    Ok(loads)
}

/// `π_i(x) = x_iᵀ c_i(x⃗)`.
pub fn private_cost(game: &Game, profile: &Profile, i: usize) -> Result<Value> {
    if i >= game.n() {
        return Err(Error::Usage(format!("player {i} out of range")));
    }
    let loads = load_of(game, profile)?;
    game.cost_at(&loads, i, &profile.choices[i])
}

/// `(y, x_{-i})`.
pub fn deviate(game: &Game, profile: &Profile, i: usize, y: &Strategy) -> Result<Profile> {
    game.check_dims(profile)?;
    if i >= game.n() {
        return Err(Error::Usage(format!("player {i} out of range")));
    }
    if y.dim() != game.m || !game.players[i].space.contains(y) {
        return Err(Error::Domain(format!("{y:?} is not playable for player {i}")));
    }
    let mut choices = profile.choices.clone();
    choices[i] = y.clone();
    Ok(Profile { choices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::Matrix;

    fn s(m: usize, sup: &[usize]) -> Strategy {
        Strategy::from_support(m, sup).unwrap()
    }

    fn affine_identity(m: usize) -> CostModel {
        CostModel::Affine { a: Matrix::identity(m), b: vec![Rational::zero(); m] }
    }

    #[test]
    fn canonical_order_is_support_lexicographic() {
        let mut v = vec![s(3, &[1, 2]), s(3, &[0, 2]), s(3, &[0, 1]), s(3, &[]), s(3, &[0])];
        v.sort();
        assert_eq!(v, vec![s(3, &[]), s(3, &[0]), s(3, &[0, 1]), s(3, &[0, 2]), s(3, &[1, 2])]);
    }

    #[test]
    fn loads_sum_choices() {
        let space = StrategySpace::explicit(vec![s(2, &[0]), s(2, &[0, 1])]);
        let g = Game::new(2, vec![Player::unit(space.clone()), Player::unit(space)], affine_identity(2))
            .unwrap();
        let x = Profile::new(vec![s(2, &[0]), s(2, &[0, 1])]);
        assert_eq!(load_of(&g, &x).unwrap().0, vec![Rational::from_int(2), Rational::from_int(1)]);
    }

    #[test]
    fn empty_game_has_zero_loads() {
        let g = Game::new(3, vec![], affine_identity(3)).unwrap();
        assert_eq!(load_of(&g, &Profile::new(vec![])).unwrap(), LoadVector::zeros(3));
    }

    #[test]
    fn rational_weights_add_up() {
        let space = StrategySpace::explicit(vec![s(2, &[0])]);
        let g = Game::new(
            2,
            vec![
                Player::new(Rational::new(1, 2), space.clone()),
                Player::new(Rational::new(3, 2), space),
            ],
            affine_identity(2),
        )
        .unwrap();
        let x = Profile::new(vec![s(2, &[0]), s(2, &[0])]);
        assert_eq!(load_of(&g, &x).unwrap().0, vec![Rational::from_int(2), Rational::zero()]);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let space = StrategySpace::explicit(vec![s(2, &[0])]);
        let g = Game::new(2, vec![Player::unit(space)], affine_identity(2)).unwrap();
        let bad = Profile::new(vec![s(3, &[0])]);
        assert!(matches!(load_of(&g, &bad), Err(Error::Structural(_))));
        assert!(matches!(load_of(&g, &Profile::new(vec![])), Err(Error::Structural(_))));
    }

    #[test]
    fn single_player_linear_cost() {
        let space = StrategySpace::explicit(vec![s(1, &[0])]);
        let g = Game::new(1, vec![Player::unit(space)], affine_identity(1)).unwrap();
        let x = Profile::new(vec![s(1, &[0])]);
        assert!(private_cost(&g, &x, 0).unwrap().same(&Value::Exact(Rational::one())));
    }

    #[test]
    fn empty_choice_costs_nothing() {
        let space = StrategySpace::explicit(vec![s(2, &[]), s(2, &[0])]);
        let g = Game::new(2, vec![Player::unit(space.clone()), Player::unit(space)], affine_identity(2))
            .unwrap();
        let x = Profile::new(vec![s(2, &[]), s(2, &[0])]);
        assert!(private_cost(&g, &x, 0).unwrap().same(&Value::zero()));
    }

    #[test]
    fn separable_square_cost_on_shared_resource() {
        // f1(k) = k^2, f2 = 0, A = 0, two players on resource 1 -> each pays 4.
        let f = vec![
            (0..=4).map(|k| Rational::from_int(k * k)).collect(),
            vec![Rational::zero(); 5],
        ];
        let cost = CostModel::SeparablePlusLinear { f, a: Matrix::zeros(2) };
        let space = StrategySpace::explicit(vec![s(2, &[0]), s(2, &[1])]);
        let g = Game::new(2, vec![Player::unit(space.clone()), Player::unit(space)], cost).unwrap();
        let x = Profile::new(vec![s(2, &[0]), s(2, &[0])]);
        for i in 0..2 {
            assert!(private_cost(&g, &x, i).unwrap().same(&Value::Exact(Rational::from_int(4))));
        }
    }

    #[test]
    fn deviate_frame_condition() {
        let space = StrategySpace::explicit(vec![s(2, &[0]), s(2, &[1])]);
        let players = vec![Player::unit(space.clone()), Player::unit(space.clone()), Player::unit(space)];
        let g = Game::new(2, players, affine_identity(2)).unwrap();
        let x = Profile::new(vec![s(2, &[0]), s(2, &[0]), s(2, &[1])]);
        assert_eq!(deviate(&g, &x, 1, &s(2, &[0])).unwrap(), x);
        let y = deviate(&g, &x, 1, &s(2, &[1])).unwrap();
        assert_eq!(y.get(0), x.get(0));
        assert_eq!(y.get(2), x.get(2));
        assert_eq!(y.get(1), &s(2, &[1]));
        assert!(matches!(deviate(&g, &x, 1, &s(2, &[0, 1])), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_invalid_games() {
        let space = StrategySpace::explicit(vec![s(2, &[0])]);
        assert!(Game::new(2, vec![Player::new(Rational::zero(), space.clone())], affine_identity(2)).is_err());
        assert!(Game::new(2, vec![Player::unit(StrategySpace::Explicit(vec![]))], affine_identity(2)).is_err());
        assert!(Game::new(3, vec![Player::unit(space)], affine_identity(3)).is_err());
    }
}
