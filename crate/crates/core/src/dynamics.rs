//! Equilibrium verification, best/better-response dynamics and the
//! brute-force existence oracle.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::costs::CostModel;
use crate::error::{Error, Result};
use crate::game::{load_of, Game, LoadVector, Profile, Strategy, StrategySpace};
use crate::matroid::greedy_best_response;
use crate::rational::{Rational, Value};

/// Default cap on the number of strategies enumerated per player.
pub const DEFAULT_STRATEGY_CAP: usize = 100_000;
/// Default cap on the number of profiles brute force may visit.
pub const DEFAULT_PROFILE_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    IsPne,
    NotPne { player: usize, deviation: Strategy, delta: Value },
    NoPneExists { profiles_checked: u64 },
    PneFound { profile: Profile },
}

impl Certificate {
    /// True for the outcomes that report an equilibrium.
    pub fn is_positive(&self) -> bool {
        matches!(self, Certificate::IsPne | Certificate::PneFound { .. })
    }
}

/// Per-player strategy lists plus load arithmetic shared by all scans.
struct Scanner<'g> {
    game: &'g Game,
    strategies: Vec<Vec<Strategy>>,
}

impl<'g> Scanner<'g> {
    fn new(game: &'g Game, cap: usize) -> Result<Self> {
        Ok(Scanner { game, strategies: game.strategy_table(cap)? })
    }

    /// Cost of player `i` for `y` against the loads of everyone else.
    fn cost_against(&self, others: &LoadVector, i: usize, y: &Strategy) -> Result<Value> {
        let w = self.game.player(i).weight;
        let mut loads = others.clone();
        loads.add_strategy(y, w);
        self.game.cost_at(&loads, i, y)
    }

    fn others(&self, loads: &LoadVector, profile: &Profile, i: usize) -> LoadVector {
        let mut o = loads.clone();
        o.remove_strategy(profile.get(i), self.game.player(i).weight);
        o
    }

    /// First strictly improving deviation, scanning players and strategies in
    /// canonical order.
    fn first_improvement(&self, profile: &Profile) -> Result<Option<(usize, Strategy, Value)>> {
        let loads = load_of(self.game, profile)?;
        for i in 0..self.game.n() {
            let current = self.game.cost_at(&loads, i, profile.get(i))?;
            let others = self.others(&loads, profile, i);
            for y in &self.strategies[i] {
                if y == profile.get(i) {
                    continue;
                }
                let c = self.cost_against(&others, i, y)?;
                if c.less_than(&current) {
                    return Ok(Some((i, y.clone(), c - current)));
                }
            }
        }
        Ok(None)
    }
}

/// Whether `profile` is a pure Nash equilibrium; the witness is the first
/// improving deviation (lowest player, then canonical strategy order).
pub fn verify_pne(game: &Game, profile: &Profile, cap: usize) -> Result<Certificate> {
    game.check_profile(profile)?;
    let scan = Scanner::new(game, cap)?;
    Ok(match scan.first_improvement(profile)? {
        None => Certificate::IsPne,
        Some((player, deviation, delta)) => Certificate::NotPne { player, deviation, delta },
    })
}

/// A cost-minimizing strategy for player `i`. The incumbent is kept when it is
/// optimal; otherwise the canonically first minimizer is returned.
///
/// Player-specific separable costs on matroid spaces are answered by the
/// greedy algorithm without enumeration.
pub fn best_response(game: &Game, profile: &Profile, i: usize, cap: usize) -> Result<Strategy> {
    game.check_profile(profile)?;
    if i >= game.n() {
        return Err(Error::Usage(format!("player {i} out of range")));
    }
    let loads = load_of(game, profile)?;
    let mut others = loads.clone();
    others.remove_strategy(profile.get(i), game.player(i).weight);
    if let (CostModel::PlayerSpecificSeparable { .. }, StrategySpace::MatroidBases(desc)) =
        (game.cost(), &game.player(i).space)
    {
        return greedy_response(game, profile, i, &others, desc);
    }
    let strategies = game.player(i).space.enumerate(game.m(), cap)?;
    best_of(game, profile, i, &others, &strategies)
}

fn best_of(
    game: &Game,
    profile: &Profile,
    i: usize,
    others: &LoadVector,
    strategies: &[Strategy],
) -> Result<Strategy> {
    let w = game.player(i).weight;
    let cost = |y: &Strategy| -> Result<Value> {
        let mut l = others.clone();
        l.add_strategy(y, w);
        game.cost_at(&l, i, y)
    };
    let incumbent = profile.get(i);
    let mut best = incumbent.clone();
    let mut best_cost = cost(incumbent)?;
    for y in strategies {
        let c = cost(y)?;
        if c.less_than(&best_cost) {
            best = y.clone();
            best_cost = c;
        }
    }
    Ok(best)
}

fn greedy_response(
    game: &Game,
    profile: &Profile,
    i: usize,
    others: &LoadVector,
    desc: &crate::matroid::MatroidDesc,
) -> Result<Strategy> {
    let w = game.player(i).weight;
    let probe: Vec<Rational> = others.0.iter().map(|x| *x + w).collect();
    let weights = game.cost().eval_exact(&probe, Some(i))?;
    let g = greedy_best_response(desc, game.m(), &weights)?;
    let incumbent = profile.get(i);
    let total = |s: &Strategy| -> Rational { s.iter_support().map(|r| weights[r]).sum() };
    Ok(if total(incumbent) <= total(&g) { incumbent.clone() } else { g })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    RoundRobin,
    /// A fresh seeded permutation of the players every round.
    Random { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResponseMode {
    /// Move to a best response.
    Best,
    /// Move to the first strictly improving strategy in canonical order.
    Better,
}

#[derive(Clone, Debug)]
pub struct DynamicsConfig {
    /// Maximum number of improvement steps.
    pub max_iters: usize,
    pub schedule: Schedule,
    pub mode: ResponseMode,
    /// Per-player strategy enumeration cap.
    pub cap: usize,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        DynamicsConfig {
            max_iters: 10_000,
            schedule: Schedule::RoundRobin,
            mode: ResponseMode::Best,
            cap: DEFAULT_STRATEGY_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub player: usize,
    pub old: Strategy,
    pub new: Strategy,
    /// `π_i(new) - π_i(old)`, always negative.
    pub delta: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsTrace {
    pub steps: Vec<Step>,
    pub terminal: Profile,
    pub converged: bool,
    pub iterations: usize,
}

/// Applies strict improvements until no player can improve or `max_iters`
/// steps were taken. Deterministic for a fixed configuration.
pub fn run_best_response_dynamics(
    game: &Game,
    start: &Profile,
    config: &DynamicsConfig,
) -> Result<DynamicsTrace> {
    game.check_profile(start)?;
    let n = game.n();
    let greedy_capable = matches!(game.cost(), CostModel::PlayerSpecificSeparable { .. });
    let strategies: Vec<Option<Vec<Strategy>>> = game
        .players()
        .iter()
        .map(|p| match (&p.space, greedy_capable, config.mode) {
            (StrategySpace::MatroidBases(_), true, ResponseMode::Best) => Ok(None),
            (space, _, _) => space.enumerate(game.m(), config.cap).map(Some),
        })
        .collect::<Result<_>>()?;
    let mut rng = match config.schedule {
        Schedule::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        Schedule::RoundRobin => None,
    };
    let mut profile = start.clone();
    let mut loads = load_of(game, &profile)?;
    let mut steps = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    loop {
        if let Some(rng) = rng.as_mut() {
            order.shuffle(rng);
        }
        let mut moved = false;
        for &i in &order {
            if steps.len() >= config.max_iters {
                let converged = Scanner::new(game, config.cap)
                    .and_then(|s| s.first_improvement(&profile))
                    .map(|w| w.is_none())
                    .unwrap_or(false);
                return Ok(DynamicsTrace {
                    iterations: steps.len(),
                    steps,
                    terminal: profile,
                    converged,
                });
            }
            let w = game.player(i).weight;
            let mut others = loads.clone();
            others.remove_strategy(profile.get(i), w);
            let candidate = match (&strategies[i], config.mode) {
                (None, _) => match &game.player(i).space {
                    StrategySpace::MatroidBases(desc) => {
                        greedy_response(game, &profile, i, &others, desc)?
                    }
                    StrategySpace::Explicit(_) => unreachable!("explicit spaces are enumerated"),
                },
                (Some(list), ResponseMode::Best) => best_of(game, &profile, i, &others, list)?,
                (Some(list), ResponseMode::Better) => {
                    first_better(game, &profile, i, &others, list)?.unwrap_or_else(|| profile.get(i).clone())
                }
            };
            if &candidate == profile.get(i) {
                continue;
            }
            let old_cost = game.cost_at(&loads, i, profile.get(i))?;
            let mut new_loads = others;
            new_loads.add_strategy(&candidate, w);
            let new_cost = game.cost_at(&new_loads, i, &candidate)?;
            if !new_cost.less_than(&old_cost) {
                continue;
            }
            steps.push(Step {
                player: i,
                old: profile.get(i).clone(),
                new: candidate.clone(),
                delta: new_cost - old_cost,
            });
            profile.choices[i] = candidate;
            loads = new_loads;
            moved = true;
        }
        if !moved {
            return Ok(DynamicsTrace { iterations: steps.len(), steps, terminal: profile, converged: true });
        }
    }
}

fn first_better(
    game: &Game,
    profile: &Profile,
    i: usize,
    others: &LoadVector,
    list: &[Strategy],
) -> Result<Option<Strategy>> {
    let w = game.player(i).weight;
    let mut current = others.clone();
    current.add_strategy(profile.get(i), w);
    let now = game.cost_at(&current, i, profile.get(i))?;
    for y in list {
        let mut l = others.clone();
        l.add_strategy(y, w);
        if game.cost_at(&l, i, y)?.less_than(&now) {
            return Ok(Some(y.clone()));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug)]
pub struct BruteForceConfig {
    /// Maximum number of profiles.
    pub budget: u64,
    /// Per-player strategy enumeration cap.
    pub strategy_cap: usize,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        BruteForceConfig { budget: DEFAULT_PROFILE_BUDGET, strategy_cap: DEFAULT_STRATEGY_CAP, jobs: None }
    }
}

/// Enumerates all profiles in canonical order (player 0 most significant)
/// and returns the first equilibrium, or an exhaustion certificate.
///
/// The search may run in parallel; the result is always the canonically
/// first equilibrium.
pub fn brute_force_pne(game: &Game, config: &BruteForceConfig) -> Result<Certificate> {
    let scan = Scanner::new(game, config.strategy_cap)?;
    let mut total: u64 = 1;
    for list in &scan.strategies {
        total = total
            .checked_mul(list.len() as u64)
            .filter(|&t| t <= config.budget)
            .ok_or_else(|| Error::capacity("profiles for brute force", config.budget))?;
    }
    let decode = |mut idx: u64| -> Profile {
        let mut choices = vec![Strategy::empty(0); game.n()];
        for i in (0..game.n()).rev() {
            let k = scan.strategies[i].len() as u64;
            choices[i] = scan.strategies[i][(idx % k) as usize].clone();
            idx /= k;
        }
        Profile::new(choices)
    };
    let probe = |idx: u64| -> Option<Result<Profile>> {
        let p = decode(idx);
        match scan.first_improvement(&p) {
            Ok(None) => Some(Ok(p)),
            Ok(Some(_)) => None,
            Err(e) => Some(Err(e)),
        }
    };
    let search = || (0..total).into_par_iter().find_map_first(probe);
    let found = match config.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| Error::Usage(format!("thread pool: {e}")))?
            .install(search),
        None => search(),
    };
    match found {
        Some(Ok(profile)) => Ok(Certificate::PneFound { profile }),
        Some(Err(e)) => Err(e),
        None => Ok(Certificate::NoPneExists { profiles_checked: total }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::Matrix;
    use crate::game::Player;

    fn s(m: usize, sup: &[usize]) -> Strategy {
        Strategy::from_support(m, sup).unwrap()
    }

    fn singletons(m: usize) -> StrategySpace {
        StrategySpace::explicit((0..m).map(|r| s(m, &[r])).collect())
    }

    fn linear_separable(m: usize, n: usize) -> CostModel {
        let f = vec![(0..=n as i128).map(Rational::from_int).collect(); m];
        CostModel::SeparablePlusLinear { f, a: Matrix::zeros(m) }
    }

    #[test]
    fn single_strategy_is_pne() {
        let g = Game::new(1, vec![Player::unit(singletons(1))], linear_separable(1, 1)).unwrap();
        let x = Profile::new(vec![s(1, &[0])]);
        assert_eq!(verify_pne(&g, &x, 10).unwrap(), Certificate::IsPne);
    }

    #[test]
    fn crowded_resource_is_not_pne() {
        let g = Game::new(2, vec![Player::unit(singletons(2)); 2], linear_separable(2, 2)).unwrap();
        let x = Profile::new(vec![s(2, &[0]), s(2, &[0])]);
        match verify_pne(&g, &x, 10).unwrap() {
            Certificate::NotPne { player, deviation, delta } => {
                assert_eq!(player, 0);
                assert_eq!(deviation, s(2, &[1]));
                assert!(delta.same(&Value::Exact(Rational::from_int(-1))));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn best_response_avoids_load() {
        let cost = CostModel::Affine { a: Matrix::identity(2), b: vec![Rational::zero(); 2] };
        let dummy = StrategySpace::explicit(vec![s(2, &[0])]);
        let mut players = vec![Player::unit(singletons(2))];
        players.extend(std::iter::repeat(Player::unit(dummy)).take(5));
        let g = Game::new(2, players, cost).unwrap();
        let x = Profile::new(vec![s(2, &[0]); 6]);
        assert_eq!(best_response(&g, &x, 0, 10).unwrap(), s(2, &[1]));
    }

    #[test]
    fn best_response_keeps_optimal_incumbent() {
        let g = Game::new(2, vec![Player::unit(singletons(2))], linear_separable(2, 1)).unwrap();
        let x = Profile::new(vec![s(2, &[1])]);
        assert_eq!(best_response(&g, &x, 0, 10).unwrap(), s(2, &[1]));
    }

    #[test]
    fn dynamics_from_pne_takes_no_steps() {
        let g = Game::new(2, vec![Player::unit(singletons(2)); 2], linear_separable(2, 2)).unwrap();
        let x = Profile::new(vec![s(2, &[0]), s(2, &[1])]);
        let t = run_best_response_dynamics(&g, &x, &DynamicsConfig::default()).unwrap();
        assert!(t.converged);
        assert_eq!(t.iterations, 0);
        assert_eq!(t.terminal, x);
    }

    #[test]
    fn brute_force_single_player_finds_minimizer() {
        let cost = CostModel::Affine {
            a: Matrix::zeros(2),
            b: vec![Rational::from_int(3), Rational::from_int(1)],
        };
        let g = Game::new(2, vec![Player::unit(singletons(2))], cost).unwrap();
        assert_eq!(
            brute_force_pne(&g, &BruteForceConfig::default()).unwrap(),
            Certificate::PneFound { profile: Profile::new(vec![s(2, &[1])]) }
        );
    }

    #[test]
    fn brute_force_respects_budget() {
        let g = Game::new(3, vec![Player::unit(singletons(3)); 4], linear_separable(3, 4)).unwrap();
        let cfg = BruteForceConfig { budget: 80, ..BruteForceConfig::default() };
        assert!(matches!(brute_force_pne(&g, &cfg), Err(Error::Capacity { .. })));
    }
}
