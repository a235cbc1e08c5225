//! Bilevel load balancing: each resource costs its load plus an attacker's
//! share `κ*`, with budget `B` split evenly over the most loaded resources.

use crate::costs::{argmax_set, kappa_star, CostModel};
use crate::dynamics::Certificate;
use crate::error::{Error, Result};
use crate::game::{load_of, Game, Player, Profile, Strategy, StrategySpace};
use crate::matroid::{solve_via_theorem3, MatroidDesc, Nu};
use crate::rational::Rational;

/// A game with unweighted players on matroid bases and a `Bilevel` cost.
#[derive(Clone, Debug, PartialEq)]
pub struct BilevelGame {
    game: Game,
    budget: Rational,
}

impl BilevelGame {
    pub fn new(game: Game) -> Result<Self> {
        let budget = match game.cost() {
            CostModel::Bilevel { budget } => *budget,
            other => {
                return Err(Error::Structural(format!("expected a bilevel cost, got {}", other.kind())))
            }
        };
        if !budget.is_positive() {
            return Err(Error::Structural(format!("budget must be positive, got {budget}")));
        }
        if !game.is_unweighted() {
            return Err(Error::Unsupported("weighted bilevel games are not supported".into()));
        }
        if let Some(i) = game.players().iter().position(|p| !matches!(p.space, StrategySpace::MatroidBases(_))) {
            return Err(Error::Structural(format!("player {i} has no matroid strategy space")));
        }
        Ok(BilevelGame { game, budget })
    }

    pub fn from_matroids(m: usize, budget: Rational, spaces: Vec<MatroidDesc>) -> Result<Self> {
        let players = spaces.into_iter().map(|d| Player::unit(StrategySpace::MatroidBases(d))).collect();
        BilevelGame::new(Game::new(m, players, CostModel::Bilevel { budget })?)
    }

    pub fn game(&self) -> &Game {
        &self.game
    }

    pub fn budget(&self) -> Rational {
        self.budget
    }
}

/// The attacker's split of `budget` over the loads.
pub fn attack_allocation(loads: &[Rational], budget: Rational) -> Result<Vec<Rational>> {
    kappa_star(loads, budget)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BilevelSolution {
    pub profile: Profile,
    pub certificate: Certificate,
    pub loads: Vec<Rational>,
    pub attack: Vec<Rational>,
}

/// Equilibrium through the separable game with `ν(x) = x`, verified against
/// the κ*-augmented costs.
pub fn solve_bilevel(game: &BilevelGame, max_iters: usize) -> Result<BilevelSolution> {
    let g = game.game();
    let nu = vec![Nu::identity(g.m(), g.n() as u32); g.n()];
    let lift = solve_via_theorem3(g, &nu, max_iters)?;
    let loads = load_of(g, &lift.profile)?.0;
    let attack = if g.m() == 0 { Vec::new() } else { attack_allocation(&loads, game.budget())? };
    Ok(BilevelSolution { profile: lift.profile, certificate: lift.certificate, loads, attack })
}

/// Which branch of the exchange argument applies to `(t, u, z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AuditCase {
    /// `t = u`.
    Identity,
    /// `s` is not a maximizer of `u + z`.
    Case1,
    /// `s` maximizes both `t + z` and `u + z`.
    Case2a,
    /// `s` maximizes only `u + z`, and no maximizer of `t + z` lies in `t`.
    Case2bEmpty,
    /// As above with some maximizer in `t`, and `r` not a maximizer.
    Case2bRNotMax,
    /// As above with `r` a maximizer of `t + z`.
    Case2bRMax,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseAudit {
    pub case: AuditCase,
    /// `(r, s)` with `u = t + 1_s - 1_r`; `None` for the identity.
    pub exchange: Option<(usize, usize)>,
    /// `t_r + z_r ≤ u_s + z_s`.
    pub guard_holds: bool,
    /// `Σ_{g ∈ supp t} κ*_g(t + z)`.
    pub lhs: Rational,
    /// `Σ_{g ∈ supp u} κ*_g(u + z)`.
    pub rhs: Rational,
    pub holds: bool,
}

fn plus(s: &Strategy, z: &[Rational]) -> Vec<Rational> {
    z.iter().enumerate().map(|(g, v)| if s.contains(g) { *v + Rational::one() } else { *v }).collect()
}

fn support_share(s: &Strategy, k: &[Rational]) -> Rational {
    s.iter_support().map(|g| k[g]).sum()
}

/// Classifies `(t, u, z)` by the exchange argument's cases and checks
/// `Σ_{supp t} κ*(t + z) ≤ Σ_{supp u} κ*(u + z)`.
pub fn case_audit(t: &Strategy, u: &Strategy, z: &[Rational], budget: Rational) -> Result<CaseAudit> {
    let m = t.dim();
    if u.dim() != m || z.len() != m {
        return Err(Error::Structural("t, u and z must have the same dimension".into()));
    }
    let removed: Vec<usize> = t.iter_support().filter(|&g| !u.contains(g)).collect();
    let added: Vec<usize> = u.iter_support().filter(|&g| !t.contains(g)).collect();
    let tz = plus(t, z);
    let uz = plus(u, z);
    let lhs = support_share(t, &attack_allocation(&tz, budget)?);
    let rhs = support_share(u, &attack_allocation(&uz, budget)?);
    let (r, s) = match (removed.as_slice(), added.as_slice()) {
        ([], []) => {
            return Ok(CaseAudit { case: AuditCase::Identity, exchange: None, guard_holds: true, lhs, rhs, holds: lhs <= rhs })
        }
        ([r], [s]) => (*r, *s),
        _ => return Err(Error::Domain("u is not a single exchange of t".into())),
    };
    let st = argmax_set(&tz).expect("non-empty").indices;
    let su = argmax_set(&uz).expect("non-empty").indices;
    let case = if !su.contains(&s) {
        AuditCase::Case1
    } else if st.contains(&s) {
        AuditCase::Case2a
    } else if !st.iter().any(|&g| t.contains(g)) {
        AuditCase::Case2bEmpty
    } else if !st.contains(&r) {
        AuditCase::Case2bRNotMax
    } else {
        AuditCase::Case2bRMax
    };
    Ok(CaseAudit { case, exchange: Some((r, s)), guard_holds: tz[r] <= uz[s], lhs, rhs, holds: lhs <= rhs })
}
