//! Two-player games on four copies of the resource set, with dummy players
//! pinning a background load, that turn a failed consistency identity into
//! a game without pure equilibria.
//!
//! In every gadget the two free players always pay `{A, B}` between them and
//! each can take the other's value by switching; an equilibrium would force
//! `A = B`.

use crate::costs::{compose, CostModel};
use crate::characterize::{Violation, ViolationKind};
use crate::dynamics::{brute_force_pne, BruteForceConfig, Certificate};
use crate::error::{Error, Result};
use crate::game::{load_of, Game, LoadVector, Player, Profile, Strategy, StrategySpace};
use crate::rational::{Rational, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GadgetLemma {
    /// Discrete Jacobian symmetry at `x`.
    L3,
    /// Cross-linearity condition (a) at `x`, `x_r > 0`.
    L4,
    /// Three-resource condition at `x`, `x_r > 0`.
    L5,
    /// Diagonal-Hessian condition between `point` and `other_point`; resolved
    /// to the first L4/L5 step that breaks on the monotone path between them.
    L6Chain,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GadgetSpec {
    pub lemma: GadgetLemma,
    pub base_cost: CostModel,
    pub point: Vec<Rational>,
    pub other_point: Option<Vec<Rational>>,
    pub resources: (usize, usize, Option<usize>),
    /// Free-player weight for the weighted variant; `None` builds the
    /// unweighted gadget with unit dummies.
    pub epsilon: Option<Rational>,
}

impl GadgetSpec {
    pub fn new(lemma: GadgetLemma, base_cost: CostModel, point: Vec<Rational>, r: usize, s: usize) -> Self {
        GadgetSpec { lemma, base_cost, point, other_point: None, resources: (r, s, None), epsilon: None }
    }

    pub fn with_t(mut self, t: usize) -> Self {
        self.resources.2 = Some(t);
        self
    }

    pub fn with_epsilon(mut self, eps: Rational) -> Self {
        self.epsilon = Some(eps);
        self
    }

    pub fn m(&self) -> usize {
        self.point.len()
    }

    fn eps(&self) -> Rational {
        self.epsilon.unwrap_or_else(Rational::one)
    }
}

fn unit(m: usize, idx: &[usize], eps: Rational) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); m];
    for &r in idx {
        v[r] += eps;
    }
    v
}

fn add(x: &[Rational], y: &[Rational]) -> Vec<Rational> {
    x.iter().zip(y).map(|(a, b)| *a + *b).collect()
}

fn sub(x: &[Rational], y: &[Rational]) -> Vec<Rational> {
    x.iter().zip(y).map(|(a, b)| *a - *b).collect()
}

fn validate(spec: &GadgetSpec) -> Result<()> {
    let m = spec.m();
    if m == 0 {
        return Err(Error::Structural("gadget point is empty".into()));
    }
    if let Some(k) = spec.base_cost.n_resources() {
        if k != m {
            return Err(Error::Structural(format!("point has {m} coordinates, cost has {k} resources")));
        }
    }
    let (r, s, t) = spec.resources;
    if r >= m || s >= m || r == s {
        return Err(Error::Structural(format!("resources r = {r}, s = {s} must be distinct and < {m}")));
    }
    match (spec.lemma, t) {
        (GadgetLemma::L5, None) => {
            return Err(Error::Structural("the three-resource gadget needs t".into()))
        }
        (GadgetLemma::L5, Some(t)) if t >= m || t == r || t == s => {
            return Err(Error::Structural(format!("t = {t} must differ from r, s and be < {m}")))
        }
        _ => {}
    }
    if let Some(e) = spec.epsilon {
        if !e.is_positive() {
            return Err(Error::Structural("ε must be positive".into()));
        }
    }
    if spec.point.iter().any(|v| v.is_negative()) {
        return Err(Error::Structural("gadget point must be non-negative".into()));
    }
    Ok(())
}

/// Load contributed by the dummies on each original resource.
fn background(spec: &GadgetSpec) -> Result<Vec<Rational>> {
    let (r, _, _) = spec.resources;
    let eps = spec.eps();
    let bg = match spec.lemma {
        GadgetLemma::L3 => spec.point.clone(),
        GadgetLemma::L4 | GadgetLemma::L5 => sub(&spec.point, &unit(spec.m(), &[r], eps)),
        GadgetLemma::L6Chain => unreachable!("chains are resolved before building"),
    };
    if bg.iter().any(|v| v.is_negative()) {
        return Err(Error::Domain(format!(
            "point {:?} has x_r below the free-player weight {eps}",
            spec.point
        )));
    }
    if spec.epsilon.is_none() && bg.iter().any(|v| !v.is_integer()) {
        return Err(Error::Domain("the unweighted gadget needs an integer point".into()));
    }
    Ok(bg)
}

/// Free-player strategy sets as lists of `(copy, resource)` with copies 1..=4.
fn free_strategies(lemma: GadgetLemma, (r, s, t): (usize, usize, Option<usize>)) -> [Vec<Vec<(usize, usize)>>; 2] {
    match lemma {
        GadgetLemma::L3 => [
            vec![vec![(1, r), (2, s)], vec![(3, s), (4, r)]],
            vec![vec![(1, s), (3, r)], vec![(2, r), (4, s)]],
        ],
        GadgetLemma::L4 => [
            vec![vec![(1, r), (1, s), (2, r)], vec![(3, r), (4, r), (4, s)]],
            vec![vec![(1, r), (3, r), (3, s)], vec![(2, r), (2, s), (4, r)]],
        ],
        GadgetLemma::L5 => {
            let t = t.expect("validated");
            [
                vec![vec![(1, r), (2, s), (2, t)], vec![(3, s), (3, t), (4, r)]],
                vec![vec![(1, s), (1, t), (3, r)], vec![(2, r), (4, s), (4, t)]],
            ]
        }
        GadgetLemma::L6Chain => unreachable!("chains are resolved before building"),
    }
}

/// Index of copy `k` (1-based) of resource `t`.
pub fn copy_index(m: usize, k: usize, t: usize) -> usize {
    (k - 1) * m + t
}

/// The gadget game: `4m` resources with cost `c ⊕ c ⊕ c ⊕ c`, free players 0
/// and 1, then the dummies in resource order.
pub fn build_gadget(spec: &GadgetSpec) -> Result<Game> {
    validate(spec)?;
    if spec.lemma == GadgetLemma::L6Chain {
        return build_gadget(&resolve_chain(spec)?);
    }
    let m = spec.m();
    let big = 4 * m;
    let bg = background(spec)?;
    let cost = compose(&vec![spec.base_cost.clone(); 4])?;
    let eps = spec.eps();
    let mut players = Vec::new();
    for sets in free_strategies(spec.lemma, spec.resources) {
        let list = sets
            .iter()
            .map(|set| {
                let idx: Vec<usize> = set.iter().map(|&(k, t)| copy_index(m, k, t)).collect();
                Strategy::from_support(big, &idx)
            })
            .collect::<Result<Vec<_>>>()?;
        players.push(Player::new(eps, StrategySpace::explicit(list)));
    }
    for (t, load) in bg.iter().enumerate() {
        if load.is_zero() {
            continue;
        }
        let all_copies: Vec<usize> = (1..=4).map(|k| copy_index(m, k, t)).collect();
        let space = StrategySpace::explicit(vec![Strategy::from_support(big, &all_copies)?]);
        match spec.epsilon {
            None => {
                let count = load.to_u32().expect("integer background");
                players.extend((0..count).map(|_| Player::unit(space.clone())));
            }
            Some(_) => players.push(Player::new(*load, space)),
        }
    }
    Game::new(big, players, cost)
}

fn eval(c: &CostModel, x: &[Rational], r: usize) -> Result<Value> {
    Ok(c.eval(x, None)?[r])
}

/// The two values the free players pay, from the closed forms for each
/// construction (scaled by the free-player weight).
pub fn expected_ab(spec: &GadgetSpec) -> Result<(Value, Value)> {
    validate(spec)?;
    if spec.lemma == GadgetLemma::L6Chain {
        return expected_ab(&resolve_chain(spec)?);
    }
    let m = spec.m();
    let e = spec.eps();
    let c = &spec.base_cost;
    let (r, s, t) = spec.resources;
    let x = &spec.point;
    let p = |idx: &[usize], base: &[Rational]| add(base, &unit(m, idx, e));
    let (a, b) = match spec.lemma {
        GadgetLemma::L3 => (
            eval(c, &p(&[r, s], x), r)? + eval(c, &p(&[s], x), s)?,
            eval(c, &p(&[r], x), r)? + eval(c, &p(&[r, s], x), s)?,
        ),
        GadgetLemma::L4 => (
            eval(c, &p(&[r, s], x), r)? + eval(c, &p(&[r, s], x), s)? + eval(c, x, r)?,
            eval(c, &p(&[s], x), r)? + eval(c, &p(&[s], x), s)? + eval(c, &p(&[r, s], x), r)?,
        ),
        GadgetLemma::L5 => {
            let t = t.expect("validated");
            let xp = sub(x, &unit(m, &[r], e));
            (
                eval(c, &p(&[r, s, t], &xp), r)? + eval(c, &p(&[s, t], &xp), s)? + eval(c, &p(&[s, t], &xp), t)?,
                eval(c, &p(&[r], &xp), r)? + eval(c, &p(&[r, s, t], &xp), s)? + eval(c, &p(&[r, s, t], &xp), t)?,
            )
        }
        GadgetLemma::L6Chain => unreachable!(),
    };
    Ok((a.scale(e), b.scale(e)))
}

/// `c_r(p + ε1_s) - c_r(p)`.
fn diff(c: &CostModel, p: &[Rational], r: usize, s: usize, e: Rational) -> Result<Value> {
    let m = p.len();
    Ok(eval(c, &add(p, &unit(m, &[s], e)), r)? - eval(c, p, r)?)
}

/// Walks from `point` down to `min(point, other)` and up to `other` in unit
/// steps; the first step that changes `c_r(· + 1_s) - c_r(·)` names the
/// broken local condition at its lower end.
fn chain_break(spec: &GadgetSpec) -> Result<(ViolationKind, Vec<Rational>, Option<usize>)> {
    let (r, s, _) = spec.resources;
    let c = &spec.base_cost;
    let e = spec.eps();
    let x = &spec.point;
    let y = spec
        .other_point
        .as_ref()
        .ok_or_else(|| Error::Structural("a chain gadget needs other_point".into()))?;
    if y.len() != x.len() {
        return Err(Error::Structural("points of different dimension".into()));
    }
    let m = x.len();
    let lo: Vec<Rational> = x.iter().zip(y).map(|(a, b)| *a.min(b)).collect();
    let mut path = vec![x.clone()];
    let mut cur = x.clone();
    for t in 0..m {
        while cur[t] > lo[t] {
            cur[t] -= e;
            path.push(cur.clone());
        }
    }
    for t in 0..m {
        while cur[t] < y[t] {
            cur[t] += e;
            path.push(cur.clone());
        }
    }
    if &cur != y {
        return Err(Error::Domain("points do not differ by multiples of ε".into()));
    }
    for w in path.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        if !diff(c, p, r, s, e)?.same(&diff(c, q, r, s, e)?) {
            let (lower, upper) = if p < q { (p, q) } else { (q, p) };
            let t = (0..m).find(|&k| lower[k] != upper[k]).expect("adjacent points differ");
            let kind = if t == r {
                ViolationKind::CrossLinearityA
            } else if t == s {
                ViolationKind::CrossLinearityB
            } else {
                ViolationKind::ThreeResource
            };
            return Ok((kind, lower.clone(), (kind == ViolationKind::ThreeResource).then_some(t)));
        }
    }
    Err(Error::Domain("the difference agrees at both ends of the chain".into()))
}

fn resolve_chain(spec: &GadgetSpec) -> Result<GadgetSpec> {
    let (kind, q, t) = chain_break(spec)?;
    let (r, s, _) = spec.resources;
    candidates(&spec.base_cost, kind, (r, s, t), &q, None, spec.epsilon)?
        .into_iter()
        .next()
        .ok_or_else(|| Error::Internal("empty candidate list".into()))
}

/// The gadget for a failed identity, followed by fallbacks at the points
/// where the primary gadget relies on Jacobian symmetry.
fn candidates(
    c: &CostModel,
    kind: ViolationKind,
    (r, s, t): (usize, usize, Option<usize>),
    x: &[Rational],
    other: Option<&[Rational]>,
    epsilon: Option<Rational>,
) -> Result<Vec<GadgetSpec>> {
    let m = x.len();
    let e = epsilon.unwrap_or_else(Rational::one);
    let mk = |lemma, point: Vec<Rational>, r, s, t: Option<usize>| GadgetSpec {
        lemma,
        base_cost: c.clone(),
        point,
        other_point: None,
        resources: (r, s, t),
        epsilon,
    };
    let x = x.to_vec();
    Ok(match kind {
        ViolationKind::JacobianSymmetry | ViolationKind::WeightedJacobian => {
            vec![mk(GadgetLemma::L3, x, r, s, None)]
        }
        ViolationKind::CrossLinearityA => vec![
            mk(GadgetLemma::L4, x.clone(), r, s, None),
            mk(GadgetLemma::L3, x, r, s, None),
        ],
        ViolationKind::CrossLinearityB => {
            let swapped = sub(&add(&x, &unit(m, &[s], e)), &unit(m, &[r], e));
            let below = sub(&x, &unit(m, &[r], e));
            vec![mk(GadgetLemma::L4, swapped, s, r, None), mk(GadgetLemma::L3, below, r, s, None)]
        }
        ViolationKind::ThreeResource => {
            let t = t.ok_or_else(|| Error::Structural("three-resource violation without t".into()))?;
            let xp = sub(&x, &unit(m, &[r], e));
            vec![
                mk(GadgetLemma::L5, x.clone(), r, s, Some(t)),
                mk(GadgetLemma::L3, add(&xp, &unit(m, &[s], e)), r, t, None),
                mk(GadgetLemma::L3, add(&xp, &unit(m, &[t], e)), r, s, None),
            ]
        }
        ViolationKind::DiagonalHessian => {
            let other = other.ok_or_else(|| Error::Structural("diagonal violation without second point".into()))?;
            let chain = GadgetSpec {
                lemma: GadgetLemma::L6Chain,
                base_cost: c.clone(),
                point: x,
                other_point: Some(other.to_vec()),
                resources: (r, s, None),
                epsilon,
            };
            let (k, q, t) = chain_break(&chain)?;
            candidates(c, k, (r, s, t), &q, None, epsilon)?
        }
        other => {
            return Err(Error::Unsupported(format!(
                "no gadget construction for {other:?} violations"
            )))
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryWitness {
    pub a_value: Value,
    pub b_value: Value,
    /// Deviations realizing the swap in the first enumerated profile.
    pub swap_strategies: (Strategy, Strategy),
    pub profiles_checked: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AbSymmetry {
    Symmetric(SymmetryWitness),
    NotSymmetric { profile: Profile, reason: String },
}

/// Checks that in every profile players `i` and `j` pay `{A, B}` and each can
/// obtain the other's current cost by a unilateral deviation.
pub fn check_ab_symmetry(game: &Game, i: usize, j: usize, cap: u64) -> Result<AbSymmetry> {
    if i >= game.n() || j >= game.n() || i == j {
        return Err(Error::Usage(format!("players {i} and {j} must be distinct and in range")));
    }
    let table = game.strategy_table(usize::try_from(cap).unwrap_or(usize::MAX))?;
    let mut total: u64 = 1;
    for l in &table {
        total = total
            .checked_mul(l.len() as u64)
            .filter(|&t| t <= cap)
            .ok_or_else(|| Error::capacity("profiles for the symmetry check", cap))?;
    }
    let cost_with = |others: &LoadVector, k: usize, y: &Strategy| -> Result<Value> {
        let mut l = others.clone();
        l.add_strategy(y, game.player(k).weight);
        game.cost_at(&l, k, y)
    };
    let mut ab: Option<(Value, Value)> = None;
    let mut swap: Option<(Strategy, Strategy)> = None;
    for idx in 0..total {
        let mut rem = idx;
        let mut choices = vec![Strategy::empty(0); game.n()];
        for k in (0..game.n()).rev() {
            let n = table[k].len() as u64;
            choices[k] = table[k][(rem % n) as usize].clone();
            rem /= n;
        }
        let x = Profile::new(choices);
        let loads = load_of(game, &x)?;
        let pi = game.cost_at(&loads, i, x.get(i))?;
        let pj = game.cost_at(&loads, j, x.get(j))?;
        let (a, b) = *ab.get_or_insert((pi, pj));
        if !((pi.same(&a) && pj.same(&b)) || (pi.same(&b) && pj.same(&a))) {
            return Ok(AbSymmetry::NotSymmetric {
                profile: x,
                reason: format!("costs ({pi}, {pj}) are not ({a}, {b}) in either order"),
            });
        }
        let mut oi = loads.clone();
        oi.remove_strategy(x.get(i), game.player(i).weight);
        let mut oj = loads.clone();
        oj.remove_strategy(x.get(j), game.player(j).weight);
        let mut yi = None;
        for y in &table[i] {
            if cost_with(&oi, i, y)?.same(&pj) {
                yi = Some(y.clone());
                break;
            }
        }
        let mut yj = None;
        for y in &table[j] {
            if cost_with(&oj, j, y)?.same(&pi) {
                yj = Some(y.clone());
                break;
            }
        }
        match (yi, yj) {
            (Some(a), Some(b)) => {
                swap.get_or_insert((a, b));
            }
            _ => {
                return Ok(AbSymmetry::NotSymmetric {
                    profile: x,
                    reason: "no unilateral deviation swaps the two costs".into(),
                })
            }
        }
    }
    let (a_value, b_value) = ab.ok_or_else(|| Error::Structural("game has no profiles".into()))?;
    Ok(AbSymmetry::Symmetric(SymmetryWitness {
        a_value,
        b_value,
        swap_strategies: swap.expect("at least one profile"),
        profiles_checked: total,
    }))
}

/// A game without pure equilibria derived from a consistency violation.
#[derive(Clone, Debug, PartialEq)]
pub struct Counterexample {
    pub game: Game,
    pub certificate: Certificate,
    pub spec: GadgetSpec,
    pub symmetry: SymmetryWitness,
}

const SYMMETRY_CAP: u64 = 1 << 20;

/// Builds the gadget matching the violated identity, confirms `(A, B)`
/// symmetry with `A != B`, and certifies by exhaustive search that no pure
/// equilibrium exists.
pub fn violation_to_counterexample(c: &CostModel, v: &Violation) -> Result<Counterexample> {
    let list = candidates(c, v.kind, (v.r, v.s, v.t), &v.point, v.other_point.as_deref(), v.epsilon)?;
    for spec in list {
        let game = match build_gadget(&spec) {
            Ok(g) => g,
            Err(Error::Domain(_)) => continue,
            Err(e) => return Err(e),
        };
        let symmetry = match check_ab_symmetry(&game, 0, 1, SYMMETRY_CAP)? {
            AbSymmetry::Symmetric(w) => w,
            AbSymmetry::NotSymmetric { profile, reason } => {
                return Err(Error::Internal(format!(
                    "gadget {:?} is not (A, B)-symmetric at {profile:?}: {reason}",
                    spec.lemma
                )))
            }
        };
        if symmetry.a_value.same(&symmetry.b_value) {
            continue;
        }
        let certificate = brute_force_pne(&game, &BruteForceConfig::default())?;
        if let Certificate::PneFound { profile } = &certificate {
            return Err(Error::Internal(format!(
                "(A, B)-symmetric gadget with A != B has an equilibrium {profile:?}"
            )));
        }
        return Ok(Counterexample { game, certificate, spec, symmetry });
    }
    Err(Error::Internal(format!("no gadget separates A from B for {:?}", v.kind)))
}
