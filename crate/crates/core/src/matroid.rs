//! Matroid strategy spaces: basis membership and enumeration, single-element
//! exchange paths, greedy best responses, local monotonicity and the lift of
//! separable equilibria to non-separable costs.

use std::collections::BTreeMap;

use crate::costs::CostModel;
use crate::dynamics::{
    brute_force_pne, run_best_response_dynamics, verify_pne, BruteForceConfig, Certificate,
    DynamicsConfig,
};
use crate::error::{Error, Result};
use crate::game::{Game, Player, Profile, Strategy, StrategySpace};
use crate::rational::{Rational, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphEdge {
    pub u: usize,
    pub v: usize,
    pub resource: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatroidDesc {
    /// All `k`-subsets of the resources.
    Uniform { k: usize },
    /// Exactly `quotas[j]` resources from `blocks[j]`, nothing outside the blocks.
    Partition { blocks: Vec<Vec<usize>>, quotas: Vec<usize> },
    /// Spanning trees of a connected graph whose edges are resources.
    Graphic { vertices: usize, edges: Vec<GraphEdge> },
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    /// Merges the classes of `a` and `b`; false if they were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

impl MatroidDesc {
    pub fn validate(&self, m: usize) -> Result<()> {
        match self {
            MatroidDesc::Uniform { k } => {
                if *k < 1 || *k > m {
                    return Err(Error::Structural(format!("uniform rank {k} outside [1, {m}]")));
                }
            }
            MatroidDesc::Partition { blocks, quotas } => {
                if blocks.len() != quotas.len() {
                    return Err(Error::Structural("one quota per block required".into()));
                }
                let mut seen = vec![false; m];
                for (j, (b, &q)) in blocks.iter().zip(quotas).enumerate() {
                    if q > b.len() {
                        return Err(Error::Structural(format!(
                            "quota {q} exceeds size {} of block {j}",
                            b.len()
                        )));
                    }
                    for &r in b {
                        if r >= m {
                            return Err(Error::Structural(format!("resource {r} out of range")));
                        }
                        if std::mem::replace(&mut seen[r], true) {
                            return Err(Error::Structural(format!(
                                "resource {r} appears in more than one block"
                            )));
                        }
                    }
                }
                if quotas.iter().sum::<usize>() == 0 {
                    return Err(Error::Structural("partition matroid of rank 0".into()));
                }
            }
            MatroidDesc::Graphic { vertices, edges } => {
                if *vertices < 2 {
                    return Err(Error::Structural("graphic matroid needs at least 2 vertices".into()));
                }
                let mut seen = vec![false; m];
                let mut uf = UnionFind::new(*vertices);
                for e in edges {
                    if e.u >= *vertices || e.v >= *vertices {
                        return Err(Error::Structural(format!("edge {e:?} has an unknown endpoint")));
                    }
                    if e.resource >= m {
                        return Err(Error::Structural(format!("resource {} out of range", e.resource)));
                    }
                    if std::mem::replace(&mut seen[e.resource], true) {
                        return Err(Error::Structural(format!(
                            "resource {} labels more than one edge",
                            e.resource
                        )));
                    }
                    uf.union(e.u, e.v);
                }
                let root = uf.find(0);
                if (1..*vertices).any(|v| uf.find(v) != root) {
                    return Err(Error::Structural("graphic matroid graph is not connected".into()));
                }
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        match self {
            MatroidDesc::Uniform { k } => *k,
            MatroidDesc::Partition { quotas, .. } => quotas.iter().sum(),
            MatroidDesc::Graphic { vertices, .. } => vertices - 1,
        }
    }

    /// Resources that can appear in some basis, ascending.
    pub fn ground_set(&self, m: usize) -> Vec<usize> {
        let mut g: Vec<usize> = match self {
            MatroidDesc::Uniform { .. } => (0..m).collect(),
            MatroidDesc::Partition { blocks, quotas } => blocks
                .iter()
                .zip(quotas)
                .filter(|(_, &q)| q > 0)
                .flat_map(|(b, _)| b.iter().copied())
                .collect(),
            MatroidDesc::Graphic { edges, .. } => edges.iter().map(|e| e.resource).collect(),
        };
        g.sort_unstable();
        g
    }

    /// Whether the support `set` is independent.
    pub fn is_independent(&self, set: &[usize]) -> bool {
        match self {
            MatroidDesc::Uniform { k } => set.len() <= *k,
            MatroidDesc::Partition { blocks, quotas } => {
                let mut count = vec![0usize; blocks.len()];
                for &r in set {
                    match blocks.iter().position(|b| b.contains(&r)) {
                        Some(j) => count[j] += 1,
                        None => return false,
                    }
                }
                count.iter().zip(quotas).all(|(c, q)| c <= q)
            }
            MatroidDesc::Graphic { vertices, edges } => {
                let mut uf = UnionFind::new(*vertices);
                set.iter().all(|&r| match edges.iter().find(|e| e.resource == r) {
                    Some(e) => uf.union(e.u, e.v),
                    None => false,
                })
            }
        }
    }

    pub fn is_basis(&self, v: &Strategy) -> bool {
        let support = v.support();
        support.len() == self.rank() && self.is_independent(&support)
    }

    /// All bases in canonical order; capacity error beyond `cap`.
    pub fn enumerate_bases(&self, m: usize, cap: usize) -> Result<Vec<Strategy>> {
        let ground = self.ground_set(m);
        let k = self.rank();
        let mut out = Vec::new();
        if k > ground.len() {
            return Ok(out);
        }
        if let MatroidDesc::Partition { blocks, quotas } = self {
            return partition_bases(blocks, quotas, m, cap);
        }
        // k-combinations of the ground set in lexicographic order, which is
        // the canonical order for equal-size supports.
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let set: Vec<usize> = idx.iter().map(|&j| ground[j]).collect();
            if self.is_independent(&set) {
                if out.len() == cap {
                    return Err(Error::capacity("matroid bases", cap as u64));
                }
                out.push(Strategy::from_support(m, &set)?);
            }
            let mut pos = k;
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                if idx[pos] < ground.len() - k + pos {
                    break;
                }
            }
            idx[pos] += 1;
            for j in pos + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if items.len() < k {
        return vec![];
    }
    let mut out: Vec<Vec<usize>> = combinations(&items[1..], k - 1)
        .into_iter()
        .map(|mut c| {
            c.insert(0, items[0]);
            c
        })
        .collect();
    out.extend(combinations(&items[1..], k));
    out
}

/// Product of per-block choices, without scanning non-bases.
fn partition_bases(blocks: &[Vec<usize>], quotas: &[usize], m: usize, cap: usize) -> Result<Vec<Strategy>> {
    let mut sets: Vec<Vec<usize>> = vec![vec![]];
    for (b, &q) in blocks.iter().zip(quotas) {
        let mut sorted = b.clone();
        sorted.sort_unstable();
        let choices = combinations(&sorted, q);
        if sets.len().saturating_mul(choices.len()) > cap {
            return Err(Error::capacity("matroid bases", cap as u64));
        }
        sets = sets
            .iter()
            .flat_map(|s| {
                choices.iter().map(move |c| {
                    let mut s = s.clone();
                    s.extend(c);
                    s
                })
            })
            .collect();
    }
    let mut out = sets
        .into_iter()
        .map(|s| Strategy::from_support(m, &s))
        .collect::<Result<Vec<_>>>()?;
    out.sort();
    Ok(out)
}

/// One single-element exchange `b - 1_remove + 1_add`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExchangeStep {
    pub remove: usize,
    pub add: usize,
}

/// A path of single exchanges from basis `t` to basis `u` through bases,
/// removing each element of `t \ u` once and adding each element of `u \ t`
/// once.
pub fn exchange_decompose(desc: &MatroidDesc, t: &Strategy, u: &Strategy) -> Result<Vec<ExchangeStep>> {
    if t.dim() != u.dim() {
        return Err(Error::Structural("bases of different dimension".into()));
    }
    for (name, b) in [("t", t), ("u", u)] {
        if !desc.is_basis(b) {
            return Err(Error::Domain(format!("{name} = {b:?} is not a basis")));
        }
    }
    let out: Vec<usize> = t.iter_support().filter(|&r| !u.contains(r)).collect();
    let inn: Vec<usize> = u.iter_support().filter(|&r| !t.contains(r)).collect();
    let mut steps = Vec::with_capacity(out.len());
    let mut used_out = vec![false; out.len()];
    let mut used_in = vec![false; inn.len()];
    if search_exchanges(desc, t.clone(), &out, &inn, &mut used_out, &mut used_in, &mut steps) {
        Ok(steps)
    } else {
        Err(Error::Internal(format!("no exchange path from {t:?} to {u:?}")))
    }
}

fn search_exchanges(
    desc: &MatroidDesc,
    current: Strategy,
    out: &[usize],
    inn: &[usize],
    used_out: &mut [bool],
    used_in: &mut [bool],
    steps: &mut Vec<ExchangeStep>,
) -> bool {
    if steps.len() == out.len() {
        return true;
    }
    for a in 0..out.len() {
        if used_out[a] {
            continue;
        }
        for b in 0..inn.len() {
            if used_in[b] {
                continue;
            }
            let next = current.exchanged(out[a], inn[b]);
            if !desc.is_basis(&next) {
                continue;
            }
            used_out[a] = true;
            used_in[b] = true;
            steps.push(ExchangeStep { remove: out[a], add: inn[b] });
            if search_exchanges(desc, next, out, inn, used_out, used_in, steps) {
                return true;
            }
            steps.pop();
            used_out[a] = false;
            used_in[b] = false;
        }
    }
    false
}

/// Minimum-weight basis by the matroid greedy algorithm; equal weights are
/// taken in ascending resource order.
pub fn greedy_best_response(desc: &MatroidDesc, m: usize, weights: &[Rational]) -> Result<Strategy> {
    if weights.len() != m {
        return Err(Error::Structural(format!("{} weights for m = {m}", weights.len())));
    }
    let mut order = desc.ground_set(m);
    order.sort_by(|&a, &b| weights[a].cmp(&weights[b]).then(a.cmp(&b)));
    let mut chosen = Vec::with_capacity(desc.rank());
    for r in order {
        chosen.push(r);
        if !desc.is_independent(&chosen) {
            chosen.pop();
        }
        if chosen.len() == desc.rank() {
            break;
        }
    }
    let s = Strategy::from_support(m, &chosen)?;
    if !desc.is_basis(&s) {
        return Err(Error::Structural("matroid has no basis".into()));
    }
    Ok(s)
}

/// Per-resource non-decreasing tables `ν_r : {0..L} -> ℚ` for one type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nu {
    tables: Vec<Vec<Rational>>,
}

impl Nu {
    pub fn new(tables: Vec<Vec<Rational>>) -> Result<Self> {
        for (r, t) in tables.iter().enumerate() {
            if t.is_empty() {
                return Err(Error::Structural(format!("ν table of resource {r} is empty")));
            }
            if t.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::Structural(format!(
                    "ν table of resource {r} is not non-decreasing"
                )));
            }
        }
        Ok(Nu { tables })
    }

    /// `ν_r(x) = x` on `0..=max_load`.
    pub fn identity(m: usize, max_load: u32) -> Self {
        let t: Vec<Rational> = (0..=max_load).map(Rational::from).collect();
        Nu { tables: vec![t; m] }
    }

    pub fn m(&self) -> usize {
        self.tables.len()
    }

    pub fn tables(&self) -> &[Vec<Rational>] {
        &self.tables
    }

    pub fn max_load(&self) -> u32 {
        self.tables.iter().map(|t| t.len() as u32 - 1).min().unwrap_or(0)
    }

    pub fn value(&self, r: usize, x: u32) -> Result<Rational> {
        self.tables[r].get(x as usize).copied().ok_or_else(|| {
            Error::Range(format!("ν table of resource {r} ends before load {x}"))
        })
    }
}

/// A tuple violating the local monotonicity inequality.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityWitness {
    pub type_index: usize,
    pub t: Strategy,
    pub r: usize,
    pub s: usize,
    pub z: Vec<u32>,
    /// `tᵀ c(t + z)`.
    pub lhs: Value,
    /// `uᵀ c(u + z)`.
    pub rhs: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MonotonicityReport {
    Ok { checked: u64 },
    Violated(MonotonicityWitness),
}

/// Checks, for every type `T`, basis `t`, exchange `u = t - 1_r + 1_s` and
/// background `z ∈ {0..L}^m` with `ν_{T,r}(t_r + z_r) <= ν_{T,s}(u_s + z_s)`,
/// that `tᵀ c(t + z) <= uᵀ c(u + z)`.
///
/// The guard compares ν at the total loads on `r` and `s`; see the crate
/// README for why the background is included.
pub fn check_local_monotonicity(
    c: &CostModel,
    types: &[MatroidDesc],
    m: usize,
    max_z: u32,
    nu: &[Nu],
    cap: usize,
) -> Result<MonotonicityReport> {
    if types.len() != nu.len() {
        return Err(Error::Structural("one ν table set per type required".into()));
    }
    let mut checked = 0u64;
    let grid = (max_z as usize + 1)
        .checked_pow(m as u32)
        .ok_or_else(|| Error::capacity("background grid", u64::MAX))?;
    for (ti, (desc, nu_t)) in types.iter().zip(nu).enumerate() {
        desc.validate(m)?;
        if nu_t.m() != m {
            return Err(Error::Structural(format!("ν of type {ti} has {} tables", nu_t.m())));
        }
        let bases = desc.enumerate_bases(m, cap)?;
        let mut z = vec![0u32; m];
        for g in 0..grid {
            decode(g, max_z, &mut z);
            for t in &bases {
                let lt = plus(t, &z);
                let ct = c.eval(&lt, None)?;
                let lhs: Value = t.iter_support().map(|r| ct[r]).sum();
                for r in t.iter_support() {
                    for s in 0..m {
                        if t.contains(s) {
                            continue;
                        }
                        let u = t.exchanged(r, s);
                        if !desc.is_basis(&u) {
                            continue;
                        }
                        let guard = nu_t.value(r, z[r] + 1)? <= nu_t.value(s, z[s] + 1)?;
                        if !guard {
                            continue;
                        }
                        checked += 1;
                        let lu = plus(&u, &z);
                        let cu = c.eval(&lu, None)?;
                        let rhs: Value = u.iter_support().map(|q| cu[q]).sum();
                        if rhs.less_than(&lhs) {
                            return Ok(MonotonicityReport::Violated(MonotonicityWitness {
                                type_index: ti,
                                t: t.clone(),
                                r,
                                s,
                                z: z.clone(),
                                lhs,
                                rhs,
                            }));
                        }
                    }
                }
            }
        }
    }
    Ok(MonotonicityReport::Ok { checked })
}

fn decode(mut idx: usize, max: u32, out: &mut [u32]) {
    let base = max as usize + 1;
    for v in out.iter_mut().rev() {
        *v = (idx % base) as u32;
        idx /= base;
    }
}

fn plus(s: &Strategy, z: &[u32]) -> Vec<Rational> {
    z.iter()
        .enumerate()
        .map(|(r, &v)| Rational::from(v + s.contains(r) as u32))
        .collect()
}

/// Players' bases placed one after another, each greedy against the players
/// already placed.
pub fn sequential_greedy(game: &Game) -> Result<Profile> {
    let nu = match game.cost() {
        CostModel::PlayerSpecificSeparable { nu } => nu,
        _ => return Err(Error::Unsupported("sequential greedy needs a player-specific separable cost".into())),
    };
    let m = game.m();
    let mut loads = vec![0u32; m];
    let mut choices = Vec::with_capacity(game.n());
    for (i, p) in game.players().iter().enumerate() {
        let desc = match &p.space {
            StrategySpace::MatroidBases(d) => d,
            StrategySpace::Explicit(_) => {
                return Err(Error::Unsupported(format!("player {i} has no matroid strategy space")))
            }
        };
        let weights = (0..m)
            .map(|r| {
                nu[i][r].get(loads[r] as usize + 1).copied().ok_or_else(|| {
                    Error::Range(format!("ν table of player {i}, resource {r} too short"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let b = greedy_best_response(desc, m, &weights)?;
        for r in b.iter_support() {
            loads[r] += 1;
        }
        choices.push(b);
    }
    Ok(Profile::new(choices))
}

/// Outcome of [`solve_via_theorem3`].
#[derive(Clone, Debug, PartialEq)]
pub struct LiftResult {
    pub profile: Profile,
    pub certificate: Certificate,
    /// Whether dynamics on the separable game converged (otherwise the profile
    /// came from exhaustive search).
    pub dynamics_converged: bool,
    pub iterations: usize,
}

/// Solves the separable game with costs `ν` on the same strategy spaces and
/// lifts its equilibrium to `game`, verifying it there.
///
/// `nu[i]` is player `i`'s table set (players of one type share theirs).
pub fn solve_via_theorem3(game: &Game, nu: &[Nu], max_iters: usize) -> Result<LiftResult> {
    if !game.is_unweighted() {
        return Err(Error::Unsupported("the lift is stated for unweighted players".into()));
    }
    if nu.len() != game.n() {
        return Err(Error::Structural(format!("{} ν sets for {} players", nu.len(), game.n())));
    }
    for (i, p) in game.players().iter().enumerate() {
        if !matches!(p.space, StrategySpace::MatroidBases(_)) {
            return Err(Error::Unsupported(format!("player {i} has no matroid strategy space")));
        }
        if nu[i].max_load() < game.n() as u32 {
            return Err(Error::Range(format!(
                "ν tables of player {i} must cover loads up to {}",
                game.n()
            )));
        }
    }
    let nu_game = nu_game(game, nu)?;
    let start = sequential_greedy(&nu_game)?;
    let config = DynamicsConfig { max_iters, ..DynamicsConfig::default() };
    let trace = run_best_response_dynamics(&nu_game, &start, &config)?;
    let (profile, converged) = if trace.converged {
        (trace.terminal.clone(), true)
    } else {
        match brute_force_pne(&nu_game, &BruteForceConfig::default())? {
            Certificate::PneFound { profile } => (profile, false),
            other => {
                return Err(Error::Internal(format!(
                    "separable matroid game without equilibrium: {other:?}"
                )))
            }
        }
    };
    match verify_pne(game, &profile, usize::MAX)? {
        Certificate::IsPne => Ok(LiftResult {
            profile,
            certificate: Certificate::IsPne,
            dynamics_converged: converged,
            iterations: trace.iterations,
        }),
        cert => Err(Error::Internal(format!(
            "equilibrium of the ν-game is not an equilibrium of the original game ({cert:?}); \
             ν does not witness local monotonicity"
        ))),
    }
}

/// The separable game `(N, X, ν)` on the same strategy spaces.
pub fn nu_game(game: &Game, nu: &[Nu]) -> Result<Game> {
    let tables = nu.iter().map(|n| n.tables().to_vec()).collect();
    let players = game
        .players()
        .iter()
        .map(|p| Player::unit(p.space.clone()))
        .collect();
    Game::new(game.m(), players, CostModel::PlayerSpecificSeparable { nu: tables })
}

/// Groups players by identical strategy space, in order of first appearance.
pub fn player_types(game: &Game) -> Vec<(MatroidDesc, Vec<usize>)> {
    let mut index: BTreeMap<MatroidDesc, usize> = BTreeMap::new();
    let mut out: Vec<(MatroidDesc, Vec<usize>)> = Vec::new();
    for (i, p) in game.players().iter().enumerate() {
        if let StrategySpace::MatroidBases(d) = &p.space {
            match index.get(d) {
                Some(&k) => out[k].1.push(i),
                None => {
                    index.insert(d.clone(), out.len());
                    out.push((d.clone(), vec![i]));
                }
            }
        }
    }
    out
}
