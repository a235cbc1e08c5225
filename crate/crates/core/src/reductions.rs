//! Single-player instances whose zero-cost strategies encode 3-SAT
//! solutions and forbidden-pairs paths, plus an exhaustive check of that
//! equivalence.

use crate::costs::{CostModel, Tabulated};
use crate::dynamics::{verify_pne, Certificate};
use crate::error::{Error, Result};
use crate::game::{Game, LoadVector, Player, Profile, Strategy, StrategySpace};
use crate::matroid::MatroidDesc;
use crate::rational::{Rational, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    /// 0-based variable index.
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn contradicts(&self, other: &Literal) -> bool {
        self.var == other.var && self.positive != other.positive
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatInstance {
    pub n_vars: usize,
    pub clauses: Vec<[Literal; 3]>,
}

impl SatInstance {
    pub fn new(n_vars: usize, clauses: Vec<[Literal; 3]>) -> Result<Self> {
        for (i, c) in clauses.iter().enumerate() {
            if let Some(l) = c.iter().find(|l| l.var >= n_vars) {
                return Err(Error::Structural(format!(
                    "clause {i} uses variable {} but there are {n_vars}",
                    l.var + 1
                )));
            }
        }
        Ok(SatInstance { n_vars, clauses })
    }

    /// Literals in resource order: clause-major, position-minor.
    pub fn literals(&self) -> Vec<Literal> {
        self.clauses.iter().flat_map(|c| c.iter().copied()).collect()
    }
}

/// Parses DIMACS CNF; every clause must have exactly three literals.
pub fn parse_dimacs(text: &str) -> Result<SatInstance> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["p", "cnf", v, c] => {
                    let v = v.parse().map_err(|_| Error::Structural(format!("line {}: bad variable count", ln + 1)))?;
                    let c = c.parse().map_err(|_| Error::Structural(format!("line {}: bad clause count", ln + 1)))?;
                    header = Some((v, c));
                }
                _ => return Err(Error::Structural(format!("line {}: malformed header", ln + 1))),
            }
            continue;
        }
        let (n_vars, _) = header.ok_or_else(|| Error::Structural("clause before the `p cnf` header".into()))?;
        for tok in line.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| Error::Structural(format!("line {}: bad literal {tok:?}", ln + 1)))?;
            if v == 0 {
                let lits: [Literal; 3] = current.as_slice().try_into().map_err(|_| {
                    Error::Structural(format!(
                        "clause {} has {} literals, expected 3",
                        clauses.len() + 1,
                        current.len()
                    ))
                })?;
                clauses.push(lits);
                current.clear();
                continue;
            }
            let var = v.unsigned_abs() as usize;
            if var > n_vars {
                return Err(Error::Structural(format!("line {}: variable {var} exceeds {n_vars}", ln + 1)));
            }
            current.push(Literal { var: var - 1, positive: v > 0 });
        }
    }
    let (n_vars, n_clauses) = header.ok_or_else(|| Error::Structural("missing `p cnf` header".into()))?;
    if !current.is_empty() {
        return Err(Error::Structural("last clause is not terminated by 0".into()));
    }
    if clauses.len() != n_clauses {
        return Err(Error::Structural(format!("header announces {n_clauses} clauses, found {}", clauses.len())));
    }
    SatInstance::new(n_vars, clauses)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReductionConfig {
    /// Load bound of the generated tables (single player, so 1 suffices).
    pub table_bound: u32,
    /// Cap on enumerated s-t paths.
    pub path_cap: usize,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        ReductionConfig { table_bound: 1, path_cap: 100_000 }
    }
}

/// `c_r(x) = Σ_{s ∈ N(r)} x_s` as tables with `B_r = N(r)`.
fn sum_of_neighbors(m: usize, bound: u32, neighborhoods: Vec<Vec<usize>>) -> Result<CostModel> {
    let nb = neighborhoods.clone();
    let t = Tabulated::from_fn(m, bound, neighborhoods, |r, x| {
        nb[r].iter().map(|&s| Rational::from(x[s])).sum()
    })?;
    Ok(CostModel::Tabulated(t))
}

/// One resource per literal occurrence; the player picks one literal per
/// clause and pays for every picked literal that contradicts another pick.
pub fn reduce_sat(inst: &SatInstance, config: &ReductionConfig) -> Result<Game> {
    if inst.clauses.is_empty() {
        return Err(Error::Structural("the instance has no clauses".into()));
    }
    let lits = inst.literals();
    let m = lits.len();
    let neighborhoods: Vec<Vec<usize>> = lits
        .iter()
        .map(|l| (0..m).filter(|&s| lits[s].contradicts(l)).collect())
        .collect();
    let cost = sum_of_neighbors(m, config.table_bound, neighborhoods)?;
    let blocks = (0..inst.clauses.len()).map(|i| vec![3 * i, 3 * i + 1, 3 * i + 2]).collect();
    let space = MatroidDesc::Partition { blocks, quotas: vec![1; inst.clauses.len()] };
    Game::new(m, vec![Player::unit(StrategySpace::MatroidBases(space))], cost)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForbiddenPairsInstance {
    pub n_vertices: usize,
    /// Directed edges `(from, to)`; edge `k` becomes resource `k`.
    pub edges: Vec<(usize, usize)>,
    pub s: usize,
    pub t: usize,
    /// Pairs of edge indices.
    pub pairs: Vec<(usize, usize)>,
}

impl ForbiddenPairsInstance {
    pub fn validate(&self) -> Result<()> {
        let n = self.n_vertices;
        if self.s >= n || self.t >= n || self.s == self.t {
            return Err(Error::Structural(format!("s = {} and t = {} must be distinct vertices below {n}", self.s, self.t)));
        }
        if let Some((k, _)) = self.edges.iter().enumerate().find(|(_, &(a, b))| a >= n || b >= n) {
            return Err(Error::Structural(format!("edge {k} leaves the vertex range")));
        }
        for (k, &(a, b)) in self.pairs.iter().enumerate() {
            if a == b || a >= self.edges.len() || b >= self.edges.len() {
                return Err(Error::Structural(format!("pair {k} must name two distinct existing edges")));
            }
        }
        Ok(())
    }
}

/// Edge sets of all simple directed s-t paths, in DFS order.
pub fn simple_paths(inst: &ForbiddenPairsInstance, cap: usize) -> Result<Vec<Vec<usize>>> {
    inst.validate()?;
    let mut out_edges = vec![Vec::new(); inst.n_vertices];
    for (k, &(a, _)) in inst.edges.iter().enumerate() {
        out_edges[a].push(k);
    }
    let mut paths = Vec::new();
    let mut visited = vec![false; inst.n_vertices];
    let mut stack: Vec<usize> = Vec::new();
    fn dfs(
        v: usize,
        inst: &ForbiddenPairsInstance,
        out: &[Vec<usize>],
        visited: &mut [bool],
        stack: &mut Vec<usize>,
        paths: &mut Vec<Vec<usize>>,
        cap: usize,
    ) -> Result<()> {
        if v == inst.t {
            if paths.len() == cap {
                return Err(Error::capacity("s-t paths", cap as u64));
            }
            paths.push(stack.clone());
            return Ok(());
        }
        visited[v] = true;
        for &k in &out[v] {
            let w = inst.edges[k].1;
            if !visited[w] {
                stack.push(k);
                dfs(w, inst, out, visited, stack, paths, cap)?;
                stack.pop();
            }
        }
        visited[v] = false;
        Ok(())
    }
    dfs(inst.s, inst, &out_edges, &mut visited, &mut stack, &mut paths, cap)?;
    Ok(paths)
}

/// Resources are edges; a paired edge costs the load of its partners.
pub fn reduce_forbidden_pairs(inst: &ForbiddenPairsInstance, config: &ReductionConfig) -> Result<Game> {
    let paths = simple_paths(inst, config.path_cap)?;
    if paths.is_empty() {
        return Err(Error::Structural("there is no s-t path".into()));
    }
    let m = inst.edges.len();
    let mut neighborhoods = vec![Vec::new(); m];
    for &(a, b) in &inst.pairs {
        neighborhoods[a].push(b);
        neighborhoods[b].push(a);
    }
    for nb in &mut neighborhoods {
        nb.sort_unstable();
        nb.dedup();
    }
    let cost = sum_of_neighbors(m, config.table_bound, neighborhoods)?;
    let strategies = paths
        .iter()
        .map(|p| Strategy::from_support(m, p))
        .collect::<Result<Vec<_>>>()?;
    Game::new(m, vec![Player::unit(StrategySpace::explicit(strategies))], cost)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionCheck {
    pub strategies: usize,
    pub min_cost: Value,
    pub max_cost: Value,
    pub zero_cost_exists: bool,
    pub oracle_answer: bool,
    /// Verdict of `verify_pne` on a max-cost strategy.
    pub max_is_pne: bool,
    /// Whether some strategy is strictly cheaper than the max-cost one.
    pub improvable: bool,
    pub passed: bool,
}

/// Checks (min cost is 0 ⇔ `oracle_answer`) and that `verify_pne` on a
/// max-cost strategy agrees with whether a strictly cheaper one exists.
pub fn check_reduction(game: &Game, oracle_answer: bool, cap: usize) -> Result<ReductionCheck> {
    if game.n() != 1 {
        return Err(Error::Usage(format!("reductions produce one player, got {}", game.n())));
    }
    let list = game.player(0).space.enumerate(game.m(), cap)?;
    let mut costs = Vec::with_capacity(list.len());
    for s in &list {
        let mut l = LoadVector::zeros(game.m());
        l.add_strategy(s, game.player(0).weight);
        costs.push(game.cost_at(&l, 0, s)?);
    }
    let mut min = 0;
    let mut max = 0;
    for k in 1..costs.len() {
        if costs[k].less_than(&costs[min]) {
            min = k;
        }
        if costs[max].less_than(&costs[k]) {
            max = k;
        }
    }
    let zero_cost_exists = costs[min].same(&Value::zero());
    let improvable = costs[min].less_than(&costs[max]);
    let cert = verify_pne(game, &Profile::new(vec![list[max].clone()]), cap)?;
    let max_is_pne = matches!(cert, Certificate::IsPne);
    Ok(ReductionCheck {
        strategies: list.len(),
        min_cost: costs[min],
        max_cost: costs[max],
        zero_cost_exists,
        oracle_answer,
        max_is_pne,
        improvable,
        passed: zero_cost_exists == oracle_answer && max_is_pne != improvable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(v: i64) -> Literal {
        Literal { var: v.unsigned_abs() as usize - 1, positive: v > 0 }
    }

    fn sat(n: usize, cs: &[[i64; 3]]) -> SatInstance {
        SatInstance::new(n, cs.iter().map(|c| [lit(c[0]), lit(c[1]), lit(c[2])]).collect()).unwrap()
    }

    fn check(game: &Game, oracle: bool) -> ReductionCheck {
        let c = check_reduction(game, oracle, 10_000).unwrap();
        assert!(c.passed, "{c:?}");
        c
    }

    #[test]
    fn single_clause_is_free() {
        let g = reduce_sat(&sat(1, &[[1, 1, 1]]), &ReductionConfig::default()).unwrap();
        assert_eq!(g.m(), 3);
        let c = check(&g, true);
        assert_eq!(c.strategies, 3);
        assert!(c.max_cost.same(&Value::zero()));
    }

    #[test]
    fn contradictory_clauses() {
        let g = reduce_sat(&sat(1, &[[1, 1, 1], [-1, -1, -1]]), &ReductionConfig::default()).unwrap();
        let c = check(&g, false);
        assert_eq!(c.strategies, 9);
        assert!(Value::zero().less_than(&c.min_cost));
    }

    #[test]
    fn satisfiable_pair() {
        let g = reduce_sat(&sat(3, &[[1, 2, 3], [-1, -2, 3]]), &ReductionConfig::default()).unwrap();
        check(&g, true);
    }

    #[test]
    fn dimacs() {
        let inst = parse_dimacs("c hi\np cnf 3 2\n1 -2 3 0\n-1 2\n 3 0\n").unwrap();
        assert_eq!(inst, sat(3, &[[1, -2, 3], [-1, 2, 3]]));
        assert!(parse_dimacs("p cnf 2 1\n1 2 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 1\n1 2 3 0\n").is_err());
        assert!(parse_dimacs("1 2 3 0\n").is_err());
    }

    fn diamond(pairs: Vec<(usize, usize)>) -> ForbiddenPairsInstance {
        // 0 -> 1 -> 3 and 0 -> 2 -> 3
        ForbiddenPairsInstance { n_vertices: 4, edges: vec![(0, 1), (1, 3), (0, 2), (2, 3)], s: 0, t: 3, pairs }
    }

    #[test]
    fn pairs_without_pairs() {
        let g = reduce_forbidden_pairs(&diamond(vec![]), &ReductionConfig::default()).unwrap();
        let c = check(&g, true);
        assert_eq!(c.strategies, 2);
        assert!(c.max_cost.same(&Value::zero()));
    }

    #[test]
    fn pair_across_paths() {
        let g = reduce_forbidden_pairs(&diamond(vec![(0, 3)]), &ReductionConfig::default()).unwrap();
        check(&g, true);
    }

    #[test]
    fn every_path_blocked() {
        let g = reduce_forbidden_pairs(&diamond(vec![(0, 1), (2, 3)]), &ReductionConfig::default()).unwrap();
        let c = check(&g, false);
        assert!(c.min_cost.same(&Value::Exact(Rational::from_int(2))));
    }

    #[test]
    fn neighborhoods_are_partners() {
        let g = reduce_forbidden_pairs(&diamond(vec![(0, 3)]), &ReductionConfig::default()).unwrap();
        match g.cost() {
            CostModel::Tabulated(t) => {
                assert_eq!(t.neighborhood(0), &[3]);
                assert_eq!(t.neighborhood(3), &[0]);
                assert!(t.neighborhood(1).is_empty());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn path_cap_and_missing_path() {
        let inst = diamond(vec![]);
        let cfg = ReductionConfig { path_cap: 1, ..ReductionConfig::default() };
        assert!(matches!(reduce_forbidden_pairs(&inst, &cfg), Err(Error::Capacity { .. })));
        let dead = ForbiddenPairsInstance { n_vertices: 3, edges: vec![(0, 1)], s: 0, t: 2, pairs: vec![] };
        assert!(reduce_forbidden_pairs(&dead, &ReductionConfig::default()).is_err());
    }
}
