//! Seeded generators for random instances, used by experiments and tests.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::costs::{CostModel, Matrix, Tabulated};
use crate::error::Result;
use crate::game::{Game, Player, Strategy, StrategySpace};
use crate::matroid::{GraphEdge, MatroidDesc};
use crate::rational::Rational;
use crate::reductions::{ForbiddenPairsInstance, Literal, SatInstance};

#[derive(Clone, Copy, Debug)]
pub struct GameShape {
    pub max_m: usize,
    pub max_n: usize,
    pub max_strategies: usize,
    /// Cost values are drawn from `-coef..=coef`.
    pub coef: i128,
}

impl Default for GameShape {
    fn default() -> Self {
        GameShape { max_m: 4, max_n: 4, max_strategies: 6, coef: 5 }
    }
}

fn int<R: Rng>(rng: &mut R, coef: i128) -> Rational {
    Rational::from_int(rng.gen_range(-coef..=coef))
}

/// Up to `k` distinct non-empty strategies over `m` resources.
pub fn random_explicit_space<R: Rng>(rng: &mut R, m: usize, k: usize) -> StrategySpace {
    let count = rng.gen_range(1..=k.max(1));
    let list = (0..count)
        .map(|_| loop {
            let bits: Vec<bool> = (0..m).map(|_| rng.gen_bool(0.5)).collect();
            if bits.iter().any(|&b| b) {
                break Strategy::new(bits);
            }
        })
        .collect();
    StrategySpace::explicit(list)
}

pub fn random_symmetric<R: Rng>(rng: &mut R, m: usize, coef: i128) -> Matrix {
    let mut a = Matrix::zeros(m);
    for r in 0..m {
        for s in r..m {
            let v = int(rng, coef);
            a.set(r, s, v);
            a.set(s, r, v);
        }
    }
    a
}

/// Unweighted game with `c_r(x) = f_r(x_r) + (A x)_r`, `A` symmetric, `f`
/// tabulated up to the player count.
pub fn random_separable_linear_game<R: Rng>(rng: &mut R, shape: &GameShape) -> Result<Game> {
    let m = rng.gen_range(1..=shape.max_m);
    let n = rng.gen_range(1..=shape.max_n);
    let players = (0..n)
        .map(|_| Player::unit(random_explicit_space(rng, m, shape.max_strategies)))
        .collect();
    let f = (0..m).map(|_| (0..=n).map(|_| int(rng, shape.coef)).collect()).collect();
    let a = random_symmetric(rng, m, shape.coef);
    Game::new(m, players, CostModel::SeparablePlusLinear { f, a })
}

/// A weight `p/q` with `1 <= p <= 3q`, `q <= 4`.
pub fn random_weight<R: Rng>(rng: &mut R) -> Rational {
    let q = rng.gen_range(1..=4);
    Rational::new(rng.gen_range(1..=3 * q), q)
}

/// Weighted game with `c(x) = A x + b`, `A` symmetric.
pub fn random_weighted_affine_game<R: Rng>(rng: &mut R, shape: &GameShape) -> Result<Game> {
    let m = rng.gen_range(1..=shape.max_m);
    let n = rng.gen_range(1..=shape.max_n);
    let players = (0..n)
        .map(|_| Player::new(random_weight(rng), random_explicit_space(rng, m, shape.max_strategies)))
        .collect();
    let a = random_symmetric(rng, m, shape.coef);
    let b = (0..m).map(|_| int(rng, shape.coef)).collect();
    Game::new(m, players, CostModel::Affine { a, b })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFlavor {
    /// Independent uniform entries.
    Uniform,
    /// `c_r(x) = Φ(x) - Φ(x - 1_r)` for random `Φ` where `x_r > 0`: the
    /// Jacobian is symmetric, but cross effects are generally not linear.
    PotentialDifference,
}

/// Full-neighborhood tables on `{0..=L}^m`.
pub fn random_tabulated<R: Rng>(rng: &mut R, m: usize, max_load: u32, coef: i128, flavor: TableFlavor) -> Result<Tabulated> {
    let base = max_load as usize + 1;
    let size = base.pow(m as u32);
    let phi: Vec<Rational> = (0..size).map(|_| int(rng, coef)).collect();
    let index = |x: &[u32]| x.iter().fold(0usize, |acc, &v| acc * base + v as usize);
    let all: Vec<usize> = (0..m).collect();
    Tabulated::from_fn(m, max_load, vec![all; m], |r, x| match flavor {
        TableFlavor::PotentialDifference if x[r] > 0 => {
            let mut y = x.to_vec();
            y[r] -= 1;
            phi[index(x)] - phi[index(&y)]
        }
        _ => int(rng, coef),
    })
}

pub fn random_sat<R: Rng>(rng: &mut R, n_vars: usize, n_clauses: usize) -> SatInstance {
    let clauses = (0..n_clauses)
        .map(|_| {
            [0; 3].map(|_: i32| Literal { var: rng.gen_range(0..n_vars), positive: rng.gen_bool(0.5) })
        })
        .collect();
    SatInstance { n_vars, clauses }
}

/// Random digraph on `n_vertices` with `s = 0`, `t = n - 1` and a planted
/// path, plus `n_pairs` random edge pairs.
pub fn random_forbidden_pairs<R: Rng>(rng: &mut R, n_vertices: usize, density: f64, n_pairs: usize) -> ForbiddenPairsInstance {
    let n = n_vertices.max(2);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut middle: Vec<usize> = (1..n - 1).collect();
    middle.shuffle(rng);
    let keep = rng.gen_range(0..=middle.len());
    let mut planted = vec![0];
    planted.extend(&middle[..keep]);
    planted.push(n - 1);
    for w in planted.windows(2) {
        edges.push((w[0], w[1]));
    }
    for u in 0..n {
        for v in 0..n {
            if u != v && v != 0 && u != n - 1 && !edges.contains(&(u, v)) && rng.gen_bool(density) {
                edges.push((u, v));
            }
        }
    }
    let pairs = if edges.len() < 2 {
        Vec::new()
    } else {
        (0..n_pairs)
            .map(|_| {
                let a = rng.gen_range(0..edges.len());
                let mut b = rng.gen_range(0..edges.len() - 1);
                if b >= a {
                    b += 1;
                }
                (a, b)
            })
            .collect()
    };
    ForbiddenPairsInstance { n_vertices: n, edges, s: 0, t: n - 1, pairs }
}

pub fn random_uniform<R: Rng>(rng: &mut R, m: usize) -> MatroidDesc {
    MatroidDesc::Uniform { k: rng.gen_range(1..=m) }
}

/// Random partition of a random subset of `0..m` into at most `max_blocks`
/// non-empty blocks with positive quotas.
pub fn random_partition<R: Rng>(rng: &mut R, m: usize, max_blocks: usize) -> MatroidDesc {
    let mut ids: Vec<usize> = (0..m).collect();
    ids.shuffle(rng);
    let used = rng.gen_range(1..=m);
    let k = rng.gen_range(1..=max_blocks.min(used));
    let mut blocks = vec![Vec::new(); k];
    for (j, &r) in ids[..used].iter().enumerate() {
        let b = if j < k { j } else { rng.gen_range(0..k) };
        blocks[b].push(r);
    }
    for b in &mut blocks {
        b.sort_unstable();
    }
    let quotas = blocks.iter().map(|b| rng.gen_range(1..=b.len())).collect();
    MatroidDesc::Partition { blocks, quotas }
}

/// Connected graph on `vertices` whose edges are exactly the resources
/// `0..m`; requires `m >= vertices - 1`.
pub fn random_graphic<R: Rng>(rng: &mut R, vertices: usize, m: usize) -> MatroidDesc {
    assert!(vertices >= 1 && m + 1 >= vertices, "too few edges to connect the graph");
    let mut edges = Vec::with_capacity(m);
    for v in 1..vertices {
        edges.push((rng.gen_range(0..v), v));
    }
    while edges.len() < m {
        let u = rng.gen_range(0..vertices);
        let v = rng.gen_range(0..vertices);
        edges.push((u, v));
    }
    edges.shuffle(rng);
    let edges = edges.into_iter().enumerate().map(|(resource, (u, v))| GraphEdge { u, v, resource }).collect();
    MatroidDesc::Graphic { vertices, edges }
}
