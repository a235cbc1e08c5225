//! Cost models `c : loads -> cost vector`, the attacker allocation `κ*`, and
//! the disjoint-union composition `⊕`.

use crate::error::{Error, Result};
use crate::rational::{approx_eq, Rational, Value};

/// Dense square rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: Vec<Vec<Rational>>,
}

impl Matrix {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Structural("matrix must be square".into()));
        }
        Ok(Matrix { rows })
    }

    pub fn from_ints(rows: &[&[i128]]) -> Result<Self> {
        Matrix::new(
            rows.iter()
                .map(|r| r.iter().map(|&v| Rational::from_int(v)).collect())
                .collect(),
        )
    }

    pub fn zeros(n: usize) -> Self {
        Matrix { rows: vec![vec![Rational::zero(); n]; n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.rows[i][i] = Rational::one();
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, r: usize, s: usize) -> Rational {
        self.rows[r][s]
    }

    pub fn set(&mut self, r: usize, s: usize, v: Rational) {
        self.rows[r][s] = v;
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.dim();
        (0..n).all(|r| (r + 1..n).all(|s| self.rows[r][s] == self.rows[s][r]))
    }

    /// First `(r, s)` with `a_rs != a_sr`.
    pub fn asymmetry(&self) -> Option<(usize, usize)> {
        let n = self.dim();
        (0..n)
            .flat_map(|r| (r + 1..n).map(move |s| (r, s)))
            .find(|&(r, s)| self.rows[r][s] != self.rows[s][r])
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        self.rows
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| *a * *b).sum())
            .collect()
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[Rational], y: &[Rational]) -> Rational {
        x.iter().zip(self.mul_vec(y)).map(|(a, b)| *a * b).sum()
    }

    pub fn block_diag(blocks: &[&Matrix]) -> Matrix {
        let n: usize = blocks.iter().map(|b| b.dim()).sum();
        let mut out = Matrix::zeros(n);
        let mut off = 0;
        for b in blocks {
            for r in 0..b.dim() {
                for s in 0..b.dim() {
                    out.rows[off + r][off + s] = b.rows[r][s];
                }
            }
            off += b.dim();
        }
        out
    }
}

/// One resource's table: the cost as a function of the loads on its
/// neighborhood `B_r` only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TabulatedResource {
    /// Sorted, distinct resource indices.
    pub neighborhood: Vec<usize>,
    /// Mixed-radix table over `{0..=L}^|B_r|`, first neighbor most significant.
    pub values: Vec<Rational>,
}

/// Integer-load cost function given by bounded tables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tabulated {
    m: usize,
    max_load: u32,
    resources: Vec<TabulatedResource>,
}

fn table_len(max_load: u32, k: usize) -> Option<usize> {
    (max_load as usize + 1).checked_pow(k as u32)
}

/// Refuse to materialize tables beyond this many entries per resource.
pub const MAX_TABLE_ENTRIES: usize = 1 << 22;

impl Tabulated {
    pub fn new(m: usize, max_load: u32, resources: Vec<TabulatedResource>) -> Result<Self> {
        if resources.len() != m {
            return Err(Error::Structural(format!(
                "{} resource tables for m = {m}",
                resources.len()
            )));
        }
        for (r, res) in resources.iter().enumerate() {
            if res.neighborhood.windows(2).any(|w| w[0] >= w[1])
                || res.neighborhood.iter().any(|&s| s >= m)
            {
                return Err(Error::Structural(format!(
                    "neighborhood of resource {r} must be sorted, distinct and within [0, {m})"
                )));
            }
            let want = table_len(max_load, res.neighborhood.len());
            if want != Some(res.values.len()) {
                return Err(Error::Structural(format!(
                    "table of resource {r} has {} entries, expected (L+1)^|B_r| = {:?}",
                    res.values.len(),
                    want
                )));
            }
        }
        Ok(Tabulated { m, max_load, resources })
    }

    /// Builds tables by evaluating `f(r, x)` where `x` is a full load vector
    /// that is zero outside `B_r`.
    pub fn from_fn(
        m: usize,
        max_load: u32,
        neighborhoods: Vec<Vec<usize>>,
        mut f: impl FnMut(usize, &[u32]) -> Rational,
    ) -> Result<Self> {
        if neighborhoods.len() != m {
            return Err(Error::Structural("one neighborhood per resource required".into()));
        }
        let mut resources = Vec::with_capacity(m);
        for (r, mut nb) in neighborhoods.into_iter().enumerate() {
            nb.sort_unstable();
            nb.dedup();
            let len = table_len(max_load, nb.len())
                .filter(|&l| l <= MAX_TABLE_ENTRIES)
                .ok_or_else(|| {
                    Error::capacity(format!("table of resource {r}"), MAX_TABLE_ENTRIES as u64)
                })?;
            let mut values = Vec::with_capacity(len);
            let mut x = vec![0u32; m];
            for idx in 0..len {
                decode_index(idx, max_load, &nb, &mut x);
                values.push(f(r, &x));
            }
            resources.push(TabulatedResource { neighborhood: nb, values });
        }
        Tabulated::new(m, max_load, resources)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn max_load(&self) -> u32 {
        self.max_load
    }

    pub fn resources(&self) -> &[TabulatedResource] {
        &self.resources
    }

    pub fn neighborhood(&self, r: usize) -> &[usize] {
        &self.resources[r].neighborhood
    }

    fn index(&self, r: usize, x: &[u32]) -> Result<usize> {
        let base = self.max_load as usize + 1;
        let mut idx = 0usize;
        for &s in &self.resources[r].neighborhood {
            let v = x[s];
            if v > self.max_load {
                return Err(Error::Range(format!(
                    "load {v} on resource {s} exceeds table bound L = {}",
                    self.max_load
                )));
            }
            idx = idx * base + v as usize;
        }
        Ok(idx)
    }

    /// `c_r(x)` for an integer load vector.
    pub fn value(&self, r: usize, x: &[u32]) -> Result<Rational> {
        if x.len() != self.m {
            return Err(Error::Structural(format!(
                "load vector of length {} for m = {}",
                x.len(),
                self.m
            )));
        }
        Ok(self.resources[r].values[self.index(r, x)?])
    }

    pub fn eval_int(&self, x: &[u32]) -> Result<Vec<Rational>> {
        (0..self.m).map(|r| self.value(r, x)).collect()
    }

    /// Drops every neighborhood coordinate on which the table is constant.
    pub fn minimize_neighborhoods(&self) -> Tabulated {
        let resources = self
            .resources
            .iter()
            .map(|res| {
                let mut res = res.clone();
                let mut pos = 0;
                while pos < res.neighborhood.len() {
                    match drop_coordinate(&res, pos, self.max_load) {
                        Some(smaller) => res = smaller,
                        None => pos += 1,
                    }
                }
                res
            })
            .collect();
        Tabulated { m: self.m, max_load: self.max_load, resources }
    }

    /// Same function restricted to loads `<= max_load` (which must not exceed
    /// the current bound).
    pub fn truncated(&self, max_load: u32) -> Result<Tabulated> {
        if max_load > self.max_load {
            return Err(Error::Range(format!(
                "cannot extend table bound from {} to {max_load}",
                self.max_load
            )));
        }
        let neighborhoods = self.resources.iter().map(|r| r.neighborhood.clone()).collect();
        Tabulated::from_fn(self.m, max_load, neighborhoods, |r, x| {
            self.value(r, x).expect("within truncated bound")
        })
    }
}

fn decode_index(mut idx: usize, max_load: u32, nb: &[usize], x: &mut [u32]) {
    let base = max_load as usize + 1;
    x.iter_mut().for_each(|v| *v = 0);
    for &s in nb.iter().rev() {
        x[s] = (idx % base) as u32;
        idx /= base;
    }
}

/// The table with neighborhood coordinate `pos` removed, if the values do not
/// depend on it.
fn drop_coordinate(res: &TabulatedResource, pos: usize, max_load: u32) -> Option<TabulatedResource> {
    let base = max_load as usize + 1;
    let k = res.neighborhood.len();
    let stride = base.pow((k - 1 - pos) as u32);
    let block = stride * base;
    let independent = (0..res.values.len()).all(|idx| {
        let digit = (idx / stride) % base;
        let at_zero = idx - digit * stride;
        res.values[idx] == res.values[at_zero]
    });
    if !independent {
        return None;
    }
    let values = (0..res.values.len())
        .filter(|idx| (idx / stride) % base == 0)
        .map(|idx| res.values[idx])
        .collect::<Vec<_>>();
    debug_assert_eq!(values.len() * base, res.values.len());
    let _ = block;
    let mut neighborhood = res.neighborhood.clone();
    neighborhood.remove(pos);
    Some(TabulatedResource { neighborhood, values })
}

/// The cost-model taxonomy.
#[derive(Clone, Debug, PartialEq)]
pub enum CostModel {
    Tabulated(Tabulated),
    /// `c_r(x) = f_r(x_r) + (A x)_r`, `f_r` tabulated on `0..=L`.
    SeparablePlusLinear { f: Vec<Vec<Rational>>, a: Matrix },
    /// `c(x) = A x + b`.
    Affine { a: Matrix, b: Vec<Rational> },
    /// `c_r(x) = a_r exp(φ x_r) + b_r`, evaluated in floating point.
    Exponential { a: Vec<f64>, phi: f64, b: Vec<f64> },
    /// `c_r(x) = x_r + κ*_r(x)`; the number of resources is the game's.
    Bilevel { budget: Rational },
    /// Separable, per player: `c_{i,r}(x) = ν_{i,r}(x_r)`, tabulated on `0..=L`.
    PlayerSpecificSeparable { nu: Vec<Vec<Vec<Rational>>> },
}

impl CostModel {
    pub fn kind(&self) -> &'static str {
        match self {
            CostModel::Tabulated(_) => "tabulated",
            CostModel::SeparablePlusLinear { .. } => "separable_plus_linear",
            CostModel::Affine { .. } => "affine",
            CostModel::Exponential { .. } => "exponential",
            CostModel::Bilevel { .. } => "bilevel",
            CostModel::PlayerSpecificSeparable { .. } => "player_specific_separable",
        }
    }

    /// Number of resources, when the model fixes it.
    pub fn n_resources(&self) -> Option<usize> {
        match self {
            CostModel::Tabulated(t) => Some(t.m()),
            CostModel::SeparablePlusLinear { f, .. } => Some(f.len()),
            CostModel::Affine { b, .. } => Some(b.len()),
            CostModel::Exponential { a, .. } => Some(a.len()),
            CostModel::Bilevel { .. } => None,
            CostModel::PlayerSpecificSeparable { nu } => nu.first().map(|v| v.len()),
        }
    }

    /// Largest integer load the model accepts, for table-backed models.
    pub fn max_load(&self) -> Option<u32> {
        match self {
            CostModel::Tabulated(t) => Some(t.max_load()),
            CostModel::SeparablePlusLinear { f, .. } => {
                f.iter().map(|t| t.len().saturating_sub(1) as u32).min()
            }
            CostModel::PlayerSpecificSeparable { nu } => nu
                .iter()
                .flat_map(|p| p.iter().map(|t| t.len().saturating_sub(1) as u32))
                .min(),
            _ => None,
        }
    }

    pub fn validate(&self, m: usize, n_players: usize) -> Result<()> {
        if let Some(k) = self.n_resources() {
            if k != m {
                return Err(Error::Structural(format!(
                    "{} cost model has {k} resources, game has {m}",
                    self.kind()
                )));
            }
        }
        match self {
            CostModel::Tabulated(_) => Ok(()),
            CostModel::SeparablePlusLinear { f, a } => {
                if a.dim() != f.len() {
                    return Err(Error::Structural("A must be m x m".into()));
                }
                if f.iter().any(|t| t.is_empty()) {
                    return Err(Error::Structural("empty f table".into()));
                }
                Ok(())
            }
            CostModel::Affine { a, b } => {
                if a.dim() != b.len() {
                    return Err(Error::Structural("A must be m x m".into()));
                }
                Ok(())
            }
            CostModel::Exponential { a, phi, b } => {
                if a.len() != b.len() {
                    return Err(Error::Structural("a and b must have equal length".into()));
                }
                if !phi.is_finite() || a.iter().chain(b).any(|v| !v.is_finite()) {
                    return Err(Error::Structural("exponential parameters must be finite".into()));
                }
                Ok(())
            }
            CostModel::Bilevel { budget } => {
                if !budget.is_positive() {
                    return Err(Error::Structural("attacker budget must be positive".into()));
                }
                Ok(())
            }
            CostModel::PlayerSpecificSeparable { nu } => {
                if nu.len() != n_players {
                    return Err(Error::Structural(format!(
                        "ν tables for {} players, game has {n_players}",
                        nu.len()
                    )));
                }
                for (i, per) in nu.iter().enumerate() {
                    if per.len() != m {
                        return Err(Error::Structural(format!("player {i}: ν needs {m} tables")));
                    }
                    for (r, t) in per.iter().enumerate() {
                        if t.is_empty() {
                            return Err(Error::Structural(format!("ν_{{{i},{r}}} is empty")));
                        }
                        if t.windows(2).any(|w| w[1] < w[0]) {
                            return Err(Error::Structural(format!(
                                "ν_{{{i},{r}}} must be non-decreasing"
                            )));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// `c(x)` (or `c_i(x)` for the player-specific model).
    pub fn eval(&self, loads: &[Rational], player: Option<usize>) -> Result<Vec<Value>> {
        if let Some(k) = self.n_resources() {
            if loads.len() != k {
                return Err(Error::Structural(format!(
                    "load vector of length {} for a model on {k} resources",
                    loads.len()
                )));
            }
        }
        match self {
            CostModel::Exponential { a, phi, b } => Ok(loads
                .iter()
                .enumerate()
                .map(|(r, x)| Value::Approx(a[r] * (phi * x.to_f64()).exp() + b[r]))
                .collect()),
            _ => Ok(self.eval_exact(loads, player)?.into_iter().map(Value::Exact).collect()),
        }
    }

    /// Rational-valued evaluation; the exponential model is unsupported here.
    pub fn eval_exact(&self, loads: &[Rational], player: Option<usize>) -> Result<Vec<Rational>> {
        match self {
            CostModel::Tabulated(t) => t.eval_int(&integer_loads(loads, t.max_load())?),
            CostModel::SeparablePlusLinear { f, a } => {
                let bound = self.max_load().unwrap_or(0);
                let xi = integer_loads(loads, bound)?;
                let lin = a.mul_vec(loads);
                Ok(xi.iter().enumerate().map(|(r, &k)| f[r][k as usize] + lin[r]).collect())
            }
            CostModel::Affine { a, b } => {
                Ok(a.mul_vec(loads).into_iter().zip(b).map(|(v, b)| v + *b).collect())
            }
            CostModel::Exponential { .. } => Err(Error::Unsupported(
                "exponential costs have no exact evaluation".into(),
            )),
            CostModel::Bilevel { budget } => {
                let kappa = kappa_star(loads, *budget)?;
                Ok(loads.iter().zip(kappa).map(|(x, k)| *x + k).collect())
            }
            CostModel::PlayerSpecificSeparable { nu } => {
                let i = player.ok_or_else(|| {
                    Error::Usage("player-specific cost evaluated without a player index".into())
                })?;
                let tables = nu
                    .get(i)
                    .ok_or_else(|| Error::Usage(format!("no ν tables for player {i}")))?;
                let bound = self.max_load().unwrap_or(0);
                let xi = integer_loads(loads, bound)?;
                Ok(xi.iter().enumerate().map(|(r, &k)| tables[r][k as usize]).collect())
            }
        }
    }
}

fn integer_loads(loads: &[Rational], bound: u32) -> Result<Vec<u32>> {
    loads
        .iter()
        .enumerate()
        .map(|(r, x)| {
            let k = x.to_u32().ok_or_else(|| {
                Error::Range(format!("load {x} on resource {r} is not a non-negative integer"))
            })?;
            if k > bound {
                return Err(Error::Range(format!(
                    "load {k} on resource {r} exceeds table bound L = {bound}"
                )));
            }
            Ok(k)
        })
        .collect()
}

/// `c(x)` convenience wrapper over [`CostModel::eval`].
pub fn eval_cost(model: &CostModel, loads: &[Rational], player: Option<usize>) -> Result<Vec<Value>> {
    model.eval(loads, player)
}

/// `arg max_r x_r` together with the maximum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArgmaxSet {
    pub indices: Vec<usize>,
    pub value: Rational,
}

pub fn argmax_set(loads: &[Rational]) -> Option<ArgmaxSet> {
    let value = *loads.iter().max()?;
    let indices = loads
        .iter()
        .enumerate()
        .filter(|(_, x)| **x == value)
        .map(|(r, _)| r)
        .collect();
    Some(ArgmaxSet { indices, value })
}

/// Attacker allocation: the budget split evenly over the maximum-load
/// resources, exact ties.
pub fn kappa_star(loads: &[Rational], budget: Rational) -> Result<Vec<Rational>> {
    if !budget.is_positive() {
        return Err(Error::Precondition("attacker budget must be positive".into()));
    }
    let s = argmax_set(loads)
        .ok_or_else(|| Error::Structural("κ* needs at least one resource".into()))?;
    let share = budget / Rational::from(s.indices.len());
    let mut out = vec![Rational::zero(); loads.len()];
    for r in s.indices {
        out[r] = share;
    }
    Ok(out)
}

/// `c ⊕ c' ⊕ ...` on the disjoint union of the resource sets.
///
/// Models of one variant compose structurally. Mixtures of table-backed and
/// affine models are converted to tables at the smallest table bound present.
pub fn compose(models: &[CostModel]) -> Result<CostModel> {
    let first = models
        .first()
        .ok_or_else(|| Error::Structural("nothing to compose".into()))?;
    let same_kind = models.iter().all(|c| c.kind() == first.kind());
    if same_kind {
        return compose_same(models);
    }
    if models.iter().any(|c| {
        matches!(
            c,
            CostModel::Bilevel { .. }
                | CostModel::Exponential { .. }
                | CostModel::PlayerSpecificSeparable { .. }
        )
    }) {
        return Err(Error::Incompatible(
            "only tabulated, separable-plus-linear and affine models mix".into(),
        ));
    }
    let bound = models.iter().filter_map(|c| c.max_load()).min().ok_or_else(|| {
        Error::Incompatible("mixing affine models with others needs a table bound".into())
    })?;
    compose_tabulated(models, bound)
}

/// Composition after converting every part to a table with bound `max_load`.
pub fn compose_tabulated(models: &[CostModel], max_load: u32) -> Result<CostModel> {
    let tables = models
        .iter()
        .map(|c| {
            let m = c.n_resources().ok_or_else(|| {
                Error::Incompatible(format!("{} model has no intrinsic resource count", c.kind()))
            })?;
            as_tabulated(c, m, &TabulateOptions::new(max_load))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CostModel::Tabulated(concat_tables(&tables)?))
}

fn concat_tables(parts: &[Tabulated]) -> Result<Tabulated> {
    let bound = parts.iter().map(|t| t.max_load()).min().unwrap_or(0);
    let mut resources = Vec::new();
    let mut off = 0;
    for t in parts {
        let t = if t.max_load() == bound { t.clone() } else { t.truncated(bound)? };
        for res in t.resources() {
            resources.push(TabulatedResource {
                neighborhood: res.neighborhood.iter().map(|s| s + off).collect(),
                values: res.values.clone(),
            });
        }
        off += t.m();
    }
    Tabulated::new(off, bound, resources)
}

fn compose_same(models: &[CostModel]) -> Result<CostModel> {
    match &models[0] {
        CostModel::Tabulated(_) => {
            let parts: Vec<Tabulated> = models
                .iter()
                .map(|c| match c {
                    CostModel::Tabulated(t) => t.clone(),
                    _ => unreachable!(),
                })
                .collect();
            Ok(CostModel::Tabulated(concat_tables(&parts)?))
        }
        CostModel::SeparablePlusLinear { .. } => {
            let bound = models.iter().filter_map(|c| c.max_load()).min().unwrap_or(0) as usize;
            let mut f = Vec::new();
            let mut blocks = Vec::new();
            for c in models {
                if let CostModel::SeparablePlusLinear { f: fc, a } = c {
                    f.extend(fc.iter().map(|t| t[..=bound].to_vec()));
                    blocks.push(a);
                }
            }
            Ok(CostModel::SeparablePlusLinear { f, a: Matrix::block_diag(&blocks) })
        }
        CostModel::Affine { .. } => {
            let mut b = Vec::new();
            let mut blocks = Vec::new();
            for c in models {
                if let CostModel::Affine { a, b: bc } = c {
                    b.extend_from_slice(bc);
                    blocks.push(a);
                }
            }
            Ok(CostModel::Affine { a: Matrix::block_diag(&blocks), b })
        }
        CostModel::Exponential { phi, .. } => {
            let phi = *phi;
            let (mut a, mut b) = (Vec::new(), Vec::new());
            for c in models {
                if let CostModel::Exponential { a: ac, phi: pc, b: bc } = c {
                    if !approx_eq(*pc, phi) {
                        return Err(Error::Incompatible(format!(
                            "exponential models need a shared exponent (got {phi} and {pc})"
                        )));
                    }
                    a.extend_from_slice(ac);
                    b.extend_from_slice(bc);
                }
            }
            Ok(CostModel::Exponential { a, phi, b })
        }
        CostModel::Bilevel { .. } => Err(Error::Incompatible(
            "the attacker allocation couples all resources; a union of bilevel models is not bilevel"
                .into(),
        )),
        CostModel::PlayerSpecificSeparable { nu } => {
            let n = nu.len();
            let mut out: Vec<Vec<Vec<Rational>>> = vec![Vec::new(); n];
            for c in models {
                if let CostModel::PlayerSpecificSeparable { nu: nc } = c {
                    if nc.len() != n {
                        return Err(Error::Incompatible(
                            "player-specific models for different player counts".into(),
                        ));
                    }
                    for (i, per) in nc.iter().enumerate() {
                        out[i].extend(per.iter().cloned());
                    }
                }
            }
            Ok(CostModel::PlayerSpecificSeparable { nu: out })
        }
    }
}

/// Options for [`as_tabulated`].
#[derive(Clone, Debug)]
pub struct TabulateOptions {
    pub max_load: u32,
    /// Required for the player-specific model.
    pub player: Option<usize>,
    /// Allow exponential models, rounding each value to a nearby rational.
    pub allow_float: bool,
}

impl TabulateOptions {
    pub fn new(max_load: u32) -> Self {
        TabulateOptions { max_load, player: None, allow_float: false }
    }
}

/// Tables agreeing with `model` on every integer load vector `<= L`, with
/// neighborhoods shrunk to the coordinates each `c_r` actually depends on.
pub fn as_tabulated(model: &CostModel, m: usize, opts: &TabulateOptions) -> Result<Tabulated> {
    if opts.max_load < 1 {
        return Err(Error::Precondition("table bound L must be at least 1".into()));
    }
    if let CostModel::Exponential { .. } = model {
        if !opts.allow_float {
            return Err(Error::Unsupported(
                "exponential costs are not rational; set allow_float to round them".into(),
            ));
        }
    }
    if let Some(k) = model.n_resources() {
        if k != m {
            return Err(Error::Structural(format!("model has {k} resources, asked for {m}")));
        }
    }
    if let Some(bound) = model.max_load() {
        if bound < opts.max_load {
            return Err(Error::Range(format!(
                "model is tabulated only up to {bound}, asked for {}",
                opts.max_load
            )));
        }
    }
    let full: Vec<usize> = (0..m).collect();
    let len = table_len(opts.max_load, m)
        .filter(|&l| l <= MAX_TABLE_ENTRIES)
        .ok_or_else(|| Error::capacity("full-neighborhood table", MAX_TABLE_ENTRIES as u64))?;
    let mut values = vec![Vec::with_capacity(len); m];
    let mut x = vec![0u32; m];
    for idx in 0..len {
        decode_index(idx, opts.max_load, &full, &mut x);
        let loads: Vec<Rational> = x.iter().map(|&v| Rational::from(v)).collect();
        let costs = model.eval(&loads, opts.player)?;
        for (r, c) in costs.into_iter().enumerate() {
            let v = match c {
                Value::Exact(q) => q,
                Value::Approx(f) => Rational::approximate_f64(f).ok_or_else(|| {
                    Error::Unsupported(format!("cost {f} has no rational approximation"))
                })?,
            };
            values[r].push(v);
        }
    }
    let resources = values
        .into_iter()
        .map(|v| TabulatedResource { neighborhood: full.clone(), values: v })
        .collect();
    Ok(Tabulated::new(m, opts.max_load, resources)?.minimize_neighborhoods())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i128) -> Rational {
        Rational::from_int(v)
    }

    fn qs(v: &[i128]) -> Vec<Rational> {
        v.iter().map(|&x| q(x)).collect()
    }

    fn exact(v: &[Value]) -> Vec<Rational> {
        v.iter().map(|x| x.as_exact().unwrap()).collect()
    }

    #[test]
    fn affine_swap_matrix() {
        let c = CostModel::Affine { a: Matrix::from_ints(&[&[0, 1], &[1, 0]]).unwrap(), b: qs(&[0, 0]) };
        assert_eq!(exact(&eval_cost(&c, &qs(&[2, 3]), None).unwrap()), qs(&[3, 2]));
    }

    #[test]
    fn bilevel_even_split_over_argmax() {
        let c = CostModel::Bilevel { budget: q(6) };
        assert_eq!(exact(&c.eval(&qs(&[3, 3, 1]), None).unwrap()), qs(&[6, 6, 1]));
    }

    #[test]
    fn exponential_at_zero_exponent() {
        let c = CostModel::Exponential { a: vec![1.0], phi: 0.0, b: vec![0.0] };
        assert!(c.eval(&qs(&[5]), None).unwrap()[0].same(&Value::Approx(1.0)));
    }

    #[test]
    fn kappa_star_examples() {
        assert_eq!(kappa_star(&qs(&[1, 2]), q(4)).unwrap(), qs(&[0, 4]));
        assert_eq!(
            kappa_star(&qs(&[3, 3, 3]), q(2)).unwrap(),
            vec![Rational::new(2, 3); 3]
        );
        assert_eq!(kappa_star(&qs(&[0]), q(1)).unwrap(), qs(&[1]));
        assert!(kappa_star(&qs(&[1]), q(0)).is_err());
        assert!(kappa_star(&[], q(1)).is_err());
    }

    #[test]
    fn player_specific_needs_player() {
        let c = CostModel::PlayerSpecificSeparable { nu: vec![vec![qs(&[0, 1, 2])]] };
        assert!(matches!(c.eval(&qs(&[1]), None), Err(Error::Usage(_))));
        assert_eq!(exact(&c.eval(&qs(&[2]), Some(0)).unwrap()), qs(&[2]));
    }

    #[test]
    fn table_bound_is_enforced() {
        let c = CostModel::SeparablePlusLinear { f: vec![qs(&[0, 1, 2])], a: Matrix::zeros(1) };
        assert!(matches!(c.eval(&qs(&[3]), None), Err(Error::Range(_))));
        assert!(matches!(c.eval(&[Rational::new(1, 2)], None), Err(Error::Range(_))));
    }

    #[test]
    fn compose_affine_is_block_diagonal() {
        let c1 = CostModel::Affine { a: Matrix::from_ints(&[&[1]]).unwrap(), b: qs(&[2]) };
        let c2 = CostModel::Affine { a: Matrix::from_ints(&[&[0, 3], &[3, 0]]).unwrap(), b: qs(&[0, 1]) };
        let c = compose(&[c1, c2]).unwrap();
        let want = CostModel::Affine {
            a: Matrix::from_ints(&[&[1, 0, 0], &[0, 0, 3], &[0, 3, 0]]).unwrap(),
            b: qs(&[2, 0, 1]),
        };
        assert_eq!(c, want);
    }

    #[test]
    fn k_fold_composition_has_km_resources() {
        let c = CostModel::Affine { a: Matrix::identity(1), b: qs(&[0]) };
        let c5 = compose(&vec![c; 5]).unwrap();
        assert_eq!(c5.n_resources(), Some(5));
    }

    #[test]
    fn exponential_composition_needs_shared_phi() {
        let e1 = CostModel::Exponential { a: vec![1.0], phi: 1.0, b: vec![0.0] };
        let e2 = CostModel::Exponential { a: vec![1.0], phi: 2.0, b: vec![0.0] };
        assert!(matches!(compose(&[e1.clone(), e2]), Err(Error::Incompatible(_))));
        assert!(compose(&[e1.clone(), e1]).is_ok());
    }

    #[test]
    fn separable_becomes_singleton_neighborhoods() {
        let c = CostModel::SeparablePlusLinear {
            f: vec![qs(&[0, 1, 4, 9]), qs(&[5, 5, 6, 6])],
            a: Matrix::zeros(2),
        };
        let t = as_tabulated(&c, 2, &TabulateOptions::new(3)).unwrap();
        assert_eq!(t.neighborhood(0), &[0]);
        assert_eq!(t.neighborhood(1), &[1]);
    }

    #[test]
    fn dense_affine_keeps_full_neighborhoods() {
        let c = CostModel::Affine { a: Matrix::from_ints(&[&[1, 2], &[3, 4]]).unwrap(), b: qs(&[0, 0]) };
        let t = as_tabulated(&c, 2, &TabulateOptions::new(2)).unwrap();
        assert_eq!(t.neighborhood(0), &[0, 1]);
        assert_eq!(t.neighborhood(1), &[0, 1]);
    }

    #[test]
    fn bilevel_table_matches_kappa_star() {
        let c = CostModel::Bilevel { budget: q(1) };
        let t = as_tabulated(&c, 2, &TabulateOptions::new(2)).unwrap();
        for x0 in 0..=2u32 {
            for x1 in 0..=2u32 {
                let loads = vec![Rational::from(x0), Rational::from(x1)];
                let k = kappa_star(&loads, q(1)).unwrap();
                let want: Vec<Rational> = loads.iter().zip(&k).map(|(a, b)| *a + *b).collect();
                assert_eq!(t.eval_int(&[x0, x1]).unwrap(), want);
            }
        }
        assert_eq!(t.resources()[0].values.len(), 9);
    }

    #[test]
    fn exponential_tabulation_needs_float_flag() {
        let c = CostModel::Exponential { a: vec![1.0], phi: 1.0, b: vec![0.0] };
        assert!(matches!(as_tabulated(&c, 1, &TabulateOptions::new(2)), Err(Error::Unsupported(_))));
        let opts = TabulateOptions { allow_float: true, ..TabulateOptions::new(2) };
        let t = as_tabulated(&c, 1, &opts).unwrap();
        assert!((t.value(0, &[2]).unwrap().to_f64() - 2f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn tabulated_rejects_bad_shapes() {
        let res = TabulatedResource { neighborhood: vec![0], values: qs(&[0, 1]) };
        assert!(Tabulated::new(1, 2, vec![res.clone()]).is_err());
        assert!(Tabulated::new(1, 1, vec![res]).is_ok());
        let unsorted = TabulatedResource { neighborhood: vec![1, 0], values: vec![q(0); 4] };
        assert!(Tabulated::new(2, 1, vec![unsorted.clone(), unsorted]).is_err());
    }
}
