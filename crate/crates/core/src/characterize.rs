//! Executable consistency tests: discrete Jacobian symmetry and
//! cross-linearity for integer-load costs, decomposition into
//! `f_r(x_r) + (A x)_r`, and the affine/exponential dichotomy for weighted
//! costs.
//!
//! All checks run on a bounded domain; a pass certifies the conditions only
//! for loads up to the stated bound.

use crate::costs::{CostModel, Matrix, Tabulated};
use crate::error::{Error, Result};
use crate::rational::{approx_eq, Rational, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    /// `c_r(x+1_rs) - c_r(x+1_r) != c_s(x+1_rs) - c_s(x+1_s)`.
    JacobianSymmetry,
    /// `c_r(x+1_s) - c_r(x) != c_r(x+1_rs) - c_r(x+1_r)` with `x_r > 0`.
    CrossLinearityA,
    /// `c_r(x+2·1_s) - c_r(x+1_s) != c_r(x+1_s) - c_r(x)` with `x_r > 0`.
    CrossLinearityB,
    /// `c_r(x+1_s) - c_r(x) != c_r(x+1_st) - c_r(x+1_t)`, `r, s, t` distinct.
    ThreeResource,
    /// `c_r(x+1_s) - c_r(x) != c_r(y+1_s) - c_r(y)` with `x_r, y_r > 0`.
    DiagonalHessian,
    /// The Jacobian identity with increments `ε`.
    WeightedJacobian,
    /// `c_r(z+ε1_s) - c_r(z)` is not the same for all `z` with `z_r > 0`.
    WeightedCrossEffect,
    /// Resources interact although some `c_r` is not affine along its own load.
    WeightedInteraction,
    /// Separable, but some `c_r` is neither affine nor exponential.
    WeightedNotAffineOrExponential,
    /// Separable exponentials whose exponents differ.
    WeightedExponentNotShared,
}

impl ViolationKind {
    pub fn is_weighted(&self) -> bool {
        matches!(
            self,
            ViolationKind::WeightedJacobian
                | ViolationKind::WeightedCrossEffect
                | ViolationKind::WeightedInteraction
                | ViolationKind::WeightedNotAffineOrExponential
                | ViolationKind::WeightedExponentNotShared
        )
    }
}

/// A failed identity with the two sides as evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub r: usize,
    pub s: usize,
    pub t: Option<usize>,
    pub point: Vec<Rational>,
    /// Second point for two-point conditions.
    pub other_point: Option<Vec<Rational>>,
    /// Increment for weighted conditions.
    pub epsilon: Option<Rational>,
    pub lhs: Value,
    pub rhs: Value,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConsistencyReport {
    /// `c_r(x) = f_r(x_r) + (A x)_r` for all loads `<= bound` with `x_r > 0`.
    UnweightedConsistent { f: Vec<Vec<Rational>>, a: Matrix, bound: u32 },
    WeightedAffine { a: Matrix, b: Vec<Rational> },
    WeightedExponential { a: Vec<f64>, phi: f64, b: Vec<f64> },
    Violation(Violation),
}

/// Integer points `{0..=L}^m`, first coordinate most significant.
struct Domain {
    next: Option<Vec<u32>>,
    bound: u32,
}

impl Domain {
    fn new(m: usize, bound: u32) -> Self {
        Domain { next: Some(vec![0; m]), bound }
    }
}

impl Iterator for Domain {
    type Item = Vec<u32>;
    fn next(&mut self) -> Option<Vec<u32>> {
        let cur = self.next.take()?;
        let mut nxt = cur.clone();
        let mut pos = nxt.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            if nxt[pos] < self.bound {
                nxt[pos] += 1;
                nxt[pos + 1..].iter_mut().for_each(|v| *v = 0);
                self.next = Some(nxt);
                break;
            }
        }
        Some(cur)
    }
}

fn shift(x: &[u32], add: &[(usize, u32)]) -> Vec<u32> {
    let mut y = x.to_vec();
    for &(r, k) in add {
        y[r] += k;
    }
    y
}

fn rational_point(x: &[u32]) -> Vec<Rational> {
    x.iter().map(|&v| Rational::from(v)).collect()
}

struct Tab<'a>(&'a Tabulated);

impl Tab<'_> {
    fn c(&self, r: usize, x: &[u32]) -> Result<Rational> {
        self.0.value(r, x)
    }

    /// `c_r(x + 1_s) - c_r(x)`.
    fn d(&self, r: usize, s: usize, x: &[u32]) -> Result<Rational> {
        Ok(self.c(r, &shift(x, &[(s, 1)]))? - self.c(r, x)?)
    }
}

fn require_range(c: &Tabulated, bound: u32) -> Result<()> {
    if c.max_load() < bound + 2 {
        return Err(Error::Range(format!(
            "checks up to L = {bound} need tables up to {}, these end at {}",
            bound + 2,
            c.max_load()
        )));
    }
    Ok(())
}

fn violation(
    kind: ViolationKind,
    (r, s, t): (usize, usize, Option<usize>),
    x: &[u32],
    other: Option<&[u32]>,
    lhs: Rational,
    rhs: Rational,
) -> Violation {
    Violation {
        kind,
        r,
        s,
        t,
        point: rational_point(x),
        other_point: other.map(rational_point),
        epsilon: None,
        lhs: Value::Exact(lhs),
        rhs: Value::Exact(rhs),
    }
}

/// First point (canonical order) where the discrete Jacobian is asymmetric,
/// over `‖x‖∞ <= L`.
pub fn check_jacobian_symmetry(c: &Tabulated, bound: u32) -> Result<Option<Violation>> {
    require_range(c, bound)?;
    let t = Tab(c);
    let m = c.m();
    for x in Domain::new(m, bound) {
        for r in 0..m {
            for s in r + 1..m {
                let xrs = shift(&x, &[(r, 1), (s, 1)]);
                let lhs = t.c(r, &xrs)? - t.c(r, &shift(&x, &[(r, 1)]))?;
                let rhs = t.c(s, &xrs)? - t.c(s, &shift(&x, &[(s, 1)]))?;
                if lhs != rhs {
                    return Ok(Some(violation(ViolationKind::JacobianSymmetry, (r, s, None), &x, None, lhs, rhs)));
                }
            }
        }
    }
    Ok(None)
}

/// First witness of each cross-linearity condition.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CrossLinearityReport {
    pub a: Option<Violation>,
    pub b: Option<Violation>,
    pub three: Option<Violation>,
    pub diagonal: Option<Violation>,
}

impl CrossLinearityReport {
    /// The first failing condition in the order (a), (b), three-resource,
    /// diagonal.
    pub fn first(&self) -> Option<&Violation> {
        self.a.as_ref().or(self.b.as_ref()).or(self.three.as_ref()).or(self.diagonal.as_ref())
    }
}

/// Evaluates all cross-linearity conditions over `‖x‖∞ <= L`, `x_r > 0`.
///
/// The diagonal-Hessian condition compares every `x` against the reference
/// point `1_r`; equality with a common reference is equivalent to pairwise
/// equality.
pub fn cross_linearity_report(c: &Tabulated, bound: u32) -> Result<CrossLinearityReport> {
    require_range(c, bound)?;
    let t = Tab(c);
    let m = c.m();
    let mut rep = CrossLinearityReport::default();
    for x in Domain::new(m, bound) {
        for r in 0..m {
            if x[r] == 0 {
                continue;
            }
            let mut unit_r = vec![0; m];
            unit_r[r] = 1;
            for s in 0..m {
                if s == r {
                    continue;
                }
                let d0 = t.d(r, s, &x)?;
                if rep.a.is_none() {
                    let rhs = t.d(r, s, &shift(&x, &[(r, 1)]))?;
                    if d0 != rhs {
                        rep.a = Some(violation(ViolationKind::CrossLinearityA, (r, s, None), &x, None, d0, rhs));
                    }
                }
                if rep.b.is_none() {
                    let lhs = t.d(r, s, &shift(&x, &[(s, 1)]))?;
                    if lhs != d0 {
                        rep.b = Some(violation(ViolationKind::CrossLinearityB, (r, s, None), &x, None, lhs, d0));
                    }
                }
                if rep.three.is_none() {
                    for u in 0..m {
                        if u == r || u == s {
                            continue;
                        }
                        let rhs = t.d(r, s, &shift(&x, &[(u, 1)]))?;
                        if d0 != rhs {
                            rep.three =
                                Some(violation(ViolationKind::ThreeResource, (r, s, Some(u)), &x, None, d0, rhs));
                            break;
                        }
                    }
                }
                if rep.diagonal.is_none() {
                    let rhs = t.d(r, s, &unit_r)?;
                    if d0 != rhs {
                        rep.diagonal = Some(violation(
                            ViolationKind::DiagonalHessian,
                            (r, s, None),
                            &x,
                            Some(&unit_r),
                            d0,
                            rhs,
                        ));
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// First cross-linearity violation, in the order of
/// [`CrossLinearityReport::first`].
pub fn check_cross_linearity(c: &Tabulated, bound: u32) -> Result<Option<Violation>> {
    Ok(cross_linearity_report(c, bound)?.first().cloned())
}

/// Runs both checks and, if they pass, returns `f_r(k) = c_r(k·1_r)` and
/// `a_rs = c_r(1_rs) - c_r(1_r)` (zero diagonal), verified against the
/// tables on every load `<= L` with `x_r > 0`.
pub fn decompose_unweighted(c: &Tabulated, bound: u32) -> Result<ConsistencyReport> {
    if bound < 1 {
        return Err(Error::Precondition("decomposition needs L >= 1".into()));
    }
    if let Some(v) = check_jacobian_symmetry(c, bound)? {
        return Ok(ConsistencyReport::Violation(v));
    }
    if let Some(v) = check_cross_linearity(c, bound)? {
        return Ok(ConsistencyReport::Violation(v));
    }
    let t = Tab(c);
    let m = c.m();
    let unit = |idx: &[(usize, u32)]| shift(&vec![0; m], idx);
    let f = (0..m)
        .map(|r| (0..=bound).map(|k| t.c(r, &unit(&[(r, k)]))).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let mut a = Matrix::zeros(m);
    for r in 0..m {
        for s in 0..m {
            if r != s {
                a.set(r, s, t.c(r, &unit(&[(r, 1), (s, 1)]))? - t.c(r, &unit(&[(r, 1)]))?);
            }
        }
    }
    if let Some((r, s)) = a.asymmetry() {
        return Err(Error::Internal(format!("decomposed A is asymmetric at ({r}, {s})")));
    }
    for x in Domain::new(m, bound) {
        let xr = rational_point(&x);
        let lin = a.mul_vec(&xr);
        for r in 0..m {
            if x[r] == 0 {
                continue;
            }
            let want = f[r][x[r] as usize] + lin[r];
            let got = t.c(r, &x)?;
            if got != want {
                return Err(Error::Internal(format!(
                    "reconstruction of c_{r} fails at {x:?}: table {got}, decomposition {want}"
                )));
            }
        }
    }
    Ok(ConsistencyReport::UnweightedConsistent { f, a, bound })
}

/// Sample points `{0, δ, ..., (count-1)δ}^m` for the weighted tests.
#[derive(Clone, Debug)]
pub struct SampleGrid {
    pub step: Rational,
    pub count: usize,
    /// Number of resources, for models that do not fix it.
    pub m: Option<usize>,
}

impl SampleGrid {
    pub fn new(step: Rational, count: usize) -> Self {
        SampleGrid { step, count, m: None }
    }
}

impl Default for SampleGrid {
    fn default() -> Self {
        SampleGrid::new(Rational::one(), 5)
    }
}

struct Sampler<'a> {
    model: &'a CostModel,
    eps: Rational,
}

impl Sampler<'_> {
    fn point(&self, x: &[u32]) -> Vec<Rational> {
        x.iter().map(|&k| self.eps * Rational::from(k)).collect()
    }

    fn c(&self, r: usize, x: &[u32]) -> Result<Value> {
        Ok(self.model.eval(&self.point(x), None)?[r])
    }

    fn d(&self, r: usize, s: usize, x: &[u32]) -> Result<Value> {
        Ok(self.c(r, &shift(x, &[(s, 1)]))? - self.c(r, x)?)
    }

    fn violation(
        &self,
        kind: ViolationKind,
        (r, s, t): (usize, usize, Option<usize>),
        x: &[u32],
        other: Option<&[u32]>,
        lhs: Value,
        rhs: Value,
    ) -> Violation {
        Violation {
            kind,
            r,
            s,
            t,
            point: self.point(x),
            other_point: other.map(|o| self.point(o)),
            epsilon: Some(self.eps),
            lhs,
            rhs,
        }
    }
}

fn to_rational(v: Value) -> Result<Rational> {
    match v {
        Value::Exact(q) => Ok(q),
        Value::Approx(f) => Rational::approximate_f64(f)
            .ok_or_else(|| Error::Unsupported(format!("{f} has no rational approximation"))),
    }
}

/// Sorts a cost model into the affine class, the shared-exponent separable
/// exponential class, or neither, by finite differences on the grid.
pub fn classify_weighted(model: &CostModel, grid: &SampleGrid) -> Result<ConsistencyReport> {
    if grid.count < 3 {
        return Err(Error::Precondition(format!(
            "the ratio test needs at least 3 sample points per axis, got {}",
            grid.count
        )));
    }
    if !grid.step.is_positive() {
        return Err(Error::Precondition("grid step must be positive".into()));
    }
    let m = model
        .n_resources()
        .or(grid.m)
        .ok_or_else(|| Error::Usage(format!("{} model needs the grid to fix m", model.kind())))?;
    if let (Some(k), Some(g)) = (model.n_resources(), grid.m) {
        if k != g {
            return Err(Error::Structural(format!("grid for m = {g}, model has {k} resources")));
        }
    }
    let smp = Sampler { model, eps: grid.step };
    let top = grid.count as u32 - 1;

    for x in Domain::new(m, top) {
        for r in 0..m {
            for s in r + 1..m {
                let xrs = shift(&x, &[(r, 1), (s, 1)]);
                let lhs = smp.c(r, &xrs)? - smp.c(r, &shift(&x, &[(r, 1)]))?;
                let rhs = smp.c(s, &xrs)? - smp.c(s, &shift(&x, &[(s, 1)]))?;
                if !lhs.same(&rhs) {
                    return Ok(ConsistencyReport::Violation(smp.violation(
                        ViolationKind::WeightedJacobian,
                        (r, s, None),
                        &x,
                        None,
                        lhs,
                        rhs,
                    )));
                }
            }
        }
    }

    let mut cross = vec![vec![Value::zero(); m]; m];
    for r in 0..m {
        let mut unit_r = vec![0; m];
        unit_r[r] = 1;
        for s in 0..m {
            if s != r {
                cross[r][s] = smp.d(r, s, &unit_r)?;
            }
        }
    }
    for x in Domain::new(m, top) {
        for r in 0..m {
            if x[r] == 0 {
                continue;
            }
            let mut unit_r = vec![0; m];
            unit_r[r] = 1;
            for s in 0..m {
                if s == r {
                    continue;
                }
                let d = smp.d(r, s, &x)?;
                if !d.same(&cross[r][s]) {
                    return Ok(ConsistencyReport::Violation(smp.violation(
                        ViolationKind::WeightedCrossEffect,
                        (r, s, None),
                        &x,
                        Some(&unit_r),
                        d,
                        cross[r][s],
                    )));
                }
            }
        }
    }

    // Each resource along its own axis.
    let diag: Vec<Vec<Value>> = (0..m)
        .map(|r| {
            (0..=top)
                .map(|k| {
                    let mut x = vec![0; m];
                    x[r] = k;
                    smp.c(r, &x)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let first_diffs: Vec<Vec<Value>> =
        diag.iter().map(|g| g.windows(2).map(|w| w[1] - w[0]).collect()).collect();
    let nonlinear = (0..m).find_map(|r| {
        first_diffs[r]
            .windows(2)
            .position(|w| !w[1].same(&w[0]))
            .map(|k| (r, k))
    });

    match nonlinear {
        None => {
            let inv = Rational::one() / grid.step;
            let mut a = Matrix::zeros(m);
            let mut b = Vec::with_capacity(m);
            for r in 0..m {
                for s in 0..m {
                    let v = if r == s { first_diffs[r][0] } else { cross[r][s] };
                    a.set(r, s, to_rational(v)? * inv);
                }
                b.push(to_rational(diag[r][0])?);
            }
            Ok(ConsistencyReport::WeightedAffine { a, b })
        }
        Some((r, k)) => {
            if let Some(s) = (0..m).find(|&s| s != r && !cross[r][s].same(&Value::zero())) {
                let mut unit_r = vec![0; m];
                unit_r[r] = 1;
                return Ok(ConsistencyReport::Violation(smp.violation(
                    ViolationKind::WeightedInteraction,
                    (r, s, None),
                    &unit_r,
                    None,
                    cross[r][s],
                    Value::zero(),
                )));
            }
            fit_exponential(&smp, &diag, &first_diffs, m, (r, k))
        }
    }
}

fn fit_exponential(
    smp: &Sampler<'_>,
    diag: &[Vec<Value>],
    diffs: &[Vec<Value>],
    m: usize,
    _first_nonlinear: (usize, usize),
) -> Result<ConsistencyReport> {
    let eps = smp.eps.to_f64();
    let mut phi: Option<(usize, f64)> = None;
    let mut rates = vec![None; m];
    for r in 0..m {
        let d: Vec<f64> = diffs[r].iter().map(|v| v.to_f64()).collect();
        if d.iter().all(|&v| approx_eq(v, 0.0)) {
            continue;
        }
        let axis = |k: usize| {
            let mut x = vec![0; m];
            x[r] = k as u32;
            x
        };
        // A geometric sequence of differences has no zero term.
        if let Some(k) = d.iter().position(|&v| approx_eq(v, 0.0)) {
            return Ok(ConsistencyReport::Violation(smp.violation(
                ViolationKind::WeightedNotAffineOrExponential,
                (r, r, None),
                &axis(k),
                Some(&axis(k + 1)),
                diffs[r][k],
                diffs[r][0],
            )));
        }
        let q = d[1] / d[0];
        if q <= 0.0 {
            return Ok(ConsistencyReport::Violation(smp.violation(
                ViolationKind::WeightedNotAffineOrExponential,
                (r, r, None),
                &axis(1),
                Some(&axis(0)),
                diffs[r][1],
                diffs[r][0],
            )));
        }
        for k in 1..d.len() - 1 {
            let qk = d[k + 1] / d[k];
            if !approx_eq(qk, q) {
                return Ok(ConsistencyReport::Violation(smp.violation(
                    ViolationKind::WeightedNotAffineOrExponential,
                    (r, r, None),
                    &axis(k + 1),
                    Some(&axis(k)),
                    Value::Approx(qk),
                    Value::Approx(q),
                )));
            }
        }
        let phi_r = q.ln() / eps;
        match phi {
            None => phi = Some((r, phi_r)),
            Some((r0, p0)) if !approx_eq(p0, phi_r) => {
                return Ok(ConsistencyReport::Violation(Violation {
                    kind: ViolationKind::WeightedExponentNotShared,
                    r: r0,
                    s: r,
                    t: None,
                    point: vec![Rational::zero(); m],
                    other_point: None,
                    epsilon: Some(smp.eps),
                    lhs: Value::Approx(p0),
                    rhs: Value::Approx(phi_r),
                }));
            }
            Some(_) => {}
        }
        rates[r] = Some(q);
    }
    let phi = phi.map(|(_, p)| p).unwrap_or(0.0);
    let mut a = vec![0.0; m];
    let mut b = vec![0.0; m];
    for r in 0..m {
        let g0 = diag[r][0].to_f64();
        match rates[r] {
            Some(q) => {
                a[r] = diffs[r][0].to_f64() / (q - 1.0);
                b[r] = g0 - a[r];
            }
            None => b[r] = g0,
        }
    }
    Ok(ConsistencyReport::WeightedExponential { a, phi, b })
}
