//! JSON documents: game files, cost files, profiles, scenario and instance
//! files, and the JSON forms of certificates and reports.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value as Json};

use rgg_core::bilevel::BilevelSolution;
use rgg_core::characterize::{ConsistencyReport, Violation};
use rgg_core::costs::{TabulatedResource, Tabulated};
use rgg_core::dynamics::{Certificate, DynamicsTrace};
use rgg_core::gadgets::SymmetryWitness;
use rgg_core::matroid::{GraphEdge, MatroidDesc};
use rgg_core::potential::PotentialCheck;
use rgg_core::reductions::ForbiddenPairsInstance;
use rgg_core::{CostModel, Game, Matrix, Player, Profile, Rational, Strategy, StrategySpace, Value};

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// A rational written as `"p/q"` (integers are also accepted on input).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Q(pub Rational);

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            S(String),
            I(i64),
        }
        match Raw::deserialize(d)? {
            Raw::S(s) => s.parse().map(Q).map_err(serde::de::Error::custom),
            Raw::I(i) => Ok(Q(Rational::from_int(i as i128))),
        }
    }
}

fn qs(v: &[Rational]) -> Vec<Q> {
    v.iter().copied().map(Q).collect()
}

fn rs(v: &[Q]) -> Vec<Rational> {
    v.iter().map(|q| q.0).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub version: u32,
    pub m: usize,
    pub players: Vec<PlayerDto>,
    pub cost: CostDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Bounds>,
}

/// Cost function without players, for `characterize` and `gadget`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostFile {
    pub version: u32,
    pub m: usize,
    pub cost: CostDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Bounds>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    #[serde(rename = "L")]
    pub l: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerDto {
    pub weight: Q,
    pub strategies: StrategiesDto,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategiesDto {
    Explicit(Vec<Vec<usize>>),
    Matroid(MatroidDto),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MatroidDto {
    Uniform { k: usize },
    Partition { blocks: Vec<Vec<usize>>, quotas: Vec<usize> },
    /// Edges as `[u, v, resource]`.
    Graphic { vertices: usize, edges: Vec<[usize; 3]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostDto {
    Tabulated(TabulatedDto),
    SeparablePlusLinear(SplDto),
    Affine(AffineDto),
    Exponential(ExponentialDto),
    Bilevel(BilevelDto),
    PlayerSpecificSeparable(PssDto),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabulatedDto {
    pub max_load: u32,
    pub resources: Vec<TableDto>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableDto {
    pub neighborhood: Vec<usize>,
    pub values: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplDto {
    pub f: Vec<Vec<Q>>,
    pub a: Vec<Vec<Q>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineDto {
    pub a: Vec<Vec<Q>>,
    pub b: Vec<Q>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentialDto {
    pub a: Vec<f64>,
    pub phi: f64,
    pub b: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BilevelDto {
    pub budget: Q,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PssDto {
    pub nu: Vec<Vec<Vec<Q>>>,
}

/// Parses with the failing JSON path in the error.
pub fn parse<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::Json {
        what: what.to_string(),
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

fn matrix(rows: &[Vec<Q>]) -> Result<Matrix, CliError> {
    Ok(Matrix::new(rows.iter().map(|r| rs(r)).collect())?)
}

fn matrix_dto(a: &Matrix) -> Vec<Vec<Q>> {
    a.rows().iter().map(|r| qs(r)).collect()
}

impl CostDto {
    pub fn to_model(&self, m: usize) -> Result<CostModel, CliError> {
        Ok(match self {
            CostDto::Tabulated(t) => {
                let resources = t
                    .resources
                    .iter()
                    .map(|r| TabulatedResource { neighborhood: r.neighborhood.clone(), values: rs(&r.values) })
                    .collect();
                CostModel::Tabulated(Tabulated::new(m, t.max_load, resources)?)
            }
            CostDto::SeparablePlusLinear(d) => CostModel::SeparablePlusLinear {
                f: d.f.iter().map(|r| rs(r)).collect(),
                a: matrix(&d.a)?,
            },
            CostDto::Affine(d) => CostModel::Affine { a: matrix(&d.a)?, b: rs(&d.b) },
            CostDto::Exponential(d) => CostModel::Exponential { a: d.a.clone(), phi: d.phi, b: d.b.clone() },
            CostDto::Bilevel(d) => CostModel::Bilevel { budget: d.budget.0 },
            CostDto::PlayerSpecificSeparable(d) => CostModel::PlayerSpecificSeparable {
                nu: d.nu.iter().map(|p| p.iter().map(|r| rs(r)).collect()).collect(),
            },
        })
    }

    pub fn from_model(model: &CostModel) -> Self {
        match model {
            CostModel::Tabulated(t) => CostDto::Tabulated(TabulatedDto {
                max_load: t.max_load(),
                resources: t
                    .resources()
                    .iter()
                    .map(|r| TableDto { neighborhood: r.neighborhood.clone(), values: qs(&r.values) })
                    .collect(),
            }),
            CostModel::SeparablePlusLinear { f, a } => CostDto::SeparablePlusLinear(SplDto {
                f: f.iter().map(|r| qs(r)).collect(),
                a: matrix_dto(a),
            }),
            CostModel::Affine { a, b } => CostDto::Affine(AffineDto { a: matrix_dto(a), b: qs(b) }),
            CostModel::Exponential { a, phi, b } => {
                CostDto::Exponential(ExponentialDto { a: a.clone(), phi: *phi, b: b.clone() })
            }
            CostModel::Bilevel { budget } => CostDto::Bilevel(BilevelDto { budget: Q(*budget) }),
            CostModel::PlayerSpecificSeparable { nu } => CostDto::PlayerSpecificSeparable(PssDto {
                nu: nu.iter().map(|p| p.iter().map(|r| qs(r)).collect()).collect(),
            }),
        }
    }
}

impl MatroidDto {
    pub fn to_desc(&self) -> MatroidDesc {
        match self {
            MatroidDto::Uniform { k } => MatroidDesc::Uniform { k: *k },
            MatroidDto::Partition { blocks, quotas } => {
                MatroidDesc::Partition { blocks: blocks.clone(), quotas: quotas.clone() }
            }
            MatroidDto::Graphic { vertices, edges } => MatroidDesc::Graphic {
                vertices: *vertices,
                edges: edges.iter().map(|&[u, v, resource]| GraphEdge { u, v, resource }).collect(),
            },
        }
    }

    pub fn from_desc(d: &MatroidDesc) -> Self {
        match d {
            MatroidDesc::Uniform { k } => MatroidDto::Uniform { k: *k },
            MatroidDesc::Partition { blocks, quotas } => {
                MatroidDto::Partition { blocks: blocks.clone(), quotas: quotas.clone() }
            }
            MatroidDesc::Graphic { vertices, edges } => MatroidDto::Graphic {
                vertices: *vertices,
                edges: edges.iter().map(|e| [e.u, e.v, e.resource]).collect(),
            },
        }
    }
}

pub fn strategy(m: usize, support: &[usize]) -> Result<Strategy, CliError> {
    Ok(Strategy::from_support(m, support)?)
}

impl GameFile {
    pub fn to_game(&self) -> Result<Game, CliError> {
        if self.version != FORMAT_VERSION {
            return Err(CliError::Input(format!("unsupported format version {}", self.version)));
        }
        let players = self
            .players
            .iter()
            .map(|p| {
                let space = match &p.strategies {
                    StrategiesDto::Explicit(list) => StrategySpace::explicit(
                        list.iter().map(|s| strategy(self.m, s)).collect::<Result<_, _>>()?,
                    ),
                    StrategiesDto::Matroid(d) => StrategySpace::MatroidBases(d.to_desc()),
                };
                Ok(Player::new(p.weight.0, space))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(Game::new(self.m, players, self.cost.to_model(self.m)?)?)
    }

    pub fn from_game(game: &Game, bounds: Option<Bounds>) -> Self {
        let players = game
            .players()
            .iter()
            .map(|p| PlayerDto {
                weight: Q(p.weight),
                strategies: match &p.space {
                    StrategySpace::Explicit(list) => StrategiesDto::Explicit(list.iter().map(|s| s.support()).collect()),
                    StrategySpace::MatroidBases(d) => StrategiesDto::Matroid(MatroidDto::from_desc(d)),
                },
            })
            .collect();
        GameFile { version: FORMAT_VERSION, m: game.m(), players, cost: CostDto::from_model(game.cost()), bounds }
    }
}

/// A game file or a cost file, told apart by the `players` key.
pub enum CostSource {
    Game(GameFile),
    Cost(CostFile),
}

impl CostSource {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let probe: Json = serde_json::from_str(text).map_err(|e| CliError::Json {
            what: "input".into(),
            path: ".".into(),
            message: e.to_string(),
        })?;
        if probe.get("players").is_some() {
            Ok(CostSource::Game(parse(text, "game file")?))
        } else {
            Ok(CostSource::Cost(parse(text, "cost file")?))
        }
    }

    pub fn m(&self) -> usize {
        match self {
            CostSource::Game(g) => g.m,
            CostSource::Cost(c) => c.m,
        }
    }

    pub fn bounds(&self) -> Option<Bounds> {
        match self {
            CostSource::Game(g) => g.bounds,
            CostSource::Cost(c) => c.bounds,
        }
    }

    pub fn model(&self) -> Result<CostModel, CliError> {
        match self {
            CostSource::Game(g) => g.cost.to_model(g.m),
            CostSource::Cost(c) => {
                if c.version != FORMAT_VERSION {
                    return Err(CliError::Input(format!("unsupported format version {}", c.version)));
                }
                c.cost.to_model(c.m)
            }
        }
    }
}

/// Reads the `profile` key of any JSON object (so `solve` output can be fed
/// back unchanged): a list of supports, one per player.
pub fn parse_profile(text: &str, m: usize) -> Result<Profile, CliError> {
    #[derive(Deserialize)]
    struct Wrapper {
        profile: Vec<Vec<usize>>,
    }
    let w: Wrapper = parse(text, "profile file")?;
    Ok(Profile::new(w.profile.iter().map(|s| strategy(m, s)).collect::<Result<_, _>>()?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairsFile {
    pub n_vertices: usize,
    pub edges: Vec<[usize; 2]>,
    pub s: usize,
    pub t: usize,
    #[serde(default)]
    pub pairs: Vec<[usize; 2]>,
}

impl PairsFile {
    pub fn to_instance(&self) -> ForbiddenPairsInstance {
        ForbiddenPairsInstance {
            n_vertices: self.n_vertices,
            edges: self.edges.iter().map(|&[a, b]| (a, b)).collect(),
            s: self.s,
            t: self.t,
            pairs: self.pairs.iter().map(|&[a, b]| (a, b)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub budget: Q,
    pub m: usize,
    pub players: Vec<MatroidDto>,
    #[serde(default)]
    pub start: Option<Vec<Vec<usize>>>,
}

pub fn profile_json(p: &Profile) -> Json {
    Json::Array(p.choices.iter().map(|s| json!(s.support())).collect())
}

pub fn value_json(v: &Value) -> Json {
    match v {
        Value::Exact(r) => json!(r.to_string()),
        Value::Approx(f) => json!(f),
    }
}

fn rationals_json(v: &[Rational]) -> Json {
    Json::Array(v.iter().map(|r| json!(r.to_string())).collect())
}

pub fn certificate_json(c: &Certificate) -> Json {
    match c {
        Certificate::IsPne => json!({ "kind": "is_pne" }),
        Certificate::NotPne { player, deviation, delta } => json!({
            "kind": "not_pne",
            "player": player,
            "deviation": deviation.support(),
            "delta": value_json(delta),
        }),
        Certificate::NoPneExists { profiles_checked } => {
            json!({ "kind": "no_pne_exists", "profiles_checked": profiles_checked })
        }
        Certificate::PneFound { profile } => json!({ "kind": "pne_found", "profile": profile_json(profile) }),
    }
}

pub fn trace_json(t: &DynamicsTrace) -> Json {
    json!({
        "converged": t.converged,
        "iterations": t.iterations,
        "steps": t.steps.iter().map(|s| json!({
            "player": s.player,
            "from": s.old.support(),
            "to": s.new.support(),
            "delta": value_json(&s.delta),
        })).collect::<Vec<_>>(),
    })
}

fn snake(kind: &str) -> String {
    let mut out = String::new();
    for (i, ch) in kind.chars().enumerate() {
        if ch.is_ascii_uppercase() {
            if i > 0 {
                out.push('_');
            }
            out.push(ch.to_ascii_lowercase());
        } else {
            out.push(ch);
        }
    }
    out
}

pub fn violation_json(v: &Violation) -> Json {
    json!({
        "kind": snake(&format!("{:?}", v.kind)),
        "r": v.r,
        "s": v.s,
        "t": v.t,
        "point": rationals_json(&v.point),
        "other_point": v.other_point.as_ref().map(|p| rationals_json(p)),
        "epsilon": v.epsilon.map(|e| e.to_string()),
        "lhs": value_json(&v.lhs),
        "rhs": value_json(&v.rhs),
    })
}

pub fn report_json(r: &ConsistencyReport) -> Json {
    match r {
        ConsistencyReport::UnweightedConsistent { f, a, bound } => json!({
            "kind": "unweighted_consistent",
            "f": f.iter().map(|row| rationals_json(row)).collect::<Vec<_>>(),
            "a": a.rows().iter().map(|row| rationals_json(row)).collect::<Vec<_>>(),
            "bound": bound,
        }),
        ConsistencyReport::WeightedAffine { a, b } => json!({
            "kind": "weighted_affine",
            "a": a.rows().iter().map(|row| rationals_json(row)).collect::<Vec<_>>(),
            "b": rationals_json(b),
        }),
        ConsistencyReport::WeightedExponential { a, phi, b } => json!({
            "kind": "weighted_exponential", "a": a, "phi": phi, "b": b,
        }),
        ConsistencyReport::Violation(v) => json!({ "kind": "violation", "violation": violation_json(v) }),
    }
}

pub fn symmetry_json(w: &SymmetryWitness) -> Json {
    json!({
        "a": value_json(&w.a_value),
        "b": value_json(&w.b_value),
        "swap_strategies": [w.swap_strategies.0.support(), w.swap_strategies.1.support()],
        "profiles_checked": w.profiles_checked,
    })
}

pub fn potential_check_json(c: &PotentialCheck) -> Json {
    match c {
        PotentialCheck::Pass { profiles_checked, deviations_checked, exhaustive } => json!({
            "kind": "pass",
            "profiles_checked": profiles_checked,
            "deviations_checked": deviations_checked,
            "exhaustive": exhaustive,
        }),
        PotentialCheck::Fail(w) => json!({
            "kind": "fail",
            "profile": profile_json(&w.profile),
            "player": w.player,
            "deviation": w.deviation.support(),
            "delta_potential": value_json(&w.delta_potential),
            "delta_cost": value_json(&w.delta_cost),
        }),
    }
}

pub fn bilevel_json(s: &BilevelSolution) -> Json {
    json!({
        "profile": profile_json(&s.profile),
        "certificate": certificate_json(&s.certificate),
        "loads": rationals_json(&s.loads),
        "attack": rationals_json(&s.attack),
    })
}
