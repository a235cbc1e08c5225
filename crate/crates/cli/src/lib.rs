//! The `rgg` command line: JSON in, JSON out, with an exit-code contract of
//! 0 for success, 1 for a negative certificate and 2 for errors.

pub mod format;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value as Json};
use sha2::{Digest, Sha256};

use rgg_core::bilevel::{solve_bilevel, BilevelGame};
use rgg_core::characterize::{
    classify_weighted, cross_linearity_report, decompose_unweighted, ConsistencyReport, SampleGrid,
};
use rgg_core::costs::{as_tabulated, TabulateOptions};
use rgg_core::dynamics::{
    brute_force_pne, run_best_response_dynamics, verify_pne, BruteForceConfig, DynamicsConfig, ResponseMode,
    Schedule, DEFAULT_STRATEGY_CAP,
};
use rgg_core::gadgets::{
    build_gadget, check_ab_symmetry, expected_ab, violation_to_counterexample, AbSymmetry, GadgetLemma, GadgetSpec,
};
use rgg_core::matroid::{solve_via_theorem3, Nu};
use rgg_core::potential::{check_exact_potential, potential_unweighted, potential_weighted_affine};
use rgg_core::reductions::{parse_dimacs, reduce_forbidden_pairs, reduce_sat, ReductionConfig};
use rgg_core::{Certificate, CostModel, Game, Profile, Rational, Tabulated, Value};

use format::*;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{what}: invalid JSON at `{path}`: {message}")]
    Json { what: String, path: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Core(#[from] rgg_core::Error),
    #[error("{0}")]
    Input(String),
}

#[derive(Parser, Debug)]
#[command(name = "rgg", version, about = "Resource graph games: equilibria, potentials, consistency checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Search for a pure Nash equilibrium.
    Solve(SolveArgs),
    /// Check whether a profile is a pure Nash equilibrium.
    Verify(VerifyArgs),
    /// Test a cost function for consistency.
    Characterize(CharacterizeArgs),
    /// Build a two-player gadget game from a cost function.
    Gadget(GadgetArgs),
    /// Evaluate (or check) the closed-form exact potential.
    Potential(PotentialArgs),
    /// Generate a single-player game from a hardness instance.
    Reduce(ReduceArgs),
    /// Solve a bilevel load-balancing scenario.
    Bilevel(BilevelArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Bruteforce,
    Dynamics,
    Theorem3,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    pub game: PathBuf,
    #[arg(long, value_enum, default_value = "bruteforce")]
    pub method: Method,
    /// Seeds the random start profile and player order of `dynamics`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
    /// Worker threads for exhaustive search.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Take the first improving strategy instead of a best response.
    #[arg(long)]
    pub better: bool,
    /// Include the improvement steps of `dynamics`.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub game: PathBuf,
    /// JSON object with a `profile` key, e.g. the output of `solve`.
    #[arg(long)]
    pub profile: PathBuf,
}

#[derive(Args, Debug)]
pub struct CharacterizeArgs {
    /// Game file or cost file.
    pub file: PathBuf,
    /// Run the weighted (affine / exponential) classification.
    #[arg(long)]
    pub weighted: bool,
    /// Load bound L of the unweighted checks; defaults to `bounds.L`, then 2.
    #[arg(long)]
    pub bound: Option<u32>,
    /// Grid step of the weighted checks.
    #[arg(long, default_value = "1")]
    pub step: String,
    /// Grid points per axis of the weighted checks.
    #[arg(long, default_value_t = 5)]
    pub count: usize,
    /// Report every failing cross-linearity condition, not just the first.
    #[arg(long)]
    pub all: bool,
    /// Round exponential costs into tables for the unweighted checks.
    #[arg(long)]
    pub allow_float: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LemmaArg {
    L3,
    L4,
    L5,
    L6,
    /// Find the first violation and build its gadget.
    Auto,
}

#[derive(Args, Debug)]
pub struct GadgetArgs {
    /// Game file or cost file.
    pub file: PathBuf,
    #[arg(long, value_enum)]
    pub lemma: LemmaArg,
    /// Comma-separated load vector, entries `p` or `p/q`.
    #[arg(long, value_delimiter = ',')]
    pub point: Vec<String>,
    /// Second point of the diagonal (`l6`) construction.
    #[arg(long, value_delimiter = ',')]
    pub other_point: Vec<String>,
    /// `r,s` or `r,s,t`.
    #[arg(long, value_delimiter = ',')]
    pub resources: Vec<usize>,
    /// Free-player weight of the weighted variant.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Certify (A, B)-symmetry and the absence of equilibria.
    #[arg(long)]
    pub confirm: bool,
    /// Load bound for `auto`; defaults to `bounds.L`, then 2.
    #[arg(long)]
    pub bound: Option<u32>,
}

#[derive(Args, Debug)]
pub struct PotentialArgs {
    pub game: PathBuf,
    /// Profile to evaluate; defaults to every player's first strategy.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Check the exact-potential identity over all profiles instead.
    #[arg(long)]
    pub check: bool,
    /// Profile budget of `--check` (sampled above it).
    #[arg(long, default_value_t = 100_000)]
    pub bound: u64,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    #[command(subcommand)]
    pub kind: ReduceKind,
}

#[derive(Subcommand, Debug)]
pub enum ReduceKind {
    /// DIMACS CNF with three literals per clause.
    Sat { file: PathBuf },
    /// JSON `{n_vertices, edges: [[u, v]], s, t, pairs: [[e, e']]}`.
    Pairs {
        file: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        path_cap: usize,
    },
}

#[derive(Args, Debug)]
pub struct BilevelArgs {
    /// JSON `{budget, m, players: [matroid], start?}`.
    pub scenario: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,
}

/// What a command prints and how it exits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

struct Input {
    text: String,
    sha256: String,
}

fn read(path: &Path) -> Result<Input, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Input(format!("{} is not UTF-8", path.display())))?;
    Ok(Input { text, sha256 })
}

fn envelope(command: &str, hashes: &[(&str, &Input)], body: Json) -> Json {
    let mut map = Map::new();
    map.insert("tool".into(), json!("rgg"));
    map.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    map.insert("command".into(), json!(command));
    let h: Map<String, Json> = hashes.iter().map(|(k, i)| (k.to_string(), json!(i.sha256))).collect();
    map.insert("input_sha256".into(), Json::Object(h));
    if let Json::Object(b) = body {
        map.extend(b);
    }
    Json::Object(map)
}

fn pretty(v: &Json) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn emit(v: Json, negative: bool) -> Outcome {
    Outcome { stdout: pretty(&v), code: negative as i32 }
}

fn load_game(input: &Input) -> Result<(GameFile, Game), CliError> {
    let file: GameFile = parse(&input.text, "game file")?;
    let game = file.to_game()?;
    Ok((file, game))
}

fn rational(s: &str) -> Result<Rational, CliError> {
    s.trim().parse().map_err(|_| CliError::Input(format!("not a rational: {s:?}")))
}

fn canonical_start(game: &Game) -> Result<Profile, CliError> {
    Ok(Profile::new(game.strategy_table(DEFAULT_STRATEGY_CAP)?.into_iter().map(|l| l[0].clone()).collect()))
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Verify(a) => verify(a),
        Command::Characterize(a) => characterize(a),
        Command::Gadget(a) => gadget(a),
        Command::Potential(a) => potential(a),
        Command::Reduce(a) => reduce(a),
        Command::Bilevel(a) => bilevel(a),
    }
}

fn solve(a: &SolveArgs) -> Result<Outcome, CliError> {
    let input = read(&a.game)?;
    let (_, game) = load_game(&input)?;
    let hashes = [("game", &input)];
    let mut body = Map::new();
    body.insert("method".into(), json!(format!("{:?}", a.method).to_lowercase()));
    let negative = match a.method {
        Method::Bruteforce => {
            let cert = brute_force_pne(&game, &BruteForceConfig { jobs: a.jobs, ..BruteForceConfig::default() })?;
            if let Certificate::PneFound { profile } = &cert {
                body.insert("profile".into(), profile_json(profile));
            }
            body.insert("certificate".into(), certificate_json(&cert));
            !cert.is_positive()
        }
        Method::Dynamics => {
            let (start, schedule) = match a.seed {
                None => (canonical_start(&game)?, Schedule::RoundRobin),
                Some(seed) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let table = game.strategy_table(DEFAULT_STRATEGY_CAP)?;
                    let start = Profile::new(table.iter().map(|l| l[rng.gen_range(0..l.len())].clone()).collect());
                    (start, Schedule::Random { seed })
                }
            };
            let config = DynamicsConfig {
                max_iters: a.max_iters,
                schedule,
                mode: if a.better { ResponseMode::Better } else { ResponseMode::Best },
                cap: DEFAULT_STRATEGY_CAP,
            };
            let trace = run_best_response_dynamics(&game, &start, &config)?;
            let cert = verify_pne(&game, &trace.terminal, DEFAULT_STRATEGY_CAP)?;
            body.insert("start".into(), profile_json(&start));
            body.insert("converged".into(), json!(trace.converged));
            body.insert("iterations".into(), json!(trace.iterations));
            if a.trace {
                body.insert("trace".into(), trace_json(&trace));
            }
            body.insert("profile".into(), profile_json(&trace.terminal));
            body.insert("certificate".into(), certificate_json(&cert));
            !cert.is_positive()
        }
        Method::Theorem3 => {
            let (profile, cert) = match game.cost() {
                CostModel::Bilevel { .. } => {
                    let sol = solve_bilevel(&BilevelGame::new(game.clone())?, a.max_iters)?;
                    (sol.profile, sol.certificate)
                }
                CostModel::PlayerSpecificSeparable { nu } => {
                    let nu = nu.iter().map(|t| Nu::new(t.clone())).collect::<Result<Vec<_>, _>>()?;
                    let lift = solve_via_theorem3(&game, &nu, a.max_iters)?;
                    (lift.profile, lift.certificate)
                }
                other => {
                    return Err(CliError::Input(format!(
                        "theorem3 needs a bilevel or player-specific separable cost, got {}",
                        other.kind()
                    )))
                }
            };
            body.insert("profile".into(), profile_json(&profile));
            body.insert("certificate".into(), certificate_json(&cert));
            !cert.is_positive()
        }
    };
    Ok(emit(envelope("solve", &hashes, Json::Object(body)), negative))
}

fn verify(a: &VerifyArgs) -> Result<Outcome, CliError> {
    let input = read(&a.game)?;
    let pinput = read(&a.profile)?;
    let (_, game) = load_game(&input)?;
    let profile = parse_profile(&pinput.text, game.m())?;
    let cert = verify_pne(&game, &profile, DEFAULT_STRATEGY_CAP)?;
    let body = json!({ "profile": profile_json(&profile), "certificate": certificate_json(&cert) });
    Ok(emit(envelope("verify", &[("game", &input), ("profile", &pinput)], body), !cert.is_positive()))
}

/// Tables covering `L + 2`, as the unweighted checks need.
fn tables_for(model: &CostModel, m: usize, bound: u32, allow_float: bool) -> Result<Tabulated, CliError> {
    if let CostModel::Tabulated(t) = model {
        return Ok(t.clone());
    }
    let opts = TabulateOptions { max_load: bound + 2, player: None, allow_float };
    Ok(as_tabulated(model, m, &opts)?)
}

fn characterize(a: &CharacterizeArgs) -> Result<Outcome, CliError> {
    let input = read(&a.file)?;
    let src = CostSource::parse(&input.text)?;
    let model = src.model()?;
    let m = src.m();
    let mut body = Map::new();
    let report = if a.weighted {
        let grid = SampleGrid { step: rational(&a.step)?, count: a.count, m: Some(m) };
        body.insert("grid".into(), json!({ "step": grid.step.to_string(), "count": grid.count }));
        classify_weighted(&model, &grid)?
    } else {
        let bound = a.bound.or(src.bounds().map(|b| b.l)).unwrap_or(2);
        let t = tables_for(&model, m, bound, a.allow_float)?;
        body.insert("bound".into(), json!(bound));
        if a.all {
            let rep = cross_linearity_report(&t, bound)?;
            let all: Map<String, Json> = [("a", &rep.a), ("b", &rep.b), ("three", &rep.three), ("diagonal", &rep.diagonal)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v.as_ref().map(violation_json).unwrap_or(Json::Null)))
                .collect();
            body.insert("cross_linearity".into(), Json::Object(all));
        }
        decompose_unweighted(&t, bound)?
    };
    let negative = matches!(report, ConsistencyReport::Violation(_));
    body.insert("report".into(), report_json(&report));
    Ok(emit(envelope("characterize", &[("file", &input)], Json::Object(body)), negative))
}

fn rationals(v: &[String]) -> Result<Vec<Rational>, CliError> {
    v.iter().map(|s| rational(s)).collect()
}

fn gadget(a: &GadgetArgs) -> Result<Outcome, CliError> {
    let input = read(&a.file)?;
    let src = CostSource::parse(&input.text)?;
    let model = src.model()?;
    let m = src.m();
    let hashes = [("file", &input)];
    if a.lemma == LemmaArg::Auto {
        let bound = a.bound.or(src.bounds().map(|b| b.l)).unwrap_or(2);
        let report = match &a.epsilon {
            Some(e) => classify_weighted(&model, &SampleGrid { step: rational(e)?, count: 5, m: Some(m) })?,
            None => decompose_unweighted(&tables_for(&model, m, bound, false)?, bound)?,
        };
        let v = match report {
            ConsistencyReport::Violation(v) => v,
            other => {
                let body = json!({ "report": report_json(&other) });
                return Ok(emit(envelope("gadget", &hashes, body), false));
            }
        };
        let ce = violation_to_counterexample(&model, &v)?;
        let body = json!({
            "violation": violation_json(&v),
            "lemma": format!("{:?}", ce.spec.lemma).to_lowercase(),
            "game": GameFile::from_game(&ce.game, None),
            "symmetry": symmetry_json(&ce.symmetry),
            "certificate": certificate_json(&ce.certificate),
        });
        return Ok(emit(envelope("gadget", &hashes, body), !ce.certificate.is_positive()));
    }
    let lemma = match a.lemma {
        LemmaArg::L3 => GadgetLemma::L3,
        LemmaArg::L4 => GadgetLemma::L4,
        LemmaArg::L5 => GadgetLemma::L5,
        LemmaArg::L6 => GadgetLemma::L6Chain,
        LemmaArg::Auto => unreachable!(),
    };
    let (r, s, t) = match a.resources.as_slice() {
        [r, s] => (*r, *s, None),
        [r, s, t] => (*r, *s, Some(*t)),
        _ => return Err(CliError::Input("--resources takes r,s or r,s,t".into())),
    };
    let point = rationals(&a.point)?;
    if point.len() != m {
        return Err(CliError::Input(format!("--point has {} entries, the cost has {m} resources", point.len())));
    }
    let spec = GadgetSpec {
        lemma,
        base_cost: model,
        point,
        other_point: if a.other_point.is_empty() { None } else { Some(rationals(&a.other_point)?) },
        resources: (r, s, t),
        epsilon: a.epsilon.as_deref().map(rational).transpose()?,
    };
    let game = build_gadget(&spec)?;
    let file = GameFile::from_game(&game, None);
    if !a.confirm {
        return Ok(Outcome { stdout: pretty(&serde_json::to_value(&file).expect("serializable")), code: 0 });
    }
    let (ea, eb) = expected_ab(&spec)?;
    let symmetry = match check_ab_symmetry(&game, 0, 1, 1 << 20)? {
        AbSymmetry::Symmetric(w) => symmetry_json(&w),
        AbSymmetry::NotSymmetric { profile, reason } => {
            json!({ "failure": reason, "profile": profile_json(&profile) })
        }
    };
    let cert = brute_force_pne(&game, &BruteForceConfig::default())?;
    let body = json!({
        "game": file,
        "expected": { "a": value_json(&ea), "b": value_json(&eb) },
        "symmetry": symmetry,
        "certificate": certificate_json(&cert),
    });
    Ok(emit(envelope("gadget", &hashes, body), !cert.is_positive()))
}

fn closed_form(game: &Game, p: &Profile) -> Result<Rational, CliError> {
    Ok(match game.cost() {
        CostModel::SeparablePlusLinear { .. } => potential_unweighted(game, p)?,
        CostModel::Affine { .. } => potential_weighted_affine(game, p)?,
        other => {
            return Err(CliError::Input(format!(
                "no closed-form potential for {} costs",
                other.kind()
            )))
        }
    })
}

fn potential(a: &PotentialArgs) -> Result<Outcome, CliError> {
    let input = read(&a.game)?;
    let (_, game) = load_game(&input)?;
    if a.check {
        let res = check_exact_potential(
            &game,
            |p| closed_form(&game, p).map(Value::Exact).map_err(|e| match e {
                CliError::Core(c) => c,
                other => rgg_core::Error::Precondition(other.to_string()),
            }),
            a.bound,
            DEFAULT_STRATEGY_CAP,
        )?;
        let body = json!({ "check": potential_check_json(&res) });
        return Ok(emit(envelope("potential", &[("game", &input)], body), !res.passed()));
    }
    let profile = match &a.profile {
        Some(p) => parse_profile(&read(p)?.text, game.m())?,
        None => canonical_start(&game)?,
    };
    let v = closed_form(&game, &profile)?;
    Ok(Outcome { stdout: format!("{v}\n"), code: 0 })
}

fn reduce(a: &ReduceArgs) -> Result<Outcome, CliError> {
    let game = match &a.kind {
        ReduceKind::Sat { file } => {
            let inst = parse_dimacs(&read(file)?.text)?;
            reduce_sat(&inst, &ReductionConfig::default())?
        }
        ReduceKind::Pairs { file, path_cap } => {
            let f: PairsFile = parse(&read(file)?.text, "pairs file")?;
            let cfg = ReductionConfig { path_cap: *path_cap, ..ReductionConfig::default() };
            reduce_forbidden_pairs(&f.to_instance(), &cfg)?
        }
    };
    let file = GameFile::from_game(&game, Some(Bounds { l: 1 }));
    Ok(Outcome { stdout: pretty(&serde_json::to_value(&file).expect("serializable")), code: 0 })
}

fn bilevel(a: &BilevelArgs) -> Result<Outcome, CliError> {
    let input = read(&a.scenario)?;
    let sc: ScenarioFile = parse(&input.text, "scenario file")?;
    let spaces = sc.players.iter().map(|d| d.to_desc()).collect();
    let g = BilevelGame::from_matroids(sc.m, sc.budget.0, spaces)?;
    let sol = solve_bilevel(&g, a.max_iters)?;
    let mut body = bilevel_json(&sol);
    if let Some(start) = &sc.start {
        let start = Profile::new(start.iter().map(|s| strategy(sc.m, s)).collect::<Result<_, _>>()?);
        let config = DynamicsConfig { max_iters: a.max_iters, ..DynamicsConfig::default() };
        let trace = run_best_response_dynamics(g.game(), &start, &config)?;
        let cert = verify_pne(g.game(), &trace.terminal, DEFAULT_STRATEGY_CAP)?;
        body["from_start"] = json!({
            "converged": trace.converged,
            "iterations": trace.iterations,
            "profile": profile_json(&trace.terminal),
            "certificate": certificate_json(&cert),
        });
    }
    let negative = !sol.certificate.is_positive();
    Ok(emit(envelope("bilevel", &[("scenario", &input)], body), negative))
}
