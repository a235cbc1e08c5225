use std::path::{Path, PathBuf};
use std::process::Command;

use rgg_cli::format::{parse, GameFile};
use serde_json::Value as Json;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn rgg(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_rgg")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn json(r: &Run) -> Json {
    serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{e}: {}", r.stdout))
}

fn f(name: &str) -> String {
    fixture(name).display().to_string()
}

#[test]
fn potential_of_empty_game() {
    let r = rgg(&["potential", &f("empty_players.json")]);
    assert_eq!((r.code, r.stdout.as_str()), (0, "0/1\n"));
}

#[test]
fn asymmetric_gadget_has_no_equilibrium() {
    let dir = tempfile::tempdir().unwrap();
    let r = rgg(&["gadget", &f("affine_asymmetric.json"), "--lemma", "l3", "--point", "0,0", "--resources", "0,1"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let game = dir.path().join("gadget.json");
    std::fs::write(&game, &r.stdout).unwrap();
    let g: GameFile = parse(&r.stdout, "gadget").unwrap();
    assert_eq!((g.m, g.players.len()), (8, 2));
    let r = rgg(&["solve", game.to_str().unwrap(), "--method", "bruteforce"]);
    assert_eq!(r.code, 1);
    let out = json(&r);
    assert_eq!(out["certificate"]["kind"], "no_pne_exists");
    assert_eq!(out["certificate"]["profiles_checked"], 4);
}

#[test]
fn gadget_confirm_reports_the_two_values() {
    let r = rgg(&[
        "gadget", &f("affine_asymmetric.json"), "--lemma", "l3", "--point", "0,0", "--resources", "0,1", "--confirm",
    ]);
    assert_eq!(r.code, 1);
    let out = json(&r);
    assert_eq!(out["certificate"]["kind"], "no_pne_exists");
    let (a, b) = (&out["symmetry"]["a"], &out["symmetry"]["b"]);
    assert_ne!(a, b);
}

#[test]
fn auto_gadget_from_violation() {
    let r = rgg(&["gadget", &f("affine_asymmetric.json"), "--lemma", "auto"]);
    assert_eq!(r.code, 1, "{}", r.stderr);
    let out = json(&r);
    assert_eq!(out["violation"]["kind"], "jacobian_symmetry");
    assert_eq!(out["lemma"], "l3");
    assert_eq!(out["certificate"]["kind"], "no_pne_exists");
}

#[test]
fn characterize_symmetric_affine_weighted() {
    let r = rgg(&["characterize", &f("affine_symmetric.json"), "--weighted"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let out = json(&r);
    assert_eq!(out["report"]["kind"], "weighted_affine");
    assert_eq!(out["report"]["b"], serde_json::json!(["0/1", "1/2"]));
}

#[test]
fn characterize_reports_violations_with_exit_one() {
    let r = rgg(&["characterize", &f("affine_asymmetric.json"), "--all"]);
    assert_eq!(r.code, 1);
    let out = json(&r);
    assert_eq!(out["report"]["violation"]["kind"], "jacobian_symmetry");
    assert_eq!(out["report"]["violation"]["lhs"], "1/1");
    assert_eq!(out["report"]["violation"]["rhs"], "3/1");
    let r = rgg(&["characterize", &f("two_player_spl.json")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(json(&r)["report"]["kind"], "unweighted_consistent");
}

#[test]
fn solve_output_verifies_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    for method in ["bruteforce", "dynamics"] {
        let r = rgg(&["solve", &f("two_player_spl.json"), "--method", method, "--seed", "3"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let p = dir.path().join(format!("{method}.json"));
        std::fs::write(&p, &r.stdout).unwrap();
        let v = rgg(&["verify", &f("two_player_spl.json"), "--profile", p.to_str().unwrap()]);
        assert_eq!(v.code, 0, "{}", v.stderr);
        assert_eq!(json(&v)["certificate"]["kind"], "is_pne");
    }
}

#[test]
fn verify_reports_a_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    std::fs::write(&p, r#"{"profile": [[1, 2], [2]]}"#).unwrap();
    let v = rgg(&["verify", &f("two_player_spl.json"), "--profile", p.to_str().unwrap()]);
    assert_eq!(v.code, 1);
    let out = json(&v);
    assert_eq!(out["certificate"]["kind"], "not_pne");
}

#[test]
fn theorem3_on_bilevel_game() {
    let r = rgg(&["solve", &f("bilevel_game.json"), "--method", "theorem3"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(json(&r)["certificate"]["kind"], "is_pne");
}

#[test]
fn bilevel_scenario() {
    let r = rgg(&["bilevel", &f("scenario.json")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let out = json(&r);
    let mut loads: Vec<String> = out["loads"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().into()).collect();
    loads.sort();
    assert_eq!(loads, ["1/1", "2/1"]);
    assert_eq!(out["from_start"]["certificate"]["kind"], "is_pne");
}

#[test]
fn weighted_potential_check() {
    let r = rgg(&["potential", &f("weighted_affine.json"), "--check"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(json(&r)["check"]["kind"], "pass");
}

#[test]
fn reductions_produce_games() {
    let dir = tempfile::tempdir().unwrap();
    let r = rgg(&["reduce", "sat", &f("unsat.cnf")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let g: GameFile = parse(&r.stdout, "sat game").unwrap();
    assert_eq!(g.m, 6);
    let p = dir.path().join("sat.json");
    std::fs::write(&p, &r.stdout).unwrap();
    let s = rgg(&["solve", p.to_str().unwrap()]);
    assert_eq!(s.code, 0);

    let r = rgg(&["reduce", "pairs", &f("diamond_pairs.json")]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let g: GameFile = parse(&r.stdout, "pairs game").unwrap();
    assert_eq!(g.m, 4);
}

#[test]
fn malformed_input_names_the_path() {
    let r = rgg(&["solve", &f("unknown_field.json")]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("players[0]"), "{}", r.stderr);
    assert!(r.stderr.contains("colour"), "{}", r.stderr);
    let r = rgg(&["solve", &f("does_not_exist.json")]);
    assert_eq!(r.code, 2);
}

#[test]
fn game_files_round_trip() {
    for name in ["two_player_spl.json", "weighted_affine.json", "bilevel_game.json", "empty_players.json"] {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let file: GameFile = parse(&text, name).unwrap();
        let once = serde_json::to_string_pretty(&GameFile::from_game(&file.to_game().unwrap(), file.bounds)).unwrap();
        let again: GameFile = parse(&once, name).unwrap();
        let twice = serde_json::to_string_pretty(&GameFile::from_game(&again.to_game().unwrap(), again.bounds)).unwrap();
        assert_eq!(once, twice);
    }
}

#[test]
fn output_embeds_version_and_input_hash() {
    use sha2::Digest;
    let r = rgg(&["solve", &f("two_player_spl.json")]);
    let out = json(&r);
    assert_eq!(out["version"], env!("CARGO_PKG_VERSION"));
    let bytes = std::fs::read(fixture("two_player_spl.json")).unwrap();
    assert_eq!(out["input_sha256"]["game"], hex::encode(sha2::Sha256::digest(bytes)));
}
